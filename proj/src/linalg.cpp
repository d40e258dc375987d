#include "furstenberg/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "furstenberg/errors.hpp"

namespace furstenberg {

namespace {

constexpr std::string_view kModule = "linalg";

[[noreturn]] void fail(ErrorCode code, const std::string& detail) {
  throw Error(kModule, code, detail);
}

void require_same_dim(std::size_t a, std::size_t b) {
  if (a != b) fail(ErrorCode::DimensionMismatch, std::to_string(a) + " vs " + std::to_string(b));
}

// determinant of a k x k row-major block, destroys its input
double det_inplace(std::vector<double>& m, std::size_t k) {
  double det = 1.0;
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < k; ++r)
      if (std::abs(m[r * k + c]) > std::abs(m[piv * k + c])) piv = r;
    if (m[piv * k + c] == 0.0) return 0.0;
    if (piv != c) {
      for (std::size_t j = 0; j < k; ++j) std::swap(m[c * k + j], m[piv * k + j]);
      det = -det;
    }
    const double p = m[c * k + c];
    det *= p;
    for (std::size_t r = c + 1; r < k; ++r) {
      const double f = m[r * k + c] / p;
      if (f == 0.0) continue;
      for (std::size_t j = c + 1; j < k; ++j) m[r * k + j] -= f * m[c * k + j];
    }
  }
  return det;
}

double minor_of(const SquareMatrix& g, std::span<const std::size_t> rows,
                std::span<const std::size_t> cols) {
  const std::size_t k = rows.size();
  if (k == 1) return g(rows[0], cols[0]);
  if (k == 2)
    return g(rows[0], cols[0]) * g(rows[1], cols[1]) - g(rows[0], cols[1]) * g(rows[1], cols[0]);
  std::vector<double> m(k * k);
  for (std::size_t r = 0; r < k; ++r)
    for (std::size_t c = 0; c < k; ++c) m[r * k + c] = g(rows[r], cols[c]);
  return det_inplace(m, k);
}

void canonical_sign(Vector& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (std::abs(v[i]) > std::abs(v[best])) best = i;
  if (v[best] < 0)
    for (double& x : v) x = -x;
}

}  // namespace

// ---------------------------------------------------------------- SquareMatrix

SquareMatrix::SquareMatrix(std::size_t dim) : dim_(dim), a_(dim * dim, 0.0) {}

SquareMatrix::SquareMatrix(std::size_t dim, std::vector<double> row_major)
    : dim_(dim), a_(std::move(row_major)) {
  if (a_.size() != dim * dim)
    fail(ErrorCode::DimensionMismatch, "expected " + std::to_string(dim * dim) + " entries");
}

SquareMatrix::SquareMatrix(std::initializer_list<std::initializer_list<double>> rows)
    : dim_(rows.size()) {
  a_.reserve(dim_ * dim_);
  for (const auto& r : rows) {
    if (r.size() != dim_) fail(ErrorCode::DimensionMismatch, "matrix must be square");
    a_.insert(a_.end(), r.begin(), r.end());
  }
}

SquareMatrix SquareMatrix::identity(std::size_t dim) {
  SquareMatrix m(dim);
  for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
  return m;
}

SquareMatrix SquareMatrix::diagonal(std::span<const double> diag) {
  SquareMatrix m(diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return m;
}

SquareMatrix SquareMatrix::rotation(double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  return SquareMatrix{{c, -s}, {s, c}};
}

Vector SquareMatrix::column(std::size_t j) const {
  Vector v(dim_);
  for (std::size_t i = 0; i < dim_; ++i) v[i] = (*this)(i, j);
  return v;
}

SquareMatrix SquareMatrix::transposed() const {
  SquareMatrix t(dim_);
  for (std::size_t i = 0; i < dim_; ++i)
    for (std::size_t j = 0; j < dim_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

double SquareMatrix::max_abs() const {
  double m = 0.0;
  for (double x : a_) m = std::max(m, std::abs(x));
  return m;
}

bool SquareMatrix::all_finite() const {
  return std::all_of(a_.begin(), a_.end(), [](double x) { return std::isfinite(x); });
}

SquareMatrix operator*(const SquareMatrix& x, const SquareMatrix& y) {
  require_same_dim(x.dim(), y.dim());
  const std::size_t d = x.dim();
  SquareMatrix z(d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t k = 0; k < d; ++k) {
      const double xik = x(i, k);
      if (xik == 0.0) continue;
      for (std::size_t j = 0; j < d; ++j) z(i, j) += xik * y(k, j);
    }
  return z;
}

SquareMatrix operator*(double s, const SquareMatrix& x) {
  SquareMatrix z = x;
  for (double& v : z.data()) v *= s;
  return z;
}

SquareMatrix operator-(const SquareMatrix& x, const SquareMatrix& y) {
  require_same_dim(x.dim(), y.dim());
  SquareMatrix z = x;
  auto zd = z.data();
  auto yd = y.data();
  for (std::size_t i = 0; i < zd.size(); ++i) zd[i] -= yd[i];
  return z;
}

Vector operator*(const SquareMatrix& g, std::span<const double> v) {
  require_same_dim(g.dim(), v.size());
  Vector out(g.dim(), 0.0);
  for (std::size_t i = 0; i < g.dim(); ++i) out[i] = dot(g.row(i), v);
  return out;
}

Vector transpose_apply(const SquareMatrix& g, std::span<const double> v) {
  require_same_dim(g.dim(), v.size());
  Vector out(g.dim(), 0.0);
  for (std::size_t i = 0; i < g.dim(); ++i)
    for (std::size_t j = 0; j < g.dim(); ++j) out[j] += g(i, j) * v[i];
  return out;
}

double dot(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

double norm(std::span<const double> x) {
  // scaled to stay finite for large entries
  double scale = 0.0;
  for (double v : x) scale = std::max(scale, std::abs(v));
  if (scale == 0.0 || !std::isfinite(scale)) return scale;
  double s = 0.0;
  for (double v : x) {
    const double t = v / scale;
    s += t * t;
  }
  return scale * std::sqrt(s);
}

double frobenius_norm(const SquareMatrix& g) { return norm(g.data()); }

double operator_norm(const SquareMatrix& g) {
  const double s = g.max_abs();
  if (s == 0.0) return 0.0;
  const Vector zeros(g.dim(), 0.0);
  const auto svd = graded_svd((1.0 / s) * g, zeros);
  return s * std::exp(svd.log_sigma[0]);
}

double determinant(const SquareMatrix& g) {
  std::vector<double> m(g.data().begin(), g.data().end());
  return det_inplace(m, g.dim());
}

SquareMatrix inverse(const SquareMatrix& g) {
  const std::size_t d = g.dim();
  if (!g.all_finite()) fail(ErrorCode::NonFinite, "inverse of non-finite matrix");
  SquareMatrix a = g;
  SquareMatrix inv = SquareMatrix::identity(d);
  const double scale = g.max_abs();
  for (std::size_t c = 0; c < d; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < d; ++r)
      if (std::abs(a(r, c)) > std::abs(a(piv, c))) piv = r;
    if (!(std::abs(a(piv, c)) > 1e-14 * scale)) fail(ErrorCode::NonInvertible, "zero pivot");
    if (piv != c)
      for (std::size_t j = 0; j < d; ++j) {
        std::swap(a(c, j), a(piv, j));
        std::swap(inv(c, j), inv(piv, j));
      }
    const double p = a(c, c);
    for (std::size_t j = 0; j < d; ++j) {
      a(c, j) /= p;
      inv(c, j) /= p;
    }
    for (std::size_t r = 0; r < d; ++r) {
      if (r == c) continue;
      const double f = a(r, c);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < d; ++j) {
        a(r, j) -= f * a(c, j);
        inv(r, j) -= f * inv(c, j);
      }
    }
  }
  return inv;
}

bool is_unimodular(const SquareMatrix& g, double tol) {
  if (!g.all_finite()) return false;
  const double scale = std::pow(std::max(1.0, g.max_abs()), static_cast<double>(g.dim()));
  return std::abs(determinant(g) - 1.0) <= tol * scale;
}

SquareMatrix orthonormalize_columns(const SquareMatrix& q) {
  const std::size_t d = q.dim();
  SquareMatrix out(d);
  std::vector<Vector> cols;
  cols.reserve(d);
  for (std::size_t j = 0; j < d; ++j) {
    Vector v = q.column(j);
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& c : cols) {
        const double p = dot(c, v);
        for (std::size_t i = 0; i < d; ++i) v[i] -= p * c[i];
      }
    const double n = norm(v);
    if (!(n > 0.0)) fail(ErrorCode::NonInvertible, "rank-deficient frame");
    for (double& x : v) x /= n;
    cols.push_back(std::move(v));
  }
  for (std::size_t j = 0; j < d; ++j)
    for (std::size_t i = 0; i < d; ++i) out(i, j) = cols[j][i];
  return out;
}

double orthogonality_defect(const SquareMatrix& q) {
  const std::size_t d = q.dim();
  double worst = 0.0;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      double s = 0.0;
      for (std::size_t r = 0; r < d; ++r) s += q(r, i) * q(r, j);
      worst = std::max(worst, std::abs(s - (i == j ? 1.0 : 0.0)));
    }
  return worst;
}

// ---------------------------------------------------------------- SVD

GradedSvd graded_svd(const SquareMatrix& columns, std::span<const double> log_scales) {
  const std::size_t d = columns.dim();
  require_same_dim(d, log_scales.size());
  constexpr double kTol = 1e-14;
  constexpr int kMaxSweeps = 100;
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();

  std::vector<Vector> v(d, Vector(d));
  Vector logs(log_scales.begin(), log_scales.end());
  auto renormalize = [&](std::size_t j) {
    const double n = norm(v[j]);
    if (n == 0.0) {
      logs[j] = kNegInf;
      return;
    }
    logs[j] += std::log(n);
    for (double& x : v[j]) x /= n;
  };
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t i = 0; i < d; ++i) v[j][i] = columns(i, j);
    renormalize(j);
  }

  SquareMatrix right = SquareMatrix::identity(d);
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < d; ++p)
      for (std::size_t q = p + 1; q < d; ++q) {
        if (logs[p] == kNegInf || logs[q] == kNegInf) continue;
        const double g = dot(v[p], v[q]);
        const double a0 = dot(v[p], v[p]);
        const double b0 = dot(v[q], v[q]);
        if (std::abs(g) <= kTol * std::sqrt(a0 * b0)) continue;
        rotated = true;
        // P carries the larger scale; r = exp(L_Q - L_P) <= 1 may underflow to 0,
        // in which case the step degenerates to a Gram-Schmidt projection.
        const bool swap = logs[q] > logs[p];
        const std::size_t P = swap ? q : p;
        const std::size_t Q = swap ? p : q;
        const double a = swap ? b0 : a0;
        const double b = swap ? a0 : b0;
        const double r = std::exp(logs[Q] - logs[P]);
        const double zeta = (r * r * b - a) / (2.0 * g);
        const double t_over_r = 1.0 / (zeta + std::copysign(std::hypot(r, zeta), zeta));
        const double t = r * t_over_r;
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        const double s_over_r = c * t_over_r;
        for (std::size_t i = 0; i < d; ++i) {
          const double vp = v[P][i], vq = v[Q][i];
          v[P][i] = c * vp - s * r * vq;
          v[Q][i] = s_over_r * vp + c * vq;
        }
        for (std::size_t i = 0; i < d; ++i) {
          const double xp = right(i, P), xq = right(i, Q);
          right(i, P) = c * xp - s * xq;
          right(i, Q) = s * xp + c * xq;
        }
      }
    for (std::size_t j = 0; j < d; ++j) renormalize(j);
    if (!rotated) break;
  }

  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return logs[x] > logs[y]; });

  GradedSvd out{SquareMatrix(d), Vector(d), SquareMatrix(d)};
  std::vector<Vector> left_cols;
  for (std::size_t k = 0; k < d; ++k) {
    const std::size_t j = order[k];
    out.log_sigma[k] = logs[j];
    for (std::size_t i = 0; i < d; ++i) out.right(i, k) = right(i, j);
    if (logs[j] != kNegInf) {
      left_cols.push_back(v[j]);
    } else {
      // complete the left basis for a zero singular value
      for (std::size_t e = 0; e < d; ++e) {
        Vector w(d, 0.0);
        w[e] = 1.0;
        for (const auto& c : left_cols) {
          const double pr = dot(c, w);
          for (std::size_t i = 0; i < d; ++i) w[i] -= pr * c[i];
        }
        const double n = norm(w);
        if (n > 1e-8) {
          for (double& x : w) x /= n;
          left_cols.push_back(std::move(w));
          break;
        }
      }
    }
  }
  for (std::size_t k = 0; k < d; ++k)
    for (std::size_t i = 0; i < d; ++i) out.left(i, k) = left_cols[k][i];
  return out;
}

KAKDecomposition svd_kak(const SquareMatrix& g) {
  const std::size_t d = g.dim();
  if (d == 0) fail(ErrorCode::DimensionMismatch, "empty matrix");
  if (!g.all_finite()) fail(ErrorCode::NonFinite, "matrix has NaN or infinite entries");
  const double scale = g.max_abs();
  if (scale == 0.0) fail(ErrorCode::NonInvertible, "zero matrix");
  const Vector zeros(d, 0.0);
  const auto svd = graded_svd((1.0 / scale) * g, zeros);

  KAKDecomposition out{svd.left, Vector(d), svd.right.transposed()};
  for (std::size_t i = 0; i < d; ++i) out.a[i] = scale * std::exp(svd.log_sigma[i]);
  if (!(out.a[d - 1] >= 1e-13 * out.a[0]))
    fail(ErrorCode::NonInvertible, "smallest singular value below 1e-13 * largest");

  for (std::size_t j = 0; j < d; ++j) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < d; ++i)
      if (std::abs(out.k(i, j)) > std::abs(out.k(best, j))) best = i;
    if (out.k(best, j) < 0) {
      for (std::size_t i = 0; i < d; ++i) {
        out.k(i, j) = -out.k(i, j);
        out.u(j, i) = -out.u(j, i);
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------- wedges

std::size_t binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  std::size_t r = 1;
  for (std::size_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

std::vector<std::vector<std::size_t>> wedge_basis(std::size_t d, std::size_t i) {
  std::vector<std::vector<std::size_t>> out;
  if (i > d) return out;
  std::vector<std::size_t> idx(i);
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    out.push_back(idx);
    std::size_t pos = i;
    while (pos > 0 && idx[pos - 1] == d - i + pos - 1) --pos;
    if (pos == 0) break;
    ++idx[pos - 1];
    for (std::size_t j = pos; j < i; ++j) idx[j] = idx[j - 1] + 1;
  }
  return out;
}

SquareMatrix wedge_power(const SquareMatrix& g, std::size_t i) {
  const std::size_t d = g.dim();
  if (i < 1 || i > d)
    fail(ErrorCode::OutOfRange, "wedge degree " + std::to_string(i) + " outside [1," +
                                    std::to_string(d) + "]");
  const auto basis = wedge_basis(d, i);
  const std::size_t m = basis.size();
  SquareMatrix w(m);
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t c = 0; c < m; ++c) w(r, c) = minor_of(g, basis[r], basis[c]);
  return w;
}

Vector wedge_of_columns(const SquareMatrix& frame, std::size_t i) {
  const std::size_t d = frame.dim();
  if (i < 1 || i > d) fail(ErrorCode::OutOfRange, "wedge degree out of range");
  const auto basis = wedge_basis(d, i);
  std::vector<std::size_t> cols(i);
  std::iota(cols.begin(), cols.end(), 0);
  Vector out(basis.size());
  for (std::size_t r = 0; r < basis.size(); ++r) out[r] = minor_of(frame, basis[r], cols);
  return out;
}

Vector wedge2(std::span<const double> x, std::span<const double> y) {
  require_same_dim(x.size(), y.size());
  const std::size_t d = x.size();
  Vector out;
  out.reserve(binomial(d, 2));
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = a + 1; b < d; ++b) out.push_back(x[a] * y[b] - x[b] * y[a]);
  return out;
}

// ---------------------------------------------------------------- projective

ProjectivePoint::ProjectivePoint(std::span<const double> v) : rep_(v.begin(), v.end()) {
  if (rep_.empty()) fail(ErrorCode::InvalidArgument, "empty vector");
  const double n = norm(rep_);
  if (!std::isfinite(n)) fail(ErrorCode::NonFinite, "non-finite vector");
  if (n == 0.0) fail(ErrorCode::InvalidArgument, "zero vector has no projective class");
  for (double& x : rep_) x /= n;
  canonical_sign(rep_);
}

ProjectivePoint::ProjectivePoint(std::initializer_list<double> v)
    : ProjectivePoint(std::span<const double>(v.begin(), v.size())) {}

ProjectivePoint ProjectivePoint::basis(std::size_t dim, std::size_t i) {
  Vector e(dim, 0.0);
  e.at(i) = 1.0;
  return ProjectivePoint(e);
}

ProjectivePoint ProjectivePoint::at_angle(double theta) {
  const Vector v{std::cos(theta), std::sin(theta)};
  return ProjectivePoint(v);
}

ProjectiveHyperplane::ProjectiveHyperplane(std::span<const double> normal) : normal_(normal) {}

ProjectiveHyperplane::ProjectiveHyperplane(std::initializer_list<double> normal)
    : normal_(normal) {}

ProjectiveHyperplane ProjectiveHyperplane::coordinate_kernel(std::size_t dim, std::size_t i) {
  Vector e(dim, 0.0);
  e.at(i) = 1.0;
  return ProjectiveHyperplane(e);
}

FlagPoint::FlagPoint(SquareMatrix frame) : frame_(std::move(frame)) {
  if (!frame_.all_finite()) fail(ErrorCode::NonFinite, "non-finite frame");
  if (orthogonality_defect(frame_) > 1e-10)
    fail(ErrorCode::InvalidArgument, "flag frame is not orthogonal");
  for (std::size_t i = 1; i < frame_.dim(); ++i)
    lines_.emplace_back(wedge_of_columns(frame_, i));
}

FlagPoint FlagPoint::standard(std::size_t dim) { return FlagPoint(SquareMatrix::identity(dim)); }

const ProjectivePoint& FlagPoint::line(std::size_t i) const {
  if (i < 1 || i >= frame_.dim()) fail(ErrorCode::OutOfRange, "flag level out of range");
  return lines_[i - 1];
}

double fubini_study_unit(std::span<const double> x, std::span<const double> y) {
  const std::size_t m = x.size();
  double s = 0.0;
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = a + 1; b < m; ++b) {
      const double w = x[a] * y[b] - x[b] * y[a];
      s += w * w;
    }
  return std::min(1.0, std::sqrt(s));
}

double fubini_study(const ProjectivePoint& p, const ProjectivePoint& q) {
  require_same_dim(p.dim(), q.dim());
  return fubini_study_unit(p.rep(), q.rep());
}

double point_hyperplane_distance(const ProjectivePoint& p, const ProjectiveHyperplane& h) {
  require_same_dim(p.dim(), h.dim());
  return std::min(1.0, std::abs(dot(p.rep(), h.normal())));
}

ProjectivePoint act_projective(const SquareMatrix& g, const ProjectivePoint& p) {
  require_same_dim(g.dim(), p.dim());
  const Vector y = g * p.rep();
  if (!(norm(y) >= 1e-13 * frobenius_norm(g)))
    fail(ErrorCode::DegenerateImage, "image vector is numerically zero");
  return ProjectivePoint(y);
}

FlagPoint flag_of(const SquareMatrix& g) {
  const auto kak = svd_kak(g);
  for (std::size_t i = 0; i + 1 < kak.a.size(); ++i)
    if (!(kak.a[i] > (1.0 + 1e-10) * kak.a[i + 1]))
      fail(ErrorCode::DegenerateFlag,
           "singular values " + std::to_string(i) + " and " + std::to_string(i + 1) +
               " are not separated");
  return FlagPoint(kak.k);
}

double flag_distance(const FlagPoint& f1, const FlagPoint& f2) {
  require_same_dim(f1.dim(), f2.dim());
  double m = 0.0;
  for (std::size_t i = 1; i < f1.dim(); ++i) m = std::max(m, fubini_study(f1.line(i), f2.line(i)));
  return m;
}

double flag_distance_from_standard(const SquareMatrix& frame, std::size_t levels) {
  const std::size_t d = frame.dim();
  levels = std::min(levels, d - 1);
  double m = 0.0;
  for (std::size_t i = 1; i <= levels; ++i) {
    const Vector w = wedge_of_columns(frame, i);
    // w[0] is the leading block minor; the rest measure the deviation
    double s = 0.0;
    for (std::size_t r = 1; r < w.size(); ++r) s += w[r] * w[r];
    m = std::max(m, std::sqrt(s));
  }
  return std::min(1.0, m);
}

}  // namespace furstenberg
