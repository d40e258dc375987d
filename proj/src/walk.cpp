#include "furstenberg/walk.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "furstenberg/errors.hpp"
#include "furstenberg/parallel.hpp"
#include "furstenberg/stats.hpp"

namespace furstenberg {

namespace {

constexpr std::string_view kModule = "walk";

// stream roles
constexpr std::uint64_t kRoleRunWalk = 0x11;
constexpr std::uint64_t kRoleLyapunov = 0x12;
constexpr std::uint64_t kRoleDrift = 0x13;
constexpr std::uint64_t kRoleNet = 0x14;
constexpr std::uint64_t kRoleRatio = 0x15;

[[noreturn]] void fail(ErrorCode code, const std::string& detail) {
  throw Error(kModule, code, detail);
}

// Gram-Schmidt QR of m; overwrites q with the orthogonal factor and adds
// log R_ii to log_diag.
void qr_accumulate(const SquareMatrix& m, SquareMatrix& q, Vector& log_diag) {
  const std::size_t d = m.dim();
  std::vector<Vector> cols;
  cols.reserve(d);
  for (std::size_t j = 0; j < d; ++j) {
    Vector v = m.column(j);
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& c : cols) {
        const double p = dot(c, v);
        for (std::size_t i = 0; i < d; ++i) v[i] -= p * c[i];
      }
    const double r = norm(v);
    if (!(r > 0.0)) fail(ErrorCode::NonInvertible, "rank loss in QR step");
    log_diag[j] += std::log(r);
    for (double& x : v) x /= r;
    cols.push_back(std::move(v));
  }
  for (std::size_t j = 0; j < d; ++j)
    for (std::size_t i = 0; i < d; ++i) q(i, j) = cols[j][i];
}

void check_walk_args(const MeasureSpec& spec) { require_valid(spec); }

}  // namespace

// ---------------------------------------------------------------- Walk

Walk::Walk(const Sampler& sampler, Side side, WalkMode mode, std::uint64_t seed,
           std::uint64_t stream)
    : sampler_(&sampler), rng_(seed, stream) {
  const std::size_t d = sampler.dim();
  state_.mode = mode;
  state_.side = side;
  state_.stream = stream;
  if (mode == WalkMode::Direct) {
    state_.product = SquareMatrix::identity(d);
    state_.max_entry = 1.0;
  } else {
    state_.frame = SquareMatrix::identity(d);
    state_.log_diag.assign(d, 0.0);
  }
}

const SquareMatrix& Walk::step() {
  const SquareMatrix& g = sampler_->draw(rng_);
  multiply(g);
  return g;
}

void Walk::multiply(const SquareMatrix& g) {
  if (state_.mode == WalkMode::Direct) {
    SquareMatrix next = state_.side == Side::Right ? state_.product * g : g * state_.product;
    const double m = next.max_abs();
    if (!(m <= kOverflowThreshold))
      fail(ErrorCode::Overflow, "product entry exceeds 1e250 at step " +
                                    std::to_string(state_.step + 1) +
                                    "; use renormalized mode or a smaller n");
    state_.product = std::move(next);
    state_.max_entry = m;
  } else {
    const SquareMatrix m =
        state_.side == Side::Left ? g * state_.frame : g.transposed() * state_.frame;
    qr_accumulate(m, state_.frame, state_.log_diag);
  }
  ++state_.step;
}

std::vector<WalkState> run_walk(const MeasureSpec& spec, std::size_t n, std::uint64_t seed,
                                Side side, std::span<const std::size_t> checkpoints,
                                WalkMode mode) {
  check_walk_args(spec);
  if (n < 1) fail(ErrorCode::InvalidArgument, "n must be >= 1");
  std::vector<std::size_t> marks(checkpoints.begin(), checkpoints.end());
  if (marks.empty()) marks.push_back(n);
  for (std::size_t k = 0; k < marks.size(); ++k)
    if (marks[k] > n || (k > 0 && marks[k] <= marks[k - 1]))
      fail(ErrorCode::InvalidArgument, "checkpoints must be increasing and <= n");
  const Sampler sampler(spec);
  Walk walk(sampler, side, mode, seed, stream_id({kRoleRunWalk, 0}));
  std::vector<WalkState> out;
  std::size_t next = 0;
  for (std::size_t s = 1; s <= n && next < marks.size(); ++s) {
    walk.step();
    if (s == marks[next]) {
      out.push_back(walk.state());
      ++next;
    }
  }
  return out;
}

// ---------------------------------------------------------------- KakTracker

KakTracker::KakTracker(std::size_t dim)
    : k_(SquareMatrix::identity(dim)), u_(SquareMatrix::identity(dim)), log_a_(dim, 0.0) {}

SquareMatrix KakTracker::multiply_right(const SquareMatrix& g) {
  // x g = k diag(a) (u g); take the SVD of (diag(a) u g)^T = (u g)^T diag(a),
  // whose columns are the rows of u g scaled by a_j.
  const SquareMatrix w = u_ * g;
  const auto svd = graded_svd(w.transposed(), log_a_);
  k_ = orthonormalize_columns(k_ * svd.right);
  u_ = orthonormalize_columns(svd.left).transposed();
  log_a_ = svd.log_sigma;
  ++steps_;
  return svd.right;
}

SquareMatrix KakTracker::multiply_left(const SquareMatrix& g) {
  // g x = (g k) diag(a) u
  const auto svd = graded_svd(g * k_, log_a_);
  k_ = orthonormalize_columns(svd.left);
  u_ = orthonormalize_columns((svd.right.transposed() * u_).transposed()).transposed();
  log_a_ = svd.log_sigma;
  ++steps_;
  return svd.right;
}

bool KakTracker::separated(std::size_t levels) const {
  const double min_gap = std::log1p(1e-10);
  for (std::size_t i = 0; i < levels && i + 1 < log_a_.size(); ++i)
    if (!(log_a_[i] - log_a_[i + 1] > min_gap)) return false;
  return true;
}

// ---------------------------------------------------------------- Lyapunov

LyapunovEstimate lyapunov_spectrum(const MeasureSpec& spec, std::size_t n, std::size_t replicas,
                                   std::uint64_t seed) {
  check_walk_args(spec);
  if (n < 100) fail(ErrorCode::InvalidArgument, "lyapunov_spectrum needs n >= 100");
  if (replicas < 8) fail(ErrorCode::InvalidArgument, "lyapunov_spectrum needs >= 8 replicas");
  const Sampler sampler(spec);
  const std::size_t d = spec.dim();

  LyapunovEstimate est;
  est.n = n;
  est.replicas = replicas;
  est.per_replica.assign(replicas, Vector(d));
  parallel_for(replicas, [&](std::size_t r) {
    Walk w(sampler, Side::Left, WalkMode::Renormalized, seed, stream_id({kRoleLyapunov, r}));
    for (std::size_t s = 0; s < n; ++s) w.step();
    for (std::size_t i = 0; i < d; ++i)
      est.per_replica[r][i] = w.state().log_diag[i] / static_cast<double>(n);
  });
  est.mean.assign(d, 0.0);
  est.se.assign(d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    Vector xs(replicas);
    for (std::size_t r = 0; r < replicas; ++r) xs[r] = est.per_replica[r][i];
    const auto ms = mean_se(xs);
    est.mean[i] = ms.mean;
    est.se[i] = ms.se;
  }

  est.ordering_ok = true;
  for (std::size_t i = 0; i + 1 < d; ++i)
    if (est.mean[i] + 2.0 * std::hypot(est.se[i], est.se[i + 1]) + 1e-12 < est.mean[i + 1])
      est.ordering_ok = false;
  {
    Vector sums(replicas, 0.0);
    for (std::size_t r = 0; r < replicas; ++r)
      for (std::size_t i = 0; i < d; ++i) sums[r] += est.per_replica[r][i];
    const auto ms = mean_se(sums);
    est.sum_ok = std::abs(ms.mean) <= 3.0 * ms.se + 1e-12;
  }

  // Cross-check with direct products on a prefix short enough to stay below
  // the overflow guard: log ||x_m|| ~ m lambda_1 is kept near half of log(1e250).
  const double top = std::max(est.mean[0], 0.0);
  std::size_t m = n;
  if (top > 0.0)
    m = std::min<std::size_t>(n, static_cast<std::size_t>(0.5 * std::log(kOverflowThreshold) / top));
  const std::size_t levels = std::min<std::size_t>(2, d);
  if (m < 50) {
    est.warnings.push_back("wedge cross-check skipped: prefix before overflow guard is only " +
                           std::to_string(m) + " steps");
    est.check_n = 0;
    est.estimators_agree = false;
    return est;
  }
  est.check_n = m;
  std::vector<Vector> wedge(replicas, Vector(levels));
  parallel_for(replicas, [&](std::size_t r) {
    Walk w(sampler, Side::Left, WalkMode::Direct, seed, stream_id({kRoleLyapunov, r}));
    for (std::size_t s = 0; s < m; ++s) w.step();
    const SquareMatrix& p = w.state().product;
    for (std::size_t i = 1; i <= levels; ++i)
      wedge[r][i - 1] = std::log(operator_norm(wedge_power(p, i))) / static_cast<double>(m);
  });
  est.wedge_mean.assign(levels, 0.0);
  est.wedge_se.assign(levels, 0.0);
  est.estimators_agree = true;
  for (std::size_t i = 0; i < levels; ++i) {
    Vector xs(replicas), qr(replicas);
    for (std::size_t r = 0; r < replicas; ++r) {
      xs[r] = wedge[r][i];
      qr[r] = 0.0;
      for (std::size_t j = 0; j <= i; ++j) qr[r] += est.per_replica[r][j];
    }
    const auto ws = mean_se(xs);
    const auto qs = mean_se(qr);
    est.wedge_mean[i] = ws.mean;
    est.wedge_se[i] = ws.se;
    if (std::abs(ws.mean - qs.mean) > 3.0 * std::hypot(ws.se, qs.se) + 1e-12)
      est.estimators_agree = false;
  }
  return est;
}

GapEstimate top_gap(const MeasureSpec& spec, std::size_t n, std::size_t replicas,
                    std::uint64_t seed) {
  GapEstimate g;
  g.lyapunov = lyapunov_spectrum(spec, n, replicas, seed);
  if (spec.dim() < 2) fail(ErrorCode::InvalidArgument, "gap needs d >= 2");
  Vector gaps(replicas);
  for (std::size_t r = 0; r < replicas; ++r)
    gaps[r] = g.lyapunov.per_replica[r][0] - g.lyapunov.per_replica[r][1];
  const auto ms = mean_se(gaps);
  g.gap = ms.mean;
  g.se = ms.se;
  const double t = student_t_quantile(0.5 + g.confidence / 2.0, static_cast<double>(replicas - 1));
  g.ci_low = ms.mean - t * ms.se;
  g.ci_high = ms.mean + t * ms.se;
  g.gap_positive = g.ci_low > 1e-9;
  return g;
}

// ---------------------------------------------------------------- cocycles

double cocycle_norm(const SquareMatrix& g, const ProjectivePoint& p) {
  if (g.dim() != p.dim()) fail(ErrorCode::DimensionMismatch, "cocycle_norm");
  const double n = norm(g * p.rep());
  if (!(n >= 1e-13 * frobenius_norm(g))) fail(ErrorCode::DegenerateImage, "g p is numerically 0");
  return std::log(n);
}

double cocycle_two_point(const SquareMatrix& g, const ProjectivePoint& p,
                         const ProjectivePoint& q) {
  if (g.dim() != p.dim() || g.dim() != q.dim())
    fail(ErrorCode::DimensionMismatch, "cocycle_two_point");
  const Vector pq = wedge2(p.rep(), q.rep());
  const double base = norm(pq);
  if (!(base > 0.0)) fail(ErrorCode::DegenerateImage, "p and q are the same line");
  const double gp = norm(g * p.rep());
  const double gq = norm(g * q.rep());
  const double scale = 1e-13 * frobenius_norm(g);
  if (!(gp >= scale) || !(gq >= scale)) fail(ErrorCode::DegenerateImage, "image is numerically 0");
  const double wedge = norm(wedge_power(g, 2) * std::span<const double>(pq));
  return std::log(wedge) - std::log(base) - std::log(gp) - std::log(gq);
}

std::vector<ProjectivePoint> drift_net(std::size_t dim, std::uint64_t seed) {
  std::vector<ProjectivePoint> net;
  const std::size_t deterministic = 2 * dim * dim;
  for (std::size_t i = 0; i < dim && net.size() < deterministic; ++i)
    net.push_back(ProjectivePoint::basis(dim, i));
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = i + 1; j < dim; ++j)
      for (double sgn : {1.0, -1.0}) {
        Vector v(dim, 0.0);
        v[i] = 1.0;
        v[j] = sgn;
        net.emplace_back(v);
      }
  // fill with a Halton-type sequence of directions
  static constexpr double kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};
  for (std::size_t k = 1; net.size() < deterministic; ++k) {
    Vector v(dim);
    for (std::size_t j = 0; j < dim; ++j) {
      double f = 1.0, x = 0.0;
      for (std::size_t t = k; t > 0; t /= static_cast<std::size_t>(kPrimes[j % 16])) {
        f /= kPrimes[j % 16];
        x += f * static_cast<double>(t % static_cast<std::size_t>(kPrimes[j % 16]));
      }
      v[j] = std::cos(std::numbers::pi * x);
    }
    if (norm(v) > 1e-6) net.emplace_back(v);
  }
  RandomStream rng(seed, stream_id({kRoleNet, dim}));
  for (int i = 0; i < 50; ++i) net.emplace_back(random_unit_vector(rng, dim));
  return net;
}

CocycleDrift cocycle_drift(const MeasureSpec& spec, std::size_t n, std::size_t replicas,
                           std::uint64_t seed, CocycleFamily family) {
  check_walk_args(spec);
  if (n < 1 || replicas < 2) fail(ErrorCode::InvalidArgument, "need n >= 1 and replicas >= 2");
  const std::size_t d = spec.dim();
  const Sampler sampler(spec);
  const auto net = drift_net(d, seed);
  const std::size_t m = net.size();
  std::vector<SquareMatrix> second_wedges;
  if (family == CocycleFamily::TwoPoint) {
    if (d < 2) fail(ErrorCode::InvalidArgument, "two-point cocycle needs d >= 2");
    for (std::size_t i = 0; i < sampler.size(); ++i)
      second_wedges.push_back(wedge_power(sampler.atom(i), 2));
  }
  std::vector<Vector> values(m, Vector(replicas));  // values[x][r] = s(x_n, x) / n
  parallel_for(replicas, [&](std::size_t r) {
    RandomStream rng(seed, stream_id({kRoleDrift, r}));
    std::vector<std::size_t> draws(n);
    for (auto& i : draws) i = sampler.draw_index(rng);
    for (std::size_t x = 0; x < m; ++x) {
      // x_n . v = g_1 (g_2 (... (g_n v)))
      Vector p(net[x].rep().begin(), net[x].rep().end());
      double logp = 0.0;
      if (family == CocycleFamily::Norm) {
        for (std::size_t s = n; s-- > 0;) {
          p = sampler.atom(draws[s]) * p;
          const double nn = norm(p);
          logp += std::log(nn);
          for (double& c : p) c /= nn;
        }
        values[x][r] = logp / static_cast<double>(n);
      } else {
        const auto& qv = net[(x + 1) % m].rep();
        Vector q(qv.begin(), qv.end());
        // p ^ q is pushed through the second wedge power on its own, so the
        // contraction is measured without cancellation
        Vector w = wedge2(p, q);
        double logq = 0.0;
        double logw = std::log(norm(w));
        const double base = logw;
        for (double& c : w) c /= std::exp(base);
        for (std::size_t s = n; s-- > 0;) {
          const SquareMatrix& g = sampler.atom(draws[s]);
          p = g * p;
          q = g * q;
          w = second_wedges[draws[s]] * w;
          const double np = norm(p), nq = norm(q), nw = norm(w);
          logp += std::log(np);
          logq += std::log(nq);
          logw += std::log(nw);
          for (double& c : p) c /= np;
          for (double& c : q) c /= nq;
          for (double& c : w) c /= nw;
        }
        values[x][r] = (logw - logp - logq - base) / static_cast<double>(n);
      }
    }
  });
  CocycleDrift out;
  out.family = family;
  out.n = n;
  out.replicas = replicas;
  out.net_size = m;
  out.estimate = -std::numeric_limits<double>::infinity();
  for (std::size_t x = 0; x < m; ++x) {
    const auto ms = mean_se(values[x]);
    if (ms.mean > out.estimate) {
      out.estimate = ms.mean;
      out.se = ms.se;
      out.argmax = x;
    }
  }
  return out;
}

// ---------------------------------------------------------------- ratios

SingularRatioSeries singular_ratio_series(const MeasureSpec& spec, std::span<const std::size_t> grid,
                                          std::size_t replicas, std::uint64_t seed) {
  check_walk_args(spec);
  check_grid(grid, kModule);
  if (replicas < 2) fail(ErrorCode::InvalidArgument, "need >= 2 replicas");
  const std::size_t d = spec.dim();
  if (d < 2) fail(ErrorCode::InvalidArgument, "singular ratios need d >= 2");
  const Sampler sampler(spec);
  SingularRatioSeries out;
  out.grid.assign(grid.begin(), grid.end());
  out.values.assign(d - 1, std::vector<Vector>(grid.size(), Vector(replicas)));
  parallel_for(replicas, [&](std::size_t r) {
    RandomStream rng(seed, stream_id({kRoleRatio, r}));
    KakTracker t(d);
    std::size_t k = 0;
    for (std::size_t s = 1; k < grid.size(); ++s) {
      t.multiply_right(sampler.draw(rng));
      if (s == grid[k]) {
        for (std::size_t j = 1; j < d; ++j)
          out.values[j - 1][k][r] = std::exp(t.log_a()[j] - t.log_a()[0]);
        ++k;
      }
    }
  });
  for (std::size_t j = 1; j < d; ++j)
    out.fits.push_back(fit_decay_replicated(grid, out.values[j - 1], seed));
  return out;
}

std::vector<std::size_t> geometric_grid(double c, double ratio, std::size_t count) {
  if (!(c > 0.0) || !(ratio > 1.0)) fail(ErrorCode::InvalidArgument, "bad geometric grid");
  std::vector<std::size_t> out;
  double v = c;
  while (out.size() < count) {
    const auto n = static_cast<std::size_t>(std::ceil(v - 1e-9));
    if (out.empty() || n > out.back()) out.push_back(n);
    v *= ratio;
  }
  return out;
}

}  // namespace furstenberg
