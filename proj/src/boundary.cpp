#include "furstenberg/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "furstenberg/errors.hpp"
#include "furstenberg/parallel.hpp"
#include "furstenberg/rng.hpp"
#include "furstenberg/stats.hpp"
#include "furstenberg/walk.hpp"

namespace furstenberg {

namespace {

constexpr std::string_view kModule = "boundary";

constexpr std::uint64_t kRoleStationary = 0x21;
constexpr std::uint64_t kRoleDual = 0x22;
constexpr std::uint64_t kRoleConverge = 0x23;
constexpr std::uint64_t kRoleKak = 0x24;
constexpr std::uint64_t kRoleUDiverge = 0x25;
constexpr std::uint64_t kRoleJoint = 0x26;
constexpr std::uint64_t kRoleRightLimit = 0x27;
constexpr std::uint64_t kRoleLeftLimit = 0x28;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

[[noreturn]] void fail(ErrorCode code, const std::string& detail) {
  throw Error(kModule, code, detail);
}

void normalize_into(Vector& v, double& log_scale) {
  const double n = norm(v);
  if (!(n > 0.0) || !std::isfinite(n)) fail(ErrorCode::DegenerateImage, "vector collapsed to 0");
  log_scale += std::log(n);
  for (double& x : v) x /= n;
}

// Orthonormal frame whose first column is p (Gram-Schmidt against e_1..e_d).
SquareMatrix frame_starting_with(std::span<const double> p) {
  const std::size_t d = p.size();
  std::vector<Vector> cols{Vector(p.begin(), p.end())};
  for (std::size_t e = 0; e < d && cols.size() < d; ++e) {
    Vector w(d, 0.0);
    w[e] = 1.0;
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& c : cols) {
        const double pr = dot(c, w);
        for (std::size_t i = 0; i < d; ++i) w[i] -= pr * c[i];
      }
    const double n = norm(w);
    if (n > 1e-6) {
      for (double& x : w) x /= n;
      cols.push_back(std::move(w));
    }
  }
  SquareMatrix f(d);
  for (std::size_t j = 0; j < d; ++j)
    for (std::size_t i = 0; i < d; ++i) f(i, j) = cols[j][i];
  return f;
}

void require_dim2(const MeasureSpec& spec) {
  require_valid(spec);
  if (spec.dim() < 2) fail(ErrorCode::InvalidArgument, "boundary operations need d >= 2");
}

std::size_t max_of(std::span<const std::size_t> grid) { return grid.back(); }

SeriesResult finish_series(std::span<const std::size_t> grid, std::vector<Vector> values,
                           std::size_t levels, std::size_t skipped, std::uint64_t seed) {
  SeriesResult out;
  std::size_t total = 0;
  for (const auto& v : values) total += v.size();
  out.skipped = skipped;
  out.snapshots = total;
  out.levels = levels;
  if (static_cast<double>(skipped) > 0.1 * static_cast<double>(total))
    fail(ErrorCode::TooManyDegenerate, std::to_string(skipped) + " of " + std::to_string(total) +
                                           " snapshots had unseparated singular values");
  out.fit = fit_decay_replicated(grid, values, seed);
  out.values = std::move(values);
  return out;
}

// Wedge lines 1..levels of the columns of a frame.
std::vector<Vector> frame_lines(const SquareMatrix& frame, std::size_t levels) {
  std::vector<Vector> out;
  for (std::size_t i = 1; i <= levels; ++i) out.push_back(wedge_of_columns(frame, i));
  return out;
}

}  // namespace

std::size_t wedge_levels(Level level, std::size_t dim) {
  if (dim < 2) return 0;
  switch (level) {
    case Level::Flag: return dim - 1;
    case Level::Projective: return 1;
    case Level::Auto: return dim <= 4 ? dim - 1 : 1;
  }
  return 1;
}

const char* to_string(Level level) {
  switch (level) {
    case Level::Flag: return "flag";
    case Level::Projective: return "projective";
    case Level::Auto: return "auto";
  }
  return "auto";
}

// ---------------------------------------------------------------- samples

BoundarySample sample_stationary(const MeasureSpec& spec, std::size_t n, std::size_t count,
                                 std::uint64_t seed, const ProjectivePoint& start) {
  require_dim2(spec);
  const std::size_t d = spec.dim();
  if (start.dim() != d) fail(ErrorCode::DimensionMismatch, "start point dimension");
  if (n < 1 || count < 1) fail(ErrorCode::InvalidArgument, "need n >= 1 and count >= 1");
  const Sampler sampler(spec);
  std::vector<SquareMatrix> second;
  for (std::size_t i = 0; i < sampler.size(); ++i) second.push_back(wedge_power(sampler.atom(i), 2));

  // a second start, used only to estimate how far the sample is from the limit
  Vector qv(d);
  for (std::size_t i = 0; i < d; ++i) qv[i] = (i % 2 ? -1.0 : 1.0) * static_cast<double>(i + 1);
  ProjectivePoint q(qv);
  if (fubini_study(start, q) < 1e-3) q = ProjectivePoint::basis(d, d - 1);
  if (fubini_study(start, q) < 1e-3) q = ProjectivePoint::basis(d, 0);

  BoundarySample out;
  out.n = n;
  out.seed = seed;
  out.side = BoundarySide::RightLimit;
  std::vector<Vector> pts(count);
  Vector log_res(count);
  parallel_for(count, [&](std::size_t c) {
    RandomStream rng(seed, stream_id({kRoleStationary, c}));
    std::vector<std::size_t> draws(n);
    for (auto& i : draws) i = sampler.draw_index(rng);
    Vector p(start.rep().begin(), start.rep().end());
    Vector qq(q.rep().begin(), q.rep().end());
    Vector w = wedge2(p, qq);
    double lp = 0.0, lq = 0.0, lw = 0.0;
    normalize_into(w, lw);
    // x_n . p = g_1 (g_2 (... g_n p))
    for (std::size_t s = n; s-- > 0;) {
      const SquareMatrix& g = sampler.atom(draws[s]);
      p = g * p;
      const double np = norm(p);
      if (!(np >= 1e-13 * frobenius_norm(g)))
        fail(ErrorCode::DegenerateImage, "walk maps the start to 0");
      lp += std::log(np);
      for (double& x : p) x /= np;
      qq = g * qq;
      normalize_into(qq, lq);
      w = second[draws[s]] * w;
      normalize_into(w, lw);
    }
    pts[c] = std::move(p);
    log_res[c] = lw - lp - lq;
  });
  for (auto& p : pts) out.points.emplace_back(p);
  out.resolution = std::exp(mean_se(log_res).mean);
  if (out.resolution > 1e-6)
    out.warnings.push_back("estimated resolution " + std::to_string(out.resolution) +
                           " exceeds 1e-6; increase n");
  return out;
}

BoundarySample sample_dual(const MeasureSpec& spec, std::size_t n, std::size_t count,
                           std::uint64_t seed) {
  require_dim2(spec);
  if (n < 1 || count < 1) fail(ErrorCode::InvalidArgument, "need n >= 1 and count >= 1");
  const std::size_t d = spec.dim();
  const Sampler sampler(spec);
  std::vector<Vector> pts(count);
  Vector log_res(count);
  parallel_for(count, [&](std::size_t c) {
    RandomStream rng(seed, stream_id({kRoleDual, c}));
    KakTracker t(d);
    for (std::size_t s = 0; s < n; ++s) t.multiply_left(sampler.draw(rng));
    pts[c].assign(t.u().row(0).begin(), t.u().row(0).end());
    log_res[c] = t.log_a()[1] - t.log_a()[0];
  });
  BoundarySample out;
  out.n = n;
  out.seed = seed;
  out.side = BoundarySide::LeftDual;
  for (auto& p : pts) out.points.emplace_back(p);
  out.resolution = std::exp(mean_se(log_res).mean);
  if (out.resolution > 1e-6)
    out.warnings.push_back("estimated resolution " + std::to_string(out.resolution) +
                           " exceeds 1e-6; increase n");
  return out;
}

// ---------------------------------------------------------------- two starts

SeriesResult convergence_rate(const MeasureSpec& spec, std::span<const std::size_t> grid,
                              std::size_t replicas, std::uint64_t seed,
                              const std::pair<ProjectivePoint, ProjectivePoint>& starts,
                              Level level) {
  require_dim2(spec);
  check_grid(grid, kModule);
  const std::size_t d = spec.dim();
  if (starts.first.dim() != d || starts.second.dim() != d)
    fail(ErrorCode::DimensionMismatch, "start points dimension");
  if (!(fubini_study(starts.first, starts.second) > 1e-12))
    fail(ErrorCode::InvalidArgument, "the two starts must be distinct");
  if (replicas < 2) fail(ErrorCode::InvalidArgument, "need >= 2 replicas");
  const std::size_t levels = wedge_levels(level, d);
  const Sampler sampler(spec);

  // per atom and level: the i-th wedge power and the second wedge power of it
  std::vector<std::vector<SquareMatrix>> wi(sampler.size()), wii(sampler.size());
  for (std::size_t a = 0; a < sampler.size(); ++a)
    for (std::size_t i = 1; i <= levels; ++i) {
      wi[a].push_back(wedge_power(sampler.atom(a), i));
      wii[a].push_back(wedge_power(wi[a].back(), 2));
    }
  const auto lines_p = frame_lines(frame_starting_with(starts.first.rep()), levels);
  const auto lines_q = frame_lines(frame_starting_with(starts.second.rep()), levels);

  std::vector<Vector> values(grid.size(), Vector(replicas));
  parallel_for(replicas, [&](std::size_t r) {
    RandomStream rng(seed, stream_id({kRoleConverge, r}));
    // The left walk y_n = g_n...g_1 is used: for each n, (y_n p, y_n q) has the
    // same law as (x_n p, x_n q), and it can be advanced one step at a time.
    std::vector<Vector> P = lines_p, Q = lines_q, W(levels);
    Vector lp(levels, 0.0), lq(levels, 0.0), lw(levels, 0.0);
    std::vector<bool> active(levels);
    for (std::size_t i = 0; i < levels; ++i) {
      W[i] = wedge2(P[i], Q[i]);
      // levels where the two start flags agree stay at distance 0
      active[i] = norm(W[i]) > 0.0;
      if (active[i]) normalize_into(W[i], lw[i]);
    }
    std::size_t k = 0;
    for (std::size_t s = 1; k < grid.size(); ++s) {
      const std::size_t a = sampler.draw_index(rng);
      for (std::size_t i = 0; i < levels; ++i) {
        if (!active[i]) continue;
        P[i] = wi[a][i] * P[i];
        normalize_into(P[i], lp[i]);
        Q[i] = wi[a][i] * Q[i];
        normalize_into(Q[i], lq[i]);
        W[i] = wii[a][i] * W[i];
        normalize_into(W[i], lw[i]);
      }
      if (s == grid[k]) {
        double delta = 0.0;
        for (std::size_t i = 0; i < levels; ++i)
          if (active[i]) delta = std::max(delta, std::exp(lw[i] - lp[i] - lq[i]));
        values[k][r] = std::min(delta, 1.0);
        ++k;
      }
    }
  });
  return finish_series(grid, std::move(values), levels, 0, seed);
}

// ---------------------------------------------------------------- KAK components

SeriesResult kak_convergence(const MeasureSpec& spec, std::span<const std::size_t> grid,
                             std::size_t replicas, std::uint64_t seed, KakSide side, Level level) {
  require_dim2(spec);
  check_grid(grid, kModule);
  if (replicas < 2) fail(ErrorCode::InvalidArgument, "need >= 2 replicas");
  const std::size_t d = spec.dim();
  const std::size_t levels = wedge_levels(level, d);
  const Sampler sampler(spec);
  std::vector<Vector> values(grid.size(), Vector(replicas));
  std::vector<std::size_t> skipped(replicas, 0);
  parallel_for(replicas, [&](std::size_t r) {
    RandomStream rng(seed, stream_id({kRoleKak, r}));
    KakTracker t(d);
    std::size_t k = 0;
    for (std::size_t s = 0; k < grid.size(); ++s) {
      // step s -> s + 1
      const bool before = t.separated(levels);
      const SquareMatrix& g = sampler.draw(rng);
      const SquareMatrix move = side == KakSide::RightK ? t.multiply_right(g) : t.multiply_left(g);
      if (s == grid[k]) {
        if (before && t.separated(levels)) {
          values[k][r] = flag_distance_from_standard(move, levels);
        } else {
          values[k][r] = kNaN;
          ++skipped[r];
        }
        ++k;
      }
    }
  });
  std::size_t total_skipped = 0;
  for (auto s : skipped) total_skipped += s;
  return finish_series(grid, std::move(values), levels, total_skipped, seed);
}

UNonconvergence u_nonconvergence(const MeasureSpec& spec, std::span<const std::size_t> grid,
                                 std::size_t replicas, std::uint64_t seed, Level level,
                                 double floor) {
  require_dim2(spec);
  check_grid(grid, kModule);
  if (replicas < 2) fail(ErrorCode::InvalidArgument, "need >= 2 replicas");
  const std::size_t d = spec.dim();
  const std::size_t levels = wedge_levels(level, d);
  const Sampler sampler(spec);
  std::vector<Vector> values(grid.size(), Vector(replicas));
  std::vector<std::size_t> skipped(replicas, 0);
  parallel_for(replicas, [&](std::size_t r) {
    RandomStream rng(seed, stream_id({kRoleUDiverge, r}));
    KakTracker t(d);
    std::size_t k = 0;
    for (std::size_t s = 0; k < grid.size(); ++s) {
      const bool before = t.separated(levels);
      const SquareMatrix u_old = t.u();
      t.multiply_right(sampler.draw(rng));
      if (s == grid[k]) {
        if (before && t.separated(levels)) {
          // dual flags are the row frames u^T; their relative frame is u_old u_new^T
          values[k][r] = flag_distance_from_standard(u_old * t.u().transposed(), levels);
        } else {
          values[k][r] = kNaN;
          ++skipped[r];
        }
        ++k;
      }
    }
  });
  std::size_t total_skipped = 0;
  for (auto s : skipped) total_skipped += s;
  UNonconvergence out;
  out.floor = floor;
  out.series = finish_series(grid, std::move(values), levels, total_skipped, seed);
  const std::size_t m = grid.size();
  const std::size_t first = m - (m + 2) / 3;
  Vector per_replica;
  for (std::size_t r = 0; r < replicas; ++r) {
    double s = 0.0;
    std::size_t c = 0;
    for (std::size_t k = first; k < m; ++k)
      if (std::isfinite(out.series.values[k][r])) {
        s += out.series.values[k][r];
        ++c;
      }
    if (c) per_replica.push_back(s / static_cast<double>(c));
  }
  const auto ms = mean_se(per_replica);
  out.window_mean = ms.mean;
  out.window_se = ms.se;
  out.floor_exceeded = out.window_mean > floor;
  const auto& fit = out.series.fit;
  out.no_decay = !fit.exact_zero && fit.slope_ci_high >= 0.0;
  return out;
}

// ---------------------------------------------------------------- independence

std::vector<TestFunction> builtin_test_functions() {
  return {TestFunction::DistanceToKernel,     TestFunction::DistanceToReference,
          TestFunction::ReferenceToKernel,    TestFunction::KernelTimesReference,
          TestFunction::KernelTimesReferenceKernel, TestFunction::ReferenceTimesReferenceKernel};
}

const char* test_function_id(TestFunction f) {
  switch (f) {
    case TestFunction::Constant: return "const";
    case TestFunction::DistanceToKernel: return "phi1";
    case TestFunction::DistanceToReference: return "phi2";
    case TestFunction::ReferenceToKernel: return "phi3";
    case TestFunction::KernelTimesReference: return "phi1*phi2";
    case TestFunction::KernelTimesReferenceKernel: return "phi1*phi3";
    case TestFunction::ReferenceTimesReferenceKernel: return "phi2*phi3";
  }
  return "?";
}

double lipschitz_constant(TestFunction f) {
  switch (f) {
    case TestFunction::Constant: return 0.0;
    case TestFunction::DistanceToKernel:
    case TestFunction::DistanceToReference:
    case TestFunction::ReferenceToKernel: return 1.0;
    default: return 2.0;  // product of two 1-Lipschitz functions bounded by 1
  }
}

namespace {

SquareMatrix reference_frame(std::size_t d, double angle) {
  if (d == 2) return SquareMatrix::rotation(angle);
  SquareMatrix m(d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      m(i, j) = std::cos(angle * static_cast<double>((i + 1) * (j + 2)) + 0.1 * static_cast<double>(j));
  return orthonormalize_columns(m);
}

struct FlagLines {
  std::vector<Vector> lines;  // levels 1..L
};

FlagLines lines_of(const SquareMatrix& frame, std::size_t levels) {
  return {frame_lines(frame, levels)};
}

// delta between flags x and p (max over levels)
double flag_delta(const FlagLines& x, const FlagLines& p) {
  double m = 0.0;
  for (std::size_t i = 0; i < x.lines.size(); ++i)
    m = std::max(m, fubini_study_unit(x.lines[i], p.lines[i]));
  return m;
}

// delta(x, ker y): distance to the set of flags meeting ker y at some level
double kernel_delta(const FlagLines& x, const FlagLines& y) {
  double m = 1.0;
  for (std::size_t i = 0; i < x.lines.size(); ++i)
    m = std::min(m, std::abs(dot(x.lines[i], y.lines[i])));
  return m;
}

double evaluate(TestFunction f, const FlagLines& x, const FlagLines& y, const FlagLines& p0,
                const FlagLines& q0) {
  switch (f) {
    case TestFunction::Constant: return 1.0;
    case TestFunction::DistanceToKernel: return kernel_delta(x, y);
    case TestFunction::DistanceToReference: return flag_delta(x, p0);
    case TestFunction::ReferenceToKernel: return kernel_delta(q0, y);
    case TestFunction::KernelTimesReference: return kernel_delta(x, y) * flag_delta(x, p0);
    case TestFunction::KernelTimesReferenceKernel: return kernel_delta(x, y) * kernel_delta(q0, y);
    case TestFunction::ReferenceTimesReferenceKernel:
      return flag_delta(x, p0) * kernel_delta(q0, y);
  }
  return 0.0;
}

}  // namespace

FlagPoint reference_flag_p0(std::size_t dim) { return FlagPoint(reference_frame(dim, 0.3)); }
FlagPoint reference_flag_q0(std::size_t dim) { return FlagPoint(reference_frame(dim, 1.1)); }

IndependenceResult independence_gap(const MeasureSpec& spec, std::span<const std::size_t> grid,
                                    std::size_t samples, std::uint64_t seed,
                                    std::span<const TestFunction> functions, Level level) {
  require_dim2(spec);
  check_grid(grid, kModule);
  if (samples < 500) fail(ErrorCode::InvalidArgument, "need >= 500 samples per n");
  if (functions.empty()) fail(ErrorCode::InvalidArgument, "no test functions");
  const std::size_t d = spec.dim();
  const std::size_t levels = wedge_levels(level, d);
  const std::size_t n_star = 4 * max_of(grid);
  const std::size_t nf = functions.size();
  const Sampler sampler(spec);
  const FlagLines p0 = lines_of(reference_flag_p0(d).frame(), levels);
  const FlagLines q0 = lines_of(reference_flag_q0(d).frame(), levels);

  IndependenceResult out;
  out.grid.assign(grid.begin(), grid.end());
  out.functions.assign(functions.begin(), functions.end());
  out.samples = samples;
  out.n_star = n_star;
  out.levels = levels;

  std::size_t total_skipped = 0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const std::size_t n = grid[k];
    const std::size_t half = n / 2;
    // diff[s * nf + f], joint[s * nf + f]; NaN marks a skipped sample
    Vector diff(samples * nf, kNaN), joint(samples * nf, kNaN);
    parallel_for(samples, [&](std::size_t s) {
      RandomStream rng(seed, stream_id({kRoleJoint, k, s}));
      std::vector<std::size_t> draws(n);
      KakTracker x(d);
      for (auto& a : draws) {
        a = sampler.draw_index(rng);
        x.multiply_right(sampler.atom(a));
      }
      if (!x.separated(levels)) return;
      // Z1: right walk continuing g_1..g_half with fresh increments
      RandomStream rng1(seed, stream_id({kRoleRightLimit, k, s}));
      KakTracker z1(d);
      for (std::size_t i = 0; i < half; ++i) z1.multiply_right(sampler.atom(draws[i]));
      for (std::size_t i = half; i < n_star; ++i) z1.multiply_right(sampler.draw(rng1));
      // Z2: left walk whose first increments are g_n, g_{n-1}, ..., g_{half+1}
      RandomStream rng2(seed, stream_id({kRoleLeftLimit, k, s}));
      KakTracker z2(d);
      for (std::size_t i = n; i-- > half;) z2.multiply_left(sampler.atom(draws[i]));
      for (std::size_t i = n - half; i < n_star; ++i) z2.multiply_left(sampler.draw(rng2));

      const FlagLines vx = lines_of(x.k(), levels);
      const FlagLines ux = lines_of(x.u().transposed(), levels);
      const FlagLines v1 = lines_of(z1.k(), levels);
      const FlagLines u2 = lines_of(z2.u().transposed(), levels);
      for (std::size_t f = 0; f < nf; ++f) {
        const double a = evaluate(functions[f], vx, ux, p0, q0);
        const double b = evaluate(functions[f], v1, u2, p0, q0);
        joint[s * nf + f] = a;
        diff[s * nf + f] = a - b;
      }
    });
    Vector disc(nf), disc_se(nf), jm(nf), pm(nf);
    std::size_t skipped = 0;
    for (std::size_t s = 0; s < samples; ++s)
      if (!std::isfinite(diff[s * nf])) ++skipped;
    for (std::size_t f = 0; f < nf; ++f) {
      Vector dv, jv;
      for (std::size_t s = 0; s < samples; ++s)
        if (std::isfinite(diff[s * nf + f])) {
          dv.push_back(diff[s * nf + f]);
          jv.push_back(joint[s * nf + f]);
        }
      const auto dm = mean_se(dv);
      const auto jmean = mean_se(jv);
      disc[f] = std::abs(dm.mean);
      disc_se[f] = dm.se;
      jm[f] = jmean.mean;
      pm[f] = jmean.mean - dm.mean;
    }
    total_skipped += skipped;
    out.discrepancy.push_back(disc);
    out.discrepancy_se.push_back(disc_se);
    out.joint_mean.push_back(jm);
    out.product_mean.push_back(pm);
    double mx = 0.0;
    for (std::size_t f = 0; f < nf; ++f)
      if (functions[f] != TestFunction::Constant) mx = std::max(mx, disc[f]);
    out.max_discrepancy.push_back(mx);
  }
  out.skipped = total_skipped;
  if (static_cast<double>(total_skipped) > 0.1 * static_cast<double>(samples * grid.size()))
    fail(ErrorCode::TooManyDegenerate, std::to_string(total_skipped) + " joint samples skipped");
  out.fit = fit_decay(grid, out.max_discrepancy);
  return out;
}

}  // namespace furstenberg
