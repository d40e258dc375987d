#include "furstenberg/decay_fit.hpp"

#include <cmath>
#include <limits>

#include "furstenberg/errors.hpp"
#include "furstenberg/rng.hpp"
#include "furstenberg/stats.hpp"

namespace furstenberg {

namespace {

constexpr std::string_view kModule = "boundary";

struct LogSeries {
  Vector x, y;
};

LogSeries positive_log_points(std::span<const std::size_t> grid, std::span<const double> values) {
  LogSeries s;
  for (std::size_t k = 0; k < grid.size(); ++k)
    if (values[k] > 0.0) {
      s.x.push_back(static_cast<double>(grid[k]));
      s.y.push_back(std::log(values[k]));
    }
  return s;
}

// Returns false when every value is zero.
bool fill_fit(DecayFit& f) {
  const auto pts = positive_log_points(f.grid, f.values);
  f.points_used = pts.x.size();
  if (pts.x.empty()) {
    f.exact_zero = true;
    f.slope = -std::numeric_limits<double>::infinity();
    f.intercept = -std::numeric_limits<double>::infinity();
    f.r2 = 0.0;
    f.rho_hat = 0.0;
    return false;
  }
  if (pts.x.size() < 2)
    throw Error(kModule, ErrorCode::FitIllConditioned, "fewer than 2 positive values to fit");
  const auto lf = least_squares(pts.x, pts.y);
  f.slope = lf.slope;
  f.intercept = lf.intercept;
  f.r2 = lf.r2;
  f.rho_hat = std::exp(lf.slope);
  f.slope_se = lf.slope_se;
  return true;
}

}  // namespace

void check_grid(std::span<const std::size_t> grid, std::string_view module) {
  if (grid.size() < 4)
    throw Error(module, ErrorCode::FitIllConditioned, "need at least 4 grid points");
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (grid[k] == 0) throw Error(module, ErrorCode::InvalidArgument, "grid values must be >= 1");
    if (k > 0 && grid[k] <= grid[k - 1])
      throw Error(module, ErrorCode::InvalidArgument, "grid must be strictly increasing");
  }
}

DecayFit fit_decay(std::span<const std::size_t> grid, std::span<const double> values) {
  check_grid(grid, kModule);
  if (values.size() != grid.size())
    throw Error(kModule, ErrorCode::DimensionMismatch, "series length differs from grid");
  DecayFit f;
  f.grid.assign(grid.begin(), grid.end());
  f.values.assign(values.begin(), values.end());
  f.se_method = "ols";
  if (fill_fit(f)) {
    const double t =
        f.points_used > 2 ? student_t_quantile(0.975, static_cast<double>(f.points_used - 2)) : 0.0;
    f.slope_ci_low = f.slope - t * f.slope_se;
    f.slope_ci_high = f.slope + t * f.slope_se;
  } else {
    f.slope_ci_low = f.slope_ci_high = f.slope;
  }
  return f;
}

DecayFit fit_decay_replicated(std::span<const std::size_t> grid, const std::vector<Vector>& values,
                              std::uint64_t seed, std::size_t bootstrap) {
  check_grid(grid, kModule);
  if (values.size() != grid.size())
    throw Error(kModule, ErrorCode::DimensionMismatch, "series length differs from grid");
  const std::size_t reps = values.front().size();
  if (reps < 2) throw Error(kModule, ErrorCode::InvalidArgument, "need at least 2 replicas");
  for (const auto& v : values)
    if (v.size() != reps) throw Error(kModule, ErrorCode::DimensionMismatch, "ragged replicas");

  auto series_means = [&](std::span<const std::size_t> pick, Vector& mean, Vector& log_mean) {
    mean.assign(grid.size(), 0.0);
    log_mean.assign(grid.size(), 0.0);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      // skipped (degenerate) snapshots are stored as NaN and left out
      double s = 0.0, ls = 0.0;
      std::size_t c = 0, lc = 0;
      for (std::size_t r : pick) {
        const double v = values[k][r];
        if (!std::isfinite(v)) continue;
        s += v;
        ++c;
        if (v > 0.0) {
          ls += std::log(v);
          ++lc;
        }
      }
      mean[k] = c ? s / static_cast<double>(c) : 0.0;
      log_mean[k] = lc ? ls / static_cast<double>(lc) : std::numeric_limits<double>::quiet_NaN();
    }
  };
  auto typical_fit = [&](const Vector& log_mean, LinearFit& out) {
    Vector x, y;
    for (std::size_t k = 0; k < grid.size(); ++k)
      if (std::isfinite(log_mean[k])) {
        x.push_back(static_cast<double>(grid[k]));
        y.push_back(log_mean[k]);
      }
    if (x.size() < 2) return false;
    out = least_squares(x, y);
    return true;
  };

  std::vector<std::size_t> all(reps);
  for (std::size_t r = 0; r < reps; ++r) all[r] = r;
  DecayFit f;
  f.grid.assign(grid.begin(), grid.end());
  f.se_method = "replica-bootstrap";
  Vector log_mean;
  series_means(all, f.values, log_mean);
  const bool fitted = fill_fit(f);
  LinearFit typ;
  f.has_typical = typical_fit(log_mean, typ);
  if (f.has_typical) {
    f.typical_slope = typ.slope;
    f.typical_r2 = typ.r2;
  }

  if (fitted || f.has_typical) {
    RandomStream rng(seed, stream_id({0x626f6f74ULL, grid.size(), reps}));
    std::vector<std::size_t> pick(reps);
    Vector slopes, typical_slopes, mean, lm;
    for (std::size_t b = 0; b < bootstrap; ++b) {
      for (auto& p : pick) p = rng.below(reps);
      series_means(pick, mean, lm);
      if (fitted) {
        const auto pts = positive_log_points(grid, mean);
        if (pts.x.size() >= 2) slopes.push_back(least_squares(pts.x, pts.y).slope);
      }
      LinearFit t;
      if (f.has_typical && typical_fit(lm, t)) typical_slopes.push_back(t.slope);
    }
    if (fitted && slopes.size() > 1) f.slope_se = mean_se(slopes).sd;
    if (f.has_typical && typical_slopes.size() > 1) f.typical_slope_se = mean_se(typical_slopes).sd;
  }
  if (fitted) {
    const double z = normal_quantile(0.975);
    f.slope_ci_low = f.slope - z * f.slope_se;
    f.slope_ci_high = f.slope + z * f.slope_se;
  } else {
    f.slope_ci_low = f.slope_ci_high = f.slope;
  }
  return f;
}

}  // namespace furstenberg
