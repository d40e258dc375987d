#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "furstenberg/linalg.hpp"

namespace furstenberg {

// Log-linear fit log(value) = intercept + slope * n of a decaying series.
// rho_hat = exp(slope) is the per-step rate.
struct DecayFit {
  std::vector<std::size_t> grid;
  Vector values;
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  double rho_hat = 1.0;
  double slope_se = 0.0;
  double slope_ci_low = 0.0;   // 95%
  double slope_ci_high = 0.0;
  std::size_t points_used = 0;  // grid points with a positive value
  bool exact_zero = false;      // every value is 0: slope -inf, rho_hat 0
  std::string se_method;        // "ols" or "replica-bootstrap"

  // Fit of n -> mean log(value) over replicas (the typical rate). Only set by
  // fit_decay_replicated.
  bool has_typical = false;
  double typical_slope = 0.0;
  double typical_slope_se = 0.0;
  double typical_r2 = 0.0;
};

// Fit of a plain series; standard error from the OLS residuals.
DecayFit fit_decay(std::span<const std::size_t> grid, std::span<const double> values);

// values[k][r] is the statistic of replica r at grid[k]. The fitted series is the
// per-n mean; slope standard errors come from resampling whole replicas.
DecayFit fit_decay_replicated(std::span<const std::size_t> grid, const std::vector<Vector>& values,
                              std::uint64_t seed, std::size_t bootstrap = 200);

void check_grid(std::span<const std::size_t> grid, std::string_view module);

}  // namespace furstenberg
