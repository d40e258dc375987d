#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace furstenberg {

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;  // standard error of the mean
  double sd = 0.0;
  std::size_t count = 0;
};

MeanSe mean_se(std::span<const double> xs);

// Ordinary least squares y = intercept + slope * x.
struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;        // 0 when y has no variance
  double slope_se = 0.0;  // classical OLS standard error (0 if fewer than 3 points)
  std::size_t points = 0;
};

LinearFit least_squares(std::span<const double> x, std::span<const double> y);

// two-sided Student-t quantile, e.g. student_t_quantile(0.975, 9)
double student_t_quantile(double p, double dof);
double normal_quantile(double p);

// two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|
double ks_statistic(std::vector<double> a, std::vector<double> b);

}  // namespace furstenberg
