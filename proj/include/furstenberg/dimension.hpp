#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "furstenberg/boundary.hpp"
#include "furstenberg/linalg.hpp"
#include "furstenberg/measures.hpp"

namespace furstenberg {

// fraction of sample points within eps of the hyperplane
double hyperplane_mass(const BoundarySample& sample, const ProjectiveHyperplane& h, double eps);

struct HyperplaneFamily {
  std::vector<ProjectiveHyperplane> hyperplanes;
  std::vector<std::string> origin;  // "nearest", "dense" or "random", per hyperplane
  std::string description;
};

// Hyperplanes through clusters of close sample points, hyperplanes through the
// densest cells of greedy coverings, and a fixed random batch.
HyperplaneFamily adversarial_family(const BoundarySample& sample, std::size_t budget,
                                    std::uint64_t seed);

struct DimensionFit {
  Vector eps_grid;
  Vector max_mass;                   // per eps, over the family
  std::vector<std::size_t> argmax;   // hyperplane index realizing max_mass
  std::vector<Vector> masses;        // masses[k][h]
  double alpha = 0.0;                // slope of log max_mass vs log eps
  double alpha_se = 0.0;
  double alpha_ci_low = 0.0;         // 95%
  double alpha_ci_high = 0.0;
  double c_hat = 0.0;                // exp(intercept)
  double eps0 = 0.0;                 // largest eps used in the fit
  double r2 = 0.0;
  std::size_t points_used = 0;
  bool alpha_positive = false;       // CI lower bound > 0
  std::string family_description;
  std::size_t family_size = 0;
  std::size_t sample_size = 0;
  std::vector<std::string> warnings;
};

DimensionFit fit_dimension(const BoundarySample& sample, std::span<const double> eps_grid,
                           std::size_t hyperplane_budget, std::uint64_t seed);

// generic start for sampling the stationary measure; the limit does not depend on it
ProjectivePoint default_start(std::size_t dim);

DimensionFit dimension_lower_bound(const MeasureSpec& spec, std::size_t n, std::size_t count,
                                   std::uint64_t seed, std::span<const double> eps_grid,
                                   std::size_t hyperplane_budget);

struct CorrelationDimension {
  double value = 0.0;
  double se = 0.0;       // delete-one-group jackknife over 10 groups
  double ci_low = 0.0;   // 95%
  double ci_high = 0.0;
  Vector radii;
  Vector pair_fraction;  // C(r)
  std::size_t points_used = 0;
  bool positive = false;
};

CorrelationDimension correlation_dimension(const BoundarySample& sample,
                                           std::span<const double> radii = {});

// count values log-spaced from lo to hi inclusive
Vector log_spaced(double lo, double hi, std::size_t count);
Vector default_eps_grid();
Vector default_correlation_radii();

}  // namespace furstenberg
