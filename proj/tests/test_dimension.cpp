#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "furstenberg/dimension.hpp"
#include "helpers.hpp"

using namespace furstenberg;
using testing::error_code_of;

namespace {

BoundarySample from_points(std::vector<ProjectivePoint> pts) {
  BoundarySample s;
  s.points = std::move(pts);
  s.n = 1;
  return s;
}

// i.i.d. points with uniform angle on P(R^2), i.e. arclength measure
BoundarySample uniform_circle(std::size_t count, std::uint64_t seed) {
  RandomStream rng(seed, 0);
  std::vector<ProjectivePoint> pts;
  for (std::size_t i = 0; i < count; ++i)
    pts.push_back(ProjectivePoint::at_angle(std::numbers::pi * rng.uniform()));
  return from_points(std::move(pts));
}

}  // namespace

TEST_CASE("hyperplane_mass examples") {
  const auto e1 = ProjectivePoint::basis(2, 0);
  const auto at_e1 = from_points({e1, e1, e1});
  CHECK(hyperplane_mass(at_e1, ProjectiveHyperplane::coordinate_kernel(2, 1), 0.5) == 1.0);
  CHECK(hyperplane_mass(at_e1, ProjectiveHyperplane::coordinate_kernel(2, 0), 0.5) == 0.0);

  // distance of (x, y) to ker(e2*) is |y|
  std::vector<ProjectivePoint> pts;
  for (double dist : {0.1, 0.25, 0.9}) pts.push_back(ProjectivePoint{std::sqrt(1 - dist * dist), dist});
  CHECK(hyperplane_mass(from_points(pts), ProjectiveHyperplane::coordinate_kernel(2, 1), 0.3) ==
        doctest::Approx(2.0 / 3.0));

  CHECK(error_code_of([] { hyperplane_mass(BoundarySample{}, ProjectiveHyperplane{0, 1}, 0.3); }) ==
        ErrorCode::EmptySample);
  CHECK(error_code_of([&] { hyperplane_mass(at_e1, ProjectiveHyperplane{0, 1}, 0.0); }) ==
        ErrorCode::InvalidArgument);
}

TEST_CASE("hyperplane_mass is non-decreasing in eps") {
  const auto sample = uniform_circle(500, 3);
  RandomStream rng(4, 0);
  for (int t = 0; t < 50; ++t) {
    const ProjectiveHyperplane h(random_unit_vector(rng, 2));
    double prev = 0.0;
    for (double eps : log_spaced(1e-3, 1.0, 30)) {
      const double m = hyperplane_mass(sample, h, eps);
      CHECK(m >= prev);
      CHECK(m <= 1.0);
      prev = m;
    }
    CHECK(prev == 1.0);
  }
}

TEST_CASE("log_spaced and default grids") {
  const auto g = log_spaced(0.01, 1.0, 3);
  REQUIRE(g.size() == 3);
  CHECK(g[0] == doctest::Approx(0.01));
  CHECK(g[1] == doctest::Approx(0.1));
  CHECK(g[2] == doctest::Approx(1.0));
  const auto eps = default_eps_grid();
  CHECK(eps.size() >= 5);
  CHECK(std::is_sorted(eps.begin(), eps.end()));
  CHECK(error_code_of([] { log_spaced(0.0, 1.0, 3); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("enlarging the family never lowers the max mass") {
  const auto sample = uniform_circle(2000, 5);
  const auto grid = default_eps_grid();
  const auto fit = fit_dimension(sample, grid, 64, 1);
  REQUIRE(fit.masses.size() == grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const auto& row = fit.masses[k];
    REQUIRE(row.size() == fit.family_size);
    double running = 0.0;
    for (double m : row) {
      const double before = running;
      running = std::max(running, m);
      CHECK(running >= before);
    }
    CHECK(running == fit.max_mass[k]);
    CHECK(row[fit.argmax[k]] == fit.max_mass[k]);
  }
}

TEST_CASE("uniform control recovers alpha near 1") {
  const auto fit = fit_dimension(uniform_circle(4000, 7), default_eps_grid(), 64, 2);
  CHECK(fit.alpha >= 0.8);
  CHECK(fit.alpha <= 1.2);
  CHECK(fit.alpha_positive);
  const auto cd = correlation_dimension(uniform_circle(4000, 8));
  CHECK(cd.value == doctest::Approx(1.0).epsilon(0.2));
  CHECK(cd.positive);
}

TEST_CASE("Dirac control: no positive dimension") {
  const auto spec = dirac("d4", SquareMatrix{{4, 0}, {0, 0.25}});
  const auto fit = dimension_lower_bound(spec, 30, 2000, 1, default_eps_grid(), 64);
  CHECK_FALSE(fit.alpha_positive);
  CHECK(std::abs(fit.alpha) < 1e-9);
  for (double m : fit.max_mass) CHECK(m == 1.0);

  const auto e1 = ProjectivePoint::basis(2, 0);
  const auto cd = correlation_dimension(from_points(std::vector<ProjectivePoint>(2000, e1)));
  CHECK(cd.value == 0.0);
  CHECK_FALSE(cd.positive);
}

TEST_CASE("fit and sample size checks") {
  const auto small = uniform_circle(100, 1);
  CHECK(error_code_of([&] { correlation_dimension(small); }) == ErrorCode::InvalidArgument);
  const std::vector<double> short_grid{0.1, 0.2, 0.3};
  CHECK(error_code_of([&] { fit_dimension(small, short_grid, 8, 1); }) == ErrorCode::InvalidArgument);
  const std::vector<double> tiny{1e-9, 2e-9, 3e-9, 4e-9, 5e-9};
  CHECK(error_code_of([&] { fit_dimension(small, tiny, 8, 1); }) == ErrorCode::AllMassesZero);
  CHECK(error_code_of([] {
          dimension_lower_bound(sanov_spec(), 30, 500, 1, default_eps_grid(), 64);
        }) == ErrorCode::InvalidArgument);
}

TEST_CASE("adversarial family composition") {
  const auto fam = adversarial_family(uniform_circle(2000, 9), 64, 1);
  CHECK(fam.hyperplanes.size() == fam.origin.size());
  const auto count = [&](const char* o) { return std::count(fam.origin.begin(), fam.origin.end(), o); };
  CHECK(count("nearest") > 0);
  CHECK(count("dense") > 0);
  CHECK(count("random") == 64);
  CHECK_FALSE(fam.description.empty());
}

TEST_CASE("Sanov: both dimension estimators see positive dimension") {
  const auto fit = dimension_lower_bound(sanov_spec(), 40, 2000, 3, default_eps_grid(), 64);
  CHECK(fit.alpha_positive);
  const auto sample = sample_stationary(sanov_spec(), 40, 2000, 3, default_start(2));
  const auto cd = correlation_dimension(sample);
  CHECK(cd.positive == fit.alpha_positive);
  CHECK(cd.ci_low > 0.0);
}
