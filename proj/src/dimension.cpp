#include "furstenberg/dimension.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "furstenberg/errors.hpp"
#include "furstenberg/parallel.hpp"
#include "furstenberg/rng.hpp"
#include "furstenberg/stats.hpp"

namespace furstenberg {

namespace {

constexpr std::string_view kModule = "dimension";
constexpr std::uint64_t kRoleFamily = 0x31;

[[noreturn]] void fail(ErrorCode code, const std::string& detail) {
  throw Error(kModule, code, detail);
}

void require_sample(const BoundarySample& s) {
  if (s.points.empty()) fail(ErrorCode::EmptySample, "sample has no points");
}

// Normal of the hyperplane best fitting the given unit vectors (least
// eigenvector of their scatter matrix). Exact when fewer than d points.
Vector fitted_normal(const std::vector<std::span<const double>>& pts, std::size_t d) {
  SquareMatrix scatter(d);
  for (const auto& p : pts)
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) scatter(i, j) += p[i] * p[j];
  // symmetric PSD: the SVD is the eigendecomposition
  const double s = scatter.max_abs();
  const Vector zeros(d, 0.0);
  const auto svd = graded_svd((1.0 / s) * scatter, zeros);
  return svd.right.column(d - 1);
}

std::vector<Vector> sorted_distances(const BoundarySample& sample,
                                     const std::vector<ProjectiveHyperplane>& family) {
  std::vector<Vector> out(family.size());
  parallel_for(family.size(), [&](std::size_t h) {
    Vector dist(sample.points.size());
    for (std::size_t i = 0; i < sample.points.size(); ++i)
      dist[i] = std::abs(dot(sample.points[i].rep(), family[h].normal()));
    std::sort(dist.begin(), dist.end());
    out[h] = std::move(dist);
  });
  return out;
}

double mass_from_sorted(const Vector& dist, double eps) {
  const auto it = std::upper_bound(dist.begin(), dist.end(), eps);
  return static_cast<double>(it - dist.begin()) / static_cast<double>(dist.size());
}

}  // namespace

Vector log_spaced(double lo, double hi, std::size_t count) {
  if (!(lo > 0.0) || !(hi > lo) || count < 2) fail(ErrorCode::InvalidArgument, "bad log grid");
  Vector v(count);
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t i = 0; i < count; ++i)
    v[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
  v.front() = lo;
  v.back() = hi;
  return v;
}

ProjectivePoint default_start(std::size_t dim) {
  Vector start(dim);
  for (std::size_t i = 0; i < dim; ++i) start[i] = 1.0 + 0.37 * static_cast<double>(i);
  return ProjectivePoint(start);
}

Vector default_eps_grid() { return log_spaced(0.01, 0.5, 8); }
Vector default_correlation_radii() { return log_spaced(1e-3, 0.3, 12); }

double hyperplane_mass(const BoundarySample& sample, const ProjectiveHyperplane& h, double eps) {
  require_sample(sample);
  if (!(eps > 0.0 && eps <= 1.0)) fail(ErrorCode::InvalidArgument, "eps must lie in (0, 1]");
  std::size_t hits = 0;
  for (const auto& p : sample.points)
    if (point_hyperplane_distance(p, h) <= eps) ++hits;
  return static_cast<double>(hits) / static_cast<double>(sample.points.size());
}

HyperplaneFamily adversarial_family(const BoundarySample& sample, std::size_t budget,
                                    std::uint64_t seed) {
  require_sample(sample);
  const std::size_t d = sample.points.front().dim();
  const std::size_t N = sample.points.size();
  HyperplaneFamily fam;
  auto add = [&](const Vector& normal, const char* origin) {
    if (norm(normal) < 1e-12) return;
    fam.hyperplanes.emplace_back(normal);
    fam.origin.emplace_back(origin);
  };

  // (a) through a point and its d-2 nearest neighbours, for the points whose
  // (d-1)-th neighbour is closest
  const std::size_t kth = std::max<std::size_t>(1, d - 1);
  std::vector<std::vector<std::size_t>> neighbours(N);
  Vector kdist(N);
  parallel_for(N, [&](std::size_t i) {
    std::vector<std::pair<double, std::size_t>> dist;
    dist.reserve(N - 1);
    for (std::size_t j = 0; j < N; ++j)
      if (j != i) dist.emplace_back(fubini_study(sample.points[i], sample.points[j]), j);
    const std::size_t keep = std::min(kth, dist.size());
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(keep), dist.end());
    kdist[i] = keep ? dist[keep - 1].first : 0.0;
    for (std::size_t t = 0; t + 1 < keep; ++t) neighbours[i].push_back(dist[t].second);
  });
  std::vector<std::size_t> order(N);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return kdist[a] < kdist[b]; });
  for (std::size_t t = 0; t < std::min(budget, N); ++t) {
    const std::size_t i = order[t];
    std::vector<std::span<const double>> pts{sample.points[i].rep()};
    for (std::size_t j : neighbours[i]) pts.push_back(sample.points[j].rep());
    add(fitted_normal(pts, d), "nearest");
  }

  // (b) greedy coverings at several scales; one hyperplane per dense cell,
  // fitted to the points of the cell
  const std::size_t per_scale = std::max<std::size_t>(1, budget / 8);
  for (double r : {0.01, 0.03, 0.1, 0.3}) {
    std::vector<std::size_t> count(N, 0);
    parallel_for(N, [&](std::size_t i) {
      for (std::size_t j = 0; j < N; ++j)
        if (fubini_study(sample.points[i], sample.points[j]) <= r) ++count[i];
    });
    std::vector<std::size_t> by_count(N);
    std::iota(by_count.begin(), by_count.end(), 0);
    std::stable_sort(by_count.begin(), by_count.end(),
                     [&](std::size_t a, std::size_t b) { return count[a] > count[b]; });
    std::vector<bool> covered(N, false);
    std::size_t taken = 0;
    for (std::size_t i : by_count) {
      if (taken == per_scale) break;
      if (covered[i]) continue;
      std::vector<std::span<const double>> cell;
      for (std::size_t j = 0; j < N; ++j)
        if (fubini_study(sample.points[i], sample.points[j]) <= r) {
          covered[j] = true;
          cell.push_back(sample.points[j].rep());
        }
      if (d == 2) {
        // in P(R^2) the hyperplane through the cell centre is the centre itself
        const auto c = sample.points[i].rep();
        add(Vector{-c[1], c[0]}, "dense");
      } else {
        add(fitted_normal(cell, d), "dense");
      }
      ++taken;
    }
  }

  // (c) fixed random batch
  RandomStream rng(seed, stream_id({kRoleFamily, d}));
  for (int t = 0; t < 64; ++t) add(random_unit_vector(rng, d), "random");

  std::size_t na = 0, nb = 0, nc = 0;
  for (const auto& o : fam.origin) (o == "nearest" ? na : o == "dense" ? nb : nc)++;
  fam.description = "nearest:" + std::to_string(na) + " dense:" + std::to_string(nb) +
                    " random:" + std::to_string(nc);
  return fam;
}

DimensionFit fit_dimension(const BoundarySample& sample, std::span<const double> eps_grid,
                           std::size_t hyperplane_budget, std::uint64_t seed) {
  require_sample(sample);
  if (eps_grid.size() < 5) fail(ErrorCode::InvalidArgument, "eps grid needs >= 5 points");
  for (std::size_t k = 0; k < eps_grid.size(); ++k) {
    if (!(eps_grid[k] > 0.0 && eps_grid[k] <= 1.0))
      fail(ErrorCode::InvalidArgument, "eps values must lie in (0, 1]");
    if (k > 0 && !(eps_grid[k] > eps_grid[k - 1]))
      fail(ErrorCode::InvalidArgument, "eps grid must be increasing");
  }
  const auto fam = adversarial_family(sample, hyperplane_budget, seed);
  const auto dists = sorted_distances(sample, fam.hyperplanes);
  const std::size_t N = sample.points.size();

  DimensionFit out;
  out.eps_grid.assign(eps_grid.begin(), eps_grid.end());
  out.family_description = fam.description;
  out.family_size = fam.hyperplanes.size();
  out.sample_size = N;
  for (double eps : eps_grid) {
    Vector row(fam.hyperplanes.size());
    std::size_t best = 0;
    for (std::size_t h = 0; h < row.size(); ++h) {
      row[h] = mass_from_sorted(dists[h], eps);
      if (row[h] > row[best]) best = h;
    }
    out.max_mass.push_back(row[best]);
    out.argmax.push_back(best);
    out.masses.push_back(std::move(row));
  }

  Vector x, y;
  const double resolution = 1.0 / static_cast<double>(N);
  for (std::size_t k = 0; k < eps_grid.size(); ++k)
    if (out.max_mass[k] > 0.0 && eps_grid[k] >= resolution) {
      x.push_back(std::log(eps_grid[k]));
      y.push_back(std::log(out.max_mass[k]));
      out.eps0 = eps_grid[k];
    }
  out.points_used = x.size();
  if (x.empty())
    fail(ErrorCode::AllMassesZero, "no hyperplane neighbourhood holds a sample point; "
                                   "enlarge eps or the sample");
  if (x.size() < 3) fail(ErrorCode::FitIllConditioned, "fewer than 3 eps values with mass");
  const auto lf = least_squares(x, y);
  out.alpha = lf.slope;
  out.alpha_se = lf.slope_se;
  out.r2 = lf.r2;
  out.c_hat = std::exp(lf.intercept);
  const double t = student_t_quantile(0.975, static_cast<double>(x.size() - 2));
  out.alpha_ci_low = lf.slope - t * lf.slope_se;
  out.alpha_ci_high = lf.slope + t * lf.slope_se;
  out.alpha_positive = out.alpha_ci_low > 0.0;
  out.warnings = sample.warnings;
  return out;
}

DimensionFit dimension_lower_bound(const MeasureSpec& spec, std::size_t n, std::size_t count,
                                   std::uint64_t seed, std::span<const double> eps_grid,
                                   std::size_t hyperplane_budget) {
  if (count < 2000) fail(ErrorCode::InvalidArgument, "count must be >= 2000");
  require_valid(spec);
  const auto sample = sample_stationary(spec, n, count, seed, default_start(spec.dim()));
  return fit_dimension(sample, eps_grid, hyperplane_budget, seed);
}

CorrelationDimension correlation_dimension(const BoundarySample& sample,
                                           std::span<const double> radii_in) {
  require_sample(sample);
  const std::size_t N = sample.points.size();
  if (N < 2000) fail(ErrorCode::InvalidArgument, "correlation dimension needs >= 2000 points");
  const Vector radii = radii_in.empty() ? default_correlation_radii()
                                        : Vector(radii_in.begin(), radii_in.end());
  const std::size_t R = radii.size();
  constexpr std::size_t G = 10;
  // counts[(g1 * G + g2) * R + r] for g1 <= g2, cumulative in r
  std::vector<std::vector<std::size_t>> per_point(N);
  std::vector<double> dummy;
  std::vector<std::vector<std::size_t>> counts_by_row(N, std::vector<std::size_t>(G * R, 0));
  parallel_for(N, [&](std::size_t i) {
    auto& row = counts_by_row[i];
    for (std::size_t j = i + 1; j < N; ++j) {
      const double dist = fubini_study(sample.points[i], sample.points[j]);
      const auto first = static_cast<std::size_t>(
          std::lower_bound(radii.begin(), radii.end(), dist) - radii.begin());
      if (first < R) ++row[(j % G) * R + first];
    }
  });
  std::vector<std::size_t> counts(G * G * R, 0);
  for (std::size_t i = 0; i < N; ++i)
    for (std::size_t g2 = 0; g2 < G; ++g2)
      for (std::size_t r = 0; r < R; ++r) {
        std::size_t a = i % G, b = g2;
        if (a > b) std::swap(a, b);
        counts[(a * G + b) * R + r] += counts_by_row[i][g2 * R + r];
      }
  std::vector<std::size_t> group_size(G, 0);
  for (std::size_t i = 0; i < N; ++i) ++group_size[i % G];

  // slope of log C(r) vs log r, leaving out group `skip` (G = none)
  auto estimate = [&](std::size_t skip, Vector* fractions) {
    double pairs = 0.0;
    std::size_t n_used = 0;
    for (std::size_t g = 0; g < G; ++g)
      if (g != skip) n_used += group_size[g];
    pairs = 0.5 * static_cast<double>(n_used) * static_cast<double>(n_used - 1);
    Vector x, y;
    std::size_t cum = 0;
    for (std::size_t r = 0; r < R; ++r) {
      for (std::size_t a = 0; a < G; ++a)
        for (std::size_t b = a; b < G; ++b)
          if (a != skip && b != skip) cum += counts[(a * G + b) * R + r];
      const double c = static_cast<double>(cum) / pairs;
      if (fractions) fractions->push_back(c);
      if (c > 0.0) {
        x.push_back(std::log(radii[r]));
        y.push_back(std::log(c));
      }
    }
    if (x.size() < 2) fail(ErrorCode::FitIllConditioned, "fewer than 2 radii with pairs");
    return std::make_pair(least_squares(x, y).slope, x.size());
  };

  CorrelationDimension out;
  out.radii = radii;
  const auto full = estimate(G, &out.pair_fraction);
  out.value = full.first;
  out.points_used = full.second;
  Vector jack(G);
  for (std::size_t g = 0; g < G; ++g) jack[g] = estimate(g, nullptr).first;
  const double mean = std::accumulate(jack.begin(), jack.end(), 0.0) / G;
  double ss = 0.0;
  for (double v : jack) ss += (v - mean) * (v - mean);
  out.se = std::sqrt(static_cast<double>(G - 1) / G * ss);
  const double t = student_t_quantile(0.975, static_cast<double>(G - 1));
  out.ci_low = out.value - t * out.se;
  out.ci_high = out.value + t * out.se;
  out.positive = out.ci_low > 0.0;
  return out;
}

}  // namespace furstenberg
