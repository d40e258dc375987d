#include "furstenberg/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>

#include "furstenberg/errors.hpp"

namespace furstenberg {

MeanSe mean_se(std::span<const double> xs) {
  MeanSe out;
  out.count = xs.size();
  if (xs.empty()) return out;
  double s = 0.0;
  for (double x : xs) s += x;
  out.mean = s / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - out.mean) * (x - out.mean);
    out.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    out.se = out.sd / std::sqrt(static_cast<double>(xs.size()));
  }
  return out;
}

LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error("stats", ErrorCode::DimensionMismatch, "fit lengths");
  const std::size_t m = x.size();
  LinearFit f;
  f.points = m;
  if (m < 2) throw Error("stats", ErrorCode::FitIllConditioned, "fewer than 2 points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(m);
  my /= static_cast<double>(m);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw Error("stats", ErrorCode::FitIllConditioned, "abscissae are constant");
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    sse += r * r;
  }
  // a series that is constant up to rounding has no explained variance
  const double noise = 1e-12 * (1.0 + std::abs(my));
  const bool flat = syy <= static_cast<double>(m) * noise * noise;
  f.r2 = flat ? 0.0 : std::clamp(1.0 - sse / syy, 0.0, 1.0);
  if (m > 2) f.slope_se = std::sqrt(sse / static_cast<double>(m - 2) / sxx);
  return f;
}

double student_t_quantile(double p, double dof) {
  boost::math::students_t dist(dof);
  return boost::math::quantile(dist, p);
}

double normal_quantile(double p) {
  boost::math::normal dist;
  return boost::math::quantile(dist, p);
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw Error("stats", ErrorCode::EmptySample, "KS on empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

}  // namespace furstenberg
