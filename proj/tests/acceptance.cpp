// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "furstenberg/boundary.hpp"
#include "furstenberg/cli.hpp"
#include "furstenberg/dimension.hpp"
#include "furstenberg/linalg.hpp"
#include "furstenberg/measures.hpp"
#include "furstenberg/parallel.hpp"
#include "furstenberg/pingpong.hpp"
#include "furstenberg/walk.hpp"

using namespace furstenberg;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... xs) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, xs...);
  return buf;
}

const std::string kData = FURSTENBERG_DATA_DIR;

SquareMatrix gaussian(RandomStream& rng, std::size_t d) {
  SquareMatrix g(d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) g(i, j) = rng.normal();
  return g;
}

SquareMatrix random_sl(RandomStream& rng, std::size_t d) {
  SquareMatrix g = gaussian(rng, d);
  double det = determinant(g);
  if (det < 0) {
    for (std::size_t j = 0; j < d; ++j) std::swap(g(0, j), g(1, j));
    det = -det;
  }
  return (1.0 / std::pow(det, 1.0 / static_cast<double>(d))) * g;
}

// largest singular value by power iteration on g^T g (Rayleigh quotient)
double power_norm(const SquareMatrix& g) {
  Vector x(g.dim(), 1.0);
  double rq = 0.0;
  for (int it = 0; it < 5000; ++it) {
    Vector y = transpose_apply(g, g * x);
    const double n = norm(y);
    for (auto& c : y) c /= n;
    x = std::move(y);
  }
  const Vector gx = g * x;
  rq = norm(gx);
  return rq;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// ---------------------------------------------------------------- AC1

Verdict ac1() {
  RandomStream rng(1001, 0);
  double worst_rec = 0, worst_orth = 0, worst_id = 0;
  for (int t = 0; t < 1000; ++t) {
    const std::size_t d = 2 + t % 3;
    const auto g = gaussian(rng, d);
    const auto kak = svd_kak(g);
    const auto rec = kak.k * SquareMatrix::diagonal(kak.a) * kak.u;
    worst_rec = std::max(worst_rec, (rec - g).max_abs() / operator_norm(g));
    worst_orth = std::max({worst_orth, orthogonality_defect(kak.k), orthogonality_defect(kak.u.transposed())});
    const double n1 = power_norm(g);
    const double n2 = power_norm(wedge_power(g, 2));
    worst_id = std::max(worst_id, rel(n1, kak.a[0]));
    worst_id = std::max(worst_id, rel(n2 / (n1 * n1), kak.a[1] / kak.a[0]));
    double frob = 0;
    for (double a : kak.a) frob += a * a;
    worst_id = std::max(worst_id, rel(frob, std::pow(frobenius_norm(g), 2)));
  }
  return {worst_rec <= 1e-9 && worst_orth <= 1e-10 && worst_id <= 1e-8,
          fmt("reconstruction %.2e (<=1e-9), orthogonality %.2e (<=1e-10), norm identities %.2e (<=1e-8)",
              worst_rec, worst_orth, worst_id)};
}

// ---------------------------------------------------------------- AC2

Verdict ac2() {
  const auto kak = svd_kak(SquareMatrix{{1, 1}, {0, 1}});
  const double phi = (1 + std::sqrt(5.0)) / 2, psi = (std::sqrt(5.0) - 1) / 2;
  const double e = std::max(std::abs(kak.a[0] - phi), std::abs(kak.a[1] - psi));
  return {e <= 1e-12, fmt("a = (%.15f, %.15f), max error %.2e (<=1e-12)", kak.a[0], kak.a[1], e)};
}

// ---------------------------------------------------------------- AC3

Verdict ac3() {
  const auto diag = lyapunov_spectrum(dirac("diag", SquareMatrix{{2, 0}, {0, 0.5}}), 2000, 16, 3001);
  const double e_diag = std::max(std::abs(diag.mean[0] - std::log(2.0)), std::abs(diag.mean[1] + std::log(2.0)));
  const auto ab = lyapunov_spectrum(cli::load_spec(kData + "/abelian.json"), 2000, 16, 3002);
  const double z_ab = std::abs(ab.mean[0]) / ab.se[0];
  const auto gap = top_gap(sanov_spec(), 2000, 16, 3003);
  const bool ok = e_diag <= 1e-10 && z_ab <= 4.0 && gap.gap_positive && gap.lyapunov.estimators_agree;
  return {ok, fmt("diag error %.2e (<=1e-10); abelian |lambda1|/se = %.2f (<=4); Sanov gap %.4f CI99 "
                  "[%.4f, %.4f]; QR vs wedge agree: %s",
                  e_diag, z_ab, gap.gap, gap.ci_low, gap.ci_high,
                  gap.lyapunov.estimators_agree ? "yes" : "no")};
}

// ---------------------------------------------------------------- AC4

std::vector<std::size_t> steps(std::size_t from, std::size_t to, std::size_t by) {
  std::vector<std::size_t> g;
  for (std::size_t n = from; n <= to; n += by) g.push_back(n);
  return g;
}

Verdict ac4() {
  const auto diag4 = dirac("d4", SquareMatrix{{4, 0}, {0, 0.25}});
  const auto p = ProjectivePoint(reference_flag_p0(2).frame().column(0));
  const auto q = ProjectivePoint(reference_flag_q0(2).frame().column(0));
  const auto d = convergence_rate(diag4, steps(2, 10, 2), 4, 4001, {p, q});
  const double d_err = std::abs(d.fit.slope / -std::log(16.0) - 1.0);

  const auto grid = steps(4, 24, 4);
  const auto s = convergence_rate(sanov_spec(), grid, 64, 4002, {p, q});
  const auto gap = top_gap(sanov_spec(), 2000, 16, 4003);
  const double combined = std::hypot(s.fit.slope_se, gap.se);
  const double z = std::abs(std::abs(s.fit.slope) - gap.gap) / combined;
  const bool ok = d_err <= 0.02 && s.fit.slope < 0 && s.fit.r2 >= 0.9 && z <= 3.0;
  return {ok, fmt("diag(4,1/4) slope %.5f vs -log 16 = %.5f (rel %.2e, <=2%%); Sanov slope %.4f "
                  "(se %.4f, R2 %.3f), gap %.4f (se %.4f): |slope| - gap = %.4f = %.1f combined se (<=3); "
                  "slope of E log delta, for comparison: %.4f",
                  d.fit.slope, -std::log(16.0), d_err, s.fit.slope, s.fit.slope_se, s.fit.r2, gap.gap,
                  gap.se, std::abs(s.fit.slope) - gap.gap, z, s.fit.typical_slope)};
}

// ---------------------------------------------------------------- AC5

Verdict ac5() {
  const auto grid = steps(6, 30, 4);
  const auto k = kak_convergence(sanov_spec(), grid, 64, 5001, KakSide::RightK);
  const auto u = kak_convergence(sanov_spec(), grid, 64, 5001, KakSide::LeftU);
  const auto nu = u_nonconvergence(sanov_spec(), grid, 64, 5001);
  const bool ok = k.fit.slope < 0 && k.fit.r2 >= 0.8 && u.fit.slope < 0 && u.fit.r2 >= 0.8 &&
                  nu.window_mean > 0.05 && nu.no_decay;
  return {ok, fmt("right-k slope %.4f (R2 %.3f); left-u slope %.4f (R2 %.3f); right-walk u window mean "
                  "%.4f (>0.05), slope CI [%.4f, %.4f]",
                  k.fit.slope, k.fit.r2, u.fit.slope, u.fit.r2, nu.window_mean,
                  nu.series.fit.slope_ci_low, nu.series.fit.slope_ci_high)};
}

// ---------------------------------------------------------------- AC6

Verdict ac6() {
  const auto grid = steps(10, 80, 10);
  std::vector<TestFunction> fs{TestFunction::Constant};
  for (auto f : builtin_test_functions()) fs.push_back(f);
  const auto r = independence_gap(sanov_spec(), grid, 2000, 6001, fs);
  const std::size_t m = r.max_discrepancy.size(), third = (m + 2) / 3;
  double head = 0, tail = 0;
  for (std::size_t k = 0; k < third; ++k) {
    head += r.max_discrepancy[k];
    tail += r.max_discrepancy[m - 1 - k];
  }
  bool constant_zero = true;
  for (const auto& row : r.discrepancy) constant_zero = constant_zero && row[0] == 0.0;
  const double ratio = tail / head;
  return {ratio < 0.2 && constant_zero,
          fmt("final-third / initial-third max discrepancy = %.4f (<0.2); constant phi exactly 0: %s",
              ratio, constant_zero ? "yes" : "no")};
}

// ---------------------------------------------------------------- AC7

Verdict ac7() {
  RandomStream rng(7001, 0);
  BoundarySample uniform;
  for (int i = 0; i < 4000; ++i)
    uniform.points.push_back(ProjectivePoint::at_angle(std::numbers::pi * rng.uniform()));
  const auto eps = default_eps_grid();
  const auto fu = fit_dimension(uniform, eps, 64, 7002);
  const auto fd = dimension_lower_bound(dirac("d4", SquareMatrix{{4, 0}, {0, 0.25}}), 60, 4000, 7003, eps, 64);
  const auto fs = dimension_lower_bound(sanov_spec(), 60, 4000, 7004, eps, 64);
  const auto sample = sample_stationary(sanov_spec(), 60, 4000, 7004, default_start(2));
  const auto cd = correlation_dimension(sample);
  const bool ok = fu.alpha >= 0.8 && fu.alpha <= 1.2 && !fd.alpha_positive && fs.alpha_positive &&
                  cd.ci_low > 0.0;
  return {ok, fmt("uniform alpha %.3f (in [0.8,1.2]); Dirac alpha_positive %s; Sanov alpha %.3f CI "
                  "[%.3f, %.3f]; correlation dimension %.3f CI [%.3f, %.3f]",
                  fu.alpha, fd.alpha_positive ? "true" : "false", fs.alpha, fs.alpha_ci_low,
                  fs.alpha_ci_high, cd.value, cd.ci_low, cd.ci_high)};
}

// ---------------------------------------------------------------- AC8

// exact products of walk pairs drawn from a spec with exact entries
std::size_t soundness_corpus(const MeasureSpec& spec, std::size_t pairs, std::size_t max_n,
                             std::uint64_t seed, std::size_t& certified) {
  const auto atoms = exact_atoms(spec);
  const Sampler sampler(spec);
  RandomStream rng(seed, 0);
  std::size_t violations = 0;
  for (std::size_t t = 0; t < pairs; ++t) {
    const std::size_t n = 3 + t % (max_n - 2);
    RationalMatrix x = RationalMatrix::identity(spec.dim()), y = x;
    for (std::size_t s = 0; s < n; ++s) x = x * atoms[sampler.draw_index(rng)];
    for (std::size_t s = 0; s < n; ++s) y = y * atoms[sampler.draw_index(rng)];
    if (!certify_pair(x.to_double(), y.to_double()).passed) continue;
    ++certified;
    if (!word_oracle(x, y, 6).empty()) ++violations;
  }
  return violations;
}

Verdict ac8() {
  const SquareMatrix d4{{4, 0}, {0, 0.25}};
  const auto r = SquareMatrix::rotation(std::numbers::pi / 4);
  const auto c = certify_pair(d4, r * d4 * inverse(r), 0.26);
  double sep_err = 0, min_cross = 1;
  for (const auto& p : c.players) sep_err = std::max(sep_err, std::abs(p.separation - 1.0));
  for (const auto& m : c.cross) min_cross = std::min(min_cross, m.distance);
  const bool hand_ok = c.passed && sep_err <= 1e-9 && min_cross >= std::numbers::sqrt2 / 2 - 1e-9;

  const auto sanov = certify_pair(SquareMatrix{{1, 2}, {0, 1}}, SquareMatrix{{1, 0}, {2, 1}});

  // exact corpus: rational conjugate of diag(4,1/4), short Sanov and diagonal-rotation walks
  std::size_t certified = 0, violations = 0;
  {
    const auto g = RationalMatrix::parse(2, {"4", "0", "0", "1/4"});
    const auto rot = RationalMatrix::parse(2, {"3/5", "-4/5", "4/5", "3/5"});
    const auto h = rot * g * rot.inverse();
    if (certify_pair(g.to_double(), h.to_double()).passed) {
      ++certified;
      if (!word_oracle(g, h, 6).empty()) ++violations;
    }
  }
  violations += soundness_corpus(sanov_spec(), 200, 12, 8001, certified);
  violations += soundness_corpus(diagrot_spec(), 200, 12, 8002, certified);
  const bool ok = hand_ok && !sanov.passed && violations == 0 && certified > 0;
  return {ok, fmt("hand pair passed %s (max |delta(v,H)-1| %.2e, min cross %.6f >= %.6f); Sanov pair "
                  "passed %s; %zu certified exact pairs, %zu with a relation of length <= 6",
                  c.passed ? "true" : "false", sep_err, min_cross, std::numbers::sqrt2 / 2,
                  sanov.passed ? "true" : "false", certified, violations)};
}

// ---------------------------------------------------------------- AC9

Verdict ac9() {
  const auto grid = steps(20, 80, 10);
  const auto r = freeness_experiment(sanov_spec(), sanov_spec(), 60, grid, 100, 9001);
  const bool ok = r.certified_fraction >= 0.9 && r.fit.slope < 0 && r.spot_check_relations == 0;
  return {ok, fmt("certified fraction at n=60: %.3f (>=0.9); failure-fraction slope %.4f (<0); spot "
                  "checks %zu, relations %zu",
                  r.certified_fraction, r.fit.slope, r.spot_checks, r.spot_check_relations)};
}

// ---------------------------------------------------------------- AC10

Verdict ac10() {
  RandomStream rng(10001, 0);
  std::size_t instances = 0, violations = 0, attempts = 0;
  double worst = -1;
  while (instances < 500 && attempts < 100000) {
    ++attempts;
    const std::size_t d = 2 + attempts % 3;
    Vector stretch(d, 1.0);
    stretch[0] = 20.0;
    stretch[d - 1] = 1.0 / 20.0;
    const auto g = random_sl(rng, d) * SquareMatrix::diagonal(stretch);
    const double ce = contraction_epsilon(g);
    if (!(ce < 0.95)) continue;
    const double eps = std::min(0.99, ce * (1.0 + 0.5 * rng.uniform()));
    const auto v = attracting_point(g);
    const auto h = repelling_hyperplane(g);
    const ProjectivePoint x(random_unit_vector(rng, d));
    if (point_hyperplane_distance(x, h) < eps) continue;
    const double excess = fubini_study(act_projective(g, x), v) - eps;
    worst = std::max(worst, excess);
    if (excess > 1e-9) ++violations;
    ++instances;
  }
  return {instances == 500 && violations == 0,
          fmt("%zu instances, %zu violations, max delta(gx, v_g) - eps = %.3e (<=1e-9)", instances,
              violations, worst)};
}

// ---------------------------------------------------------------- AC11

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Verdict ac11() {
  const std::vector<std::vector<std::string>> commands{
      {"lyapunov", "--spec", "sanov.json", "--seed", "11"},
      {"converge", "--spec", "sanov.json", "--seed", "11"},
      {"kak-converge", "--spec", "sanov.json", "--seed", "11"},
      {"independence", "--spec", "sanov.json", "--seed", "11", "--samples", "500"},
      {"dimension", "--spec", "sanov.json", "--seed", "11", "--count", "2000"},
      {"tits", "--spec", "sanov.json", "--seed", "11", "--pairs", "50"},
      {"certify", "--g", "[[4,0],[0,1/4]]", "--h-rotate", "45"},
  };
  const auto base = fs::temp_directory_path() / "furstenberg_acceptance";
  fs::remove_all(base);
  std::size_t files = 0, mismatches = 0, failures = 0;
  for (const auto& cmd : commands) {
    std::array<fs::path, 2> dirs{base / (cmd[0] + "_1"), base / (cmd[0] + "_2")};
    for (const auto& dir : dirs) {
      auto args = cmd;
      args.push_back("--out");
      args.push_back(dir.string());
      std::ostringstream out, err;
      if (cli::run(args, out, err) != 0) ++failures;
    }
    if (!fs::exists(dirs[0])) continue;
    for (const auto& e : fs::directory_iterator(dirs[0])) {
      if (e.path().extension() != ".csv") continue;
      ++files;
      if (slurp(e.path()) != slurp(dirs[1] / e.path().filename())) ++mismatches;
    }
  }
  fs::remove_all(base);
  // certify writes only its JSON record; every other command writes at least one CSV
  return {failures == 0 && mismatches == 0 && files >= commands.size() - 1,
          fmt("%zu commands run twice, %zu CSV files compared, %zu differ, %zu runs failed",
              commands.size(), files, mismatches, failures)};
}

}  // namespace

int main() {
  set_max_jobs(0);
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
      {"AC1 KAK correctness", ac1},
      {"AC2 hand-derived SVD", ac2},
      {"AC3 Lyapunov exactness and consistency", ac3},
      {"AC4 exponential boundary convergence", ac4},
      {"AC5 KAK-component dichotomy", ac5},
      {"AC6 asymptotic independence", ac6},
      {"AC7 dimension positivity", ac7},
      {"AC8 ping-pong soundness", ac8},
      {"AC9 probabilistic Tits alternative", ac9},
      {"AC10 contraction lemma", ac10},
      {"AC11 reproducibility", ac11},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("raised: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %s: %s [%.1fs]\n", v.pass ? "PASS" : "FAIL", name, v.detail.c_str(), s);
    std::fflush(stdout);
    failed += !v.pass;
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
