#include "furstenberg/pingpong.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <set>

#include "furstenberg/errors.hpp"
#include "furstenberg/parallel.hpp"
#include "furstenberg/rng.hpp"
#include "furstenberg/walk.hpp"

namespace furstenberg {

namespace {

constexpr std::string_view kModule = "pingpong";
constexpr std::uint64_t kRoleWitness = 0x41;
constexpr std::uint64_t kRoleWalks = 0x42;
constexpr double kGapTolerance = 1e-10;
constexpr double kEpsCap = 0.45;
constexpr std::array<const char*, 4> kNames{"g", "g^-1", "h", "h^-1"};

// the union pairs (s, t) of condition 4: V_s u H_t
constexpr std::array<std::pair<std::size_t, std::size_t>, 8> kUnions{{
    {0, 0}, {1, 1}, {0, 2}, {0, 3}, {2, 2}, {3, 3}, {2, 0}, {2, 1}}};

[[noreturn]] void fail(ErrorCode code, const std::string& detail) {
  throw Error(kModule, code, detail);
}

struct PlayerData {
  Vector v;       // attracting direction
  Vector normal;  // normal of the repelling hyperplane
  double ratio = 1.0;
};

PlayerData forward_player(const FactoredElement& f) {
  const std::size_t d = f.k.dim();
  PlayerData p;
  p.v = f.k.column(0);
  p.normal.assign(f.u.row(0).begin(), f.u.row(0).end());
  p.ratio = d > 1 ? std::exp(f.log_a[1] - f.log_a[0]) : 0.0;
  return p;
}

// g^-1 = u^T diag(exp(-log_a)) k^T: the roles of the last singular vectors
PlayerData inverse_player(const FactoredElement& f) {
  const std::size_t d = f.k.dim();
  PlayerData p;
  p.v.assign(f.u.row(d - 1).begin(), f.u.row(d - 1).end());
  p.normal = f.k.column(d - 1);
  p.ratio = d > 1 ? std::exp(f.log_a[d - 1] - f.log_a[d - 2]) : 0.0;
  return p;
}

std::vector<Vector> witness_candidates(std::size_t d, std::uint64_t seed) {
  std::vector<Vector> c;
  for (std::size_t i = 0; i < d; ++i)
    for (double sign : {1.0, -1.0}) {
      Vector e(d, 0.0);
      e[i] = sign;
      c.push_back(std::move(e));
    }
  const double r = 1.0 / std::sqrt(2.0);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j)
      for (double sign : {1.0, -1.0}) {
        Vector e(d, 0.0);
        e[i] = r;
        e[j] = sign * r;
        c.push_back(std::move(e));
      }
  RandomStream rng(seed, stream_id({kRoleWitness, d}));
  for (int t = 0; t < 100; ++t) c.push_back(random_unit_vector(rng, d));
  return c;
}

PingPongCertificate evaluate(const std::array<PlayerData, 4>& data, double eps,
                             const std::vector<Vector>& candidates) {
  PingPongCertificate c;
  c.epsilon = eps;
  c.contraction_ok = c.separation_ok = c.cross_ok = c.witnesses_ok = true;
  for (std::size_t s = 0; s < 4; ++s) {
    Player p{kNames[s], ProjectivePoint(data[s].v), ProjectiveHyperplane(data[s].normal),
             data[s].ratio};
    p.contraction_margin = eps * eps - p.ratio;
    p.separation = std::abs(dot(p.v.rep(), p.H.normal()));
    p.separation_margin = p.separation - 2.0 * eps;
    c.contraction_ok = c.contraction_ok && p.contraction_margin > kMarginFloor;
    c.separation_ok = c.separation_ok && p.separation_margin > kMarginFloor;
    c.players.push_back(std::move(p));
  }
  for (std::size_t s = 0; s < 4; ++s)
    for (std::size_t t = 0; t < 4; ++t) {
      if ((s < 2) == (t < 2)) continue;
      CrossMargin m{s, t};
      m.distance = std::abs(dot(c.players[s].v.rep(), c.players[t].H.normal()));
      m.margin = m.distance - 2.0 * eps;
      c.cross_ok = c.cross_ok && m.margin > kMarginFloor;
      c.cross.push_back(m);
    }
  for (auto [s, t] : kUnions) {
    Witness w;
    w.s = s;
    w.t = t;
    w.clearance = -std::numeric_limits<double>::infinity();
    const Vector* best = nullptr;
    for (const auto& x : candidates) {
      const double to_ball = fubini_study_unit(x, c.players[s].v.rep());
      const double to_plane = std::abs(dot(x, c.players[t].H.normal()));
      const double clearance = std::min(to_ball, to_plane) - eps;
      if (clearance > w.clearance) {
        w.clearance = clearance;
        best = &x;
      }
    }
    w.found = w.clearance > kMarginFloor;
    if (best) w.point.emplace(*best);
    c.witnesses_ok = c.witnesses_ok && w.found;
    c.witnesses.push_back(std::move(w));
  }
  c.passed = c.contraction_ok && c.separation_ok && c.cross_ok && c.witnesses_ok;
  return c;
}

double worst_margin(const PingPongCertificate& c) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& p : c.players) m = std::min({m, p.contraction_margin, p.separation_margin});
  for (const auto& x : c.cross) m = std::min(m, x.margin);
  for (const auto& w : c.witnesses) m = std::min(m, w.clearance);
  return m;
}

const char* const kPassNote =
    "The projective images of g and h play ping-pong on P(R^d), so they generate a free "
    "group of rank 2. A nontrivial word equal to I or -I would act trivially on P(R^d), "
    "hence <g, h> is free.";
const char* const kFailNote =
    "Not certified. This is not evidence of a relation: only the top line of the standard "
    "representation is examined.";

std::vector<std::size_t> union_grid(std::size_t n, std::span<const std::size_t> grid) {
  std::set<std::size_t> s(grid.begin(), grid.end());
  s.insert(n);
  return {s.begin(), s.end()};
}

}  // namespace

std::vector<RationalMatrix> exact_atoms(const MeasureSpec& spec) {
  std::vector<RationalMatrix> out;
  for (std::size_t i = 0; i < spec.atoms.size(); ++i) {
    if (!spec.atoms[i].exact)
      fail(ErrorCode::ExactEntriesMissing, "atom " + std::to_string(i) + " has no exact entries");
    out.push_back(*spec.atoms[i].exact);
  }
  return out;
}

FactoredElement factor(const SquareMatrix& g) {
  auto kak = svd_kak(g);
  FactoredElement f{std::move(kak.k), Vector(kak.a.size()), std::move(kak.u)};
  for (std::size_t i = 0; i < kak.a.size(); ++i) f.log_a[i] = std::log(kak.a[i]);
  return f;
}

double contraction_epsilon(const SquareMatrix& g) {
  const auto f = factor(g);
  if (f.log_a.size() < 2) return 0.0;
  return std::exp(0.5 * (f.log_a[1] - f.log_a[0]));
}

ProjectivePoint attracting_point(const SquareMatrix& g) {
  const auto f = factor(g);
  if (f.log_a.size() > 1 && !(f.log_a[0] - f.log_a[1] > std::log1p(kGapTolerance)))
    fail(ErrorCode::DegenerateGap, "a1/a2 <= 1 + 1e-10");
  return ProjectivePoint(forward_player(f).v);
}

ProjectiveHyperplane repelling_hyperplane(const SquareMatrix& g) {
  const auto f = factor(g);
  if (f.log_a.size() > 1 && !(f.log_a[0] - f.log_a[1] > std::log1p(kGapTolerance)))
    fail(ErrorCode::DegenerateGap, "a1/a2 <= 1 + 1e-10");
  return ProjectiveHyperplane(forward_player(f).normal);
}

PingPongCertificate certify_pair(const SquareMatrix& g, const SquareMatrix& h,
                                 std::optional<double> eps, std::uint64_t seed) {
  if (g.dim() != h.dim()) fail(ErrorCode::DimensionMismatch, "g and h differ in dimension");
  return certify_pair(factor(g), factor(h), eps, seed);
}

PingPongCertificate certify_pair(const FactoredElement& g, const FactoredElement& h,
                                 std::optional<double> eps, std::uint64_t seed) {
  const std::size_t d = g.k.dim();
  if (d != h.k.dim()) fail(ErrorCode::DimensionMismatch, "g and h differ in dimension");
  if (d < 2) fail(ErrorCode::InvalidArgument, "dimension must be >= 2");
  if (eps && !(*eps > 0.0 && *eps < 1.0)) fail(ErrorCode::InvalidArgument, "eps must lie in (0, 1)");
  const std::array<PlayerData, 4> data{forward_player(g), inverse_player(g), forward_player(h),
                                       inverse_player(h)};
  const auto candidates = witness_candidates(d, seed);

  Vector tries;
  if (eps) {
    tries.push_back(*eps);
  } else {
    double worst_ratio = 0.0;
    for (const auto& p : data) worst_ratio = std::max(worst_ratio, p.ratio);
    // the floor keeps the contraction margin above kMarginFloor
    const double eps0 = 1.05 * std::sqrt(worst_ratio + kMarginFloor);
    for (int k = 0; k <= 20; ++k) {
      const double e = eps0 * std::pow(1.15, k);
      if (e <= kEpsCap) tries.push_back(e);
    }
    if (tries.empty()) tries.push_back(std::min(eps0, kEpsCap));
  }

  std::optional<PingPongCertificate> best;
  double best_margin = -std::numeric_limits<double>::infinity();
  for (double e : tries) {
    auto c = evaluate(data, e, candidates);
    if (c.passed) {
      best = std::move(c);
      break;
    }
    const double m = worst_margin(c);
    if (!best || m > best_margin) {
      best_margin = m;
      best = std::move(c);
    }
  }
  best->epsilons_tried = tries;
  best->seed = seed;
  best->note = best->passed ? kPassNote : kFailNote;
  return *best;
}

double recheck_margins(const PingPongCertificate& c) {
  const double eps = c.epsilon;
  double worst = 0.0;
  auto track = [&](double stored, double fresh) { worst = std::max(worst, std::abs(stored - fresh)); };
  for (const auto& p : c.players) {
    const double sep = point_hyperplane_distance(p.v, p.H);
    track(p.separation, sep);
    track(p.separation_margin, sep - 2.0 * eps);
    track(p.contraction_margin, eps * eps - p.ratio);
  }
  for (const auto& m : c.cross) {
    const double dist = point_hyperplane_distance(c.players[m.s].v, c.players[m.t].H);
    track(m.distance, dist);
    track(m.margin, dist - 2.0 * eps);
  }
  for (const auto& w : c.witnesses) {
    if (!w.point) continue;
    const double clearance = std::min(fubini_study(*w.point, c.players[w.s].v),
                                      point_hyperplane_distance(*w.point, c.players[w.t].H)) -
                             eps;
    track(w.clearance, clearance);
  }
  return worst;
}

RationalMatrix evaluate_word(const RationalMatrix& g, const RationalMatrix& h,
                             const std::string& word) {
  const RationalMatrix gi = g.inverse(), hi = h.inverse();
  RationalMatrix x = RationalMatrix::identity(g.dim());
  for (char c : word) {
    switch (c) {
      case 'a': x = x * g; break;
      case 'A': x = x * gi; break;
      case 'b': x = x * h; break;
      case 'B': x = x * hi; break;
      default: fail(ErrorCode::InvalidArgument, std::string("unknown letter ") + c);
    }
  }
  return x;
}

std::vector<std::string> word_oracle(const RationalMatrix& g, const RationalMatrix& h,
                                     std::size_t L) {
  if (L < 1 || L > 12) fail(ErrorCode::OutOfRange, "word length must lie in 1..12");
  if (g.dim() != h.dim()) fail(ErrorCode::DimensionMismatch, "g and h differ in dimension");
  const std::array<char, 4> letters{'a', 'A', 'b', 'B'};
  const std::array<RationalMatrix, 4> values{g, g.inverse(), h, h.inverse()};
  auto inverse_letter = [](std::size_t i) { return i ^ 1u; };

  std::array<std::vector<std::string>, 4> found;
  parallel_for(4, [&](std::size_t first) {
    std::string word(1, letters[first]);
    std::vector<RationalMatrix> prefix{values[first]};
    std::vector<std::size_t> last{first};
    std::vector<std::size_t> next{0};
    auto record = [&] {
      if (prefix.back().is_identity() || prefix.back().is_minus_identity())
        found[first].push_back(word);
    };
    record();
    // iterative DFS over reduced extensions
    while (!next.empty()) {
      if (word.size() == L || next.back() == 4) {
        word.pop_back();
        prefix.pop_back();
        last.pop_back();
        next.pop_back();
        continue;
      }
      const std::size_t c = next.back()++;
      if (c == inverse_letter(last.back())) continue;
      word.push_back(letters[c]);
      prefix.push_back(prefix.back() * values[c]);
      last.push_back(c);
      next.push_back(0);
      record();
    }
  });
  std::vector<std::string> out;
  for (auto& f : found) out.insert(out.end(), f.begin(), f.end());
  std::stable_sort(out.begin(), out.end(), [](const std::string& x, const std::string& y) {
    return x.size() < y.size();
  });
  return out;
}

FreenessResult freeness_experiment(const MeasureSpec& spec1, const MeasureSpec& spec2,
                                   std::size_t n, std::span<const std::size_t> grid,
                                   std::size_t pairs, std::uint64_t seed) {
  require_valid(spec1);
  require_valid(spec2);
  if (spec1.dim() != spec2.dim()) fail(ErrorCode::DimensionMismatch, "specs differ in dimension");
  if (pairs < 50) fail(ErrorCode::InvalidArgument, "pairs must be >= 50");
  if (n == 0) fail(ErrorCode::InvalidArgument, "n must be >= 1");
  if (!grid.empty()) check_grid(grid, kModule);
  const auto steps = union_grid(n, grid);
  const std::size_t d = spec1.dim();
  const bool exact = spec1.all_exact() && spec2.all_exact();
  const Sampler s1(spec1), s2(spec2);

  struct PairOutcome {
    std::vector<char> certified;
    Vector epsilon;
    std::vector<char> error;
    std::vector<std::pair<RationalMatrix, RationalMatrix>> exact_products;
  };
  std::vector<PairOutcome> outcome(pairs);
  parallel_for(pairs, [&](std::size_t p) {
    RandomStream r1(seed, stream_id({kRoleWalks, p, 0})), r2(seed, stream_id({kRoleWalks, p, 1}));
    KakTracker t1(d), t2(d);
    RationalMatrix e1 = RationalMatrix::identity(d), e2 = RationalMatrix::identity(d);
    auto& out = outcome[p];
    std::size_t step = 0;
    for (std::size_t target : steps) {
      for (; step < target; ++step) {
        const std::size_t i1 = s1.draw_index(r1), i2 = s2.draw_index(r2);
        t1.multiply_right(s1.atom(i1));
        t2.multiply_right(s2.atom(i2));
        if (exact) {
          e1 = e1 * *spec1.atoms[i1].exact;
          e2 = e2 * *spec2.atoms[i2].exact;
        }
      }
      bool ok = false, err = false;
      double eps = 0.0;
      try {
        const auto cert = certify_pair(FactoredElement{t1.k(), t1.log_a(), t1.u()},
                                       FactoredElement{t2.k(), t2.log_a(), t2.u()}, std::nullopt,
                                       stream_id({seed, p, target}));
        ok = cert.passed;
        eps = cert.epsilon;
      } catch (const Error&) {
        err = true;
      }
      out.certified.push_back(ok);
      out.error.push_back(err);
      out.epsilon.push_back(eps);
      if (exact) out.exact_products.emplace_back(e1, e2);
    }
  });

  FreenessResult res;
  res.n = n;
  std::vector<std::pair<std::size_t, std::size_t>> checks;  // (step index, pair)
  for (std::size_t k = 0; k < steps.size(); ++k) {
    FreenessPoint pt;
    pt.n = steps[k];
    pt.pairs = pairs;
    std::size_t certified_seen = 0;
    for (std::size_t p = 0; p < pairs; ++p) {
      const bool ok = outcome[p].certified[k];
      pt.pair_certified.push_back(ok);
      pt.pair_epsilon.push_back(outcome[p].epsilon[k]);
      pt.errors += outcome[p].error[k];
      if (ok) {
        if (exact && certified_seen % 10 == 0) checks.emplace_back(k, p);
        ++certified_seen;
        ++pt.certified;
      }
    }
    pt.fraction = static_cast<double>(pt.certified) / static_cast<double>(pairs);
    if (pt.n == n) res.certified_fraction = pt.fraction;
    res.series.push_back(std::move(pt));
  }

  if (exact) {
    std::vector<std::vector<std::string>> rel(checks.size());
    parallel_for(checks.size(), [&](std::size_t c) {
      const auto& [k, p] = checks[c];
      const auto& [x, y] = outcome[p].exact_products[k];
      rel[c] = word_oracle(x, y, 6);
    });
    res.spot_checks = checks.size();
    for (std::size_t c = 0; c < checks.size(); ++c)
      if (!rel[c].empty()) {
        ++res.spot_check_relations;
        res.relations_found.push_back("n=" + std::to_string(steps[checks[c].first]) + " pair " +
                                      std::to_string(checks[c].second) + ": " + rel[c].front());
      }
    if (res.spot_check_relations > 0)
      res.warnings.push_back("a certified pair has a relation: certification is unsound");
  } else {
    res.warnings.push_back("exact entries missing; word-oracle spot checks skipped");
  }

  if (!grid.empty()) {
    Vector failure;
    for (std::size_t g : grid) {
      const auto it = std::find_if(res.series.begin(), res.series.end(),
                                   [&](const FreenessPoint& q) { return q.n == g; });
      failure.push_back((static_cast<double>(it->pairs - it->certified) + 0.5) /
                        (static_cast<double>(it->pairs) + 1.0));
    }
    res.fit = fit_decay(grid, failure);
  }
  return res;
}

}  // namespace furstenberg
