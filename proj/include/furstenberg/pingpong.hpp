#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "furstenberg/decay_fit.hpp"
#include "furstenberg/linalg.hpp"
#include "furstenberg/measures.hpp"
#include "furstenberg/rational.hpp"

namespace furstenberg {

// sqrt(a2/a1): the smallest eps for which g is eps-contracting
double contraction_epsilon(const SquareMatrix& g);
// k(g) e1, and the hyperplane with normal u(g)^T e1. Both need a1/a2 > 1 + 1e-10.
ProjectivePoint attracting_point(const SquareMatrix& g);
ProjectiveHyperplane repelling_hyperplane(const SquareMatrix& g);

// g = k diag(exp(log_a)) u, log_a non-increasing
struct FactoredElement {
  SquareMatrix k;
  Vector log_a;
  SquareMatrix u;
};

FactoredElement factor(const SquareMatrix& g);

// One of the four players g, g^-1, h, h^-1.
struct Player {
  std::string name;  // "g", "g^-1", "h", "h^-1"
  ProjectivePoint v;
  ProjectiveHyperplane H;
  double ratio = 1.0;               // a2/a1
  double contraction_margin = 0.0;  // eps^2 - ratio
  double separation = 0.0;          // delta(v, H)
  double separation_margin = 0.0;   // delta(v, H) - 2 eps
};

struct CrossMargin {
  std::size_t s = 0;  // index of the attracting player
  std::size_t t = 0;  // index of the repelling player
  double distance = 0.0;  // delta(v_s, H_t)
  double margin = 0.0;    // distance - 2 eps
};

// A point outside V_s (distance > eps from v_s) and outside the eps-neighbourhood
// of H_t, showing V_s u H_t is not the whole space.
struct Witness {
  std::size_t s = 0;
  std::size_t t = 0;
  std::optional<ProjectivePoint> point;
  double clearance = 0.0;  // min(delta(x, v_s), delta(x, H_t)) - eps; best candidate if none passes
  bool found = false;
};

struct PingPongCertificate {
  double epsilon = 0.0;
  std::vector<double> epsilons_tried;
  std::uint64_t seed = 0;
  std::vector<Player> players;
  std::vector<CrossMargin> cross;
  std::vector<Witness> witnesses;
  bool contraction_ok = false;  // condition 1
  bool separation_ok = false;   // condition 2
  bool cross_ok = false;        // condition 3
  bool witnesses_ok = false;    // condition 4
  bool passed = false;
  std::string note;
};

// margins at or below this count as failures
inline constexpr double kMarginFloor = 1e-7;

// Runs the ping-pong check on P(R^d). Without eps, tries the geometric eps grid
// and keeps the first passing value (or the one with the best worst margin).
PingPongCertificate certify_pair(const SquareMatrix& g, const SquareMatrix& h,
                                 std::optional<double> eps = std::nullopt, std::uint64_t seed = 0);
PingPongCertificate certify_pair(const FactoredElement& g, const FactoredElement& h,
                                 std::optional<double> eps = std::nullopt, std::uint64_t seed = 0);

// Recomputes every stored distance from the stored points and hyperplanes;
// returns the largest discrepancy.
double recheck_margins(const PingPongCertificate& cert);

// Reduced words over a = g, A = g^-1, b = h, B = h^-1 of length 1..L whose value
// is I or -I. "ab" means g*h.
std::vector<std::string> word_oracle(const RationalMatrix& g, const RationalMatrix& h, std::size_t L);
// exact entries of every atom; ExactEntriesMissing otherwise
std::vector<RationalMatrix> exact_atoms(const MeasureSpec& spec);
// exact value of a word
RationalMatrix evaluate_word(const RationalMatrix& g, const RationalMatrix& h, const std::string& word);

struct FreenessPoint {
  std::size_t n = 0;
  std::size_t pairs = 0;
  std::size_t certified = 0;
  std::size_t errors = 0;  // pairs whose certification raised
  double fraction = 0.0;
  std::vector<char> pair_certified;
  Vector pair_epsilon;
};

struct FreenessResult {
  std::size_t n = 0;
  double certified_fraction = 0.0;
  std::vector<FreenessPoint> series;
  // fit of the failure fraction (failures + 1/2) / (pairs + 1) against n
  DecayFit fit;
  std::size_t spot_checks = 0;
  std::size_t spot_check_relations = 0;  // certified pairs with a relation: must be 0
  std::vector<std::string> relations_found;
  std::vector<std::string> warnings;
};

FreenessResult freeness_experiment(const MeasureSpec& spec1, const MeasureSpec& spec2,
                                   std::size_t n, std::span<const std::size_t> grid,
                                   std::size_t pairs, std::uint64_t seed);

}  // namespace furstenberg
