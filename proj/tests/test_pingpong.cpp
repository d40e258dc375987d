#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "furstenberg/pingpong.hpp"
#include "helpers.hpp"

using namespace furstenberg;
using testing::error_code_of;

namespace {

const SquareMatrix kDiag4{{4, 0}, {0, 0.25}};

SquareMatrix rotated_diag4() {
  const auto r = SquareMatrix::rotation(std::numbers::pi / 4);
  return r * kDiag4 * inverse(r);
}

RationalMatrix rat(std::vector<std::string> entries) {
  return RationalMatrix::parse(2, entries);
}

}  // namespace

TEST_CASE("contraction_epsilon examples") {
  CHECK(contraction_epsilon(kDiag4) == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(contraction_epsilon(SquareMatrix::rotation(0.3)) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(contraction_epsilon(SquareMatrix{{1, 2}, {0, 1}}) ==
        doctest::Approx(std::numbers::sqrt2 - 1).epsilon(1e-14));
}

TEST_CASE("attracting point and repelling hyperplane examples") {
  const auto e1 = ProjectivePoint::basis(2, 0);
  CHECK(fubini_study(attracting_point(kDiag4), e1) < 1e-15);
  CHECK(fubini_study(ProjectivePoint(repelling_hyperplane(kDiag4).normal()), e1) < 1e-15);
  CHECK(point_hyperplane_distance(ProjectivePoint::basis(2, 1), repelling_hyperplane(kDiag4)) < 1e-15);

  const SquareMatrix a{{1, 2}, {0, 1}};
  const auto v = attracting_point(a);
  const auto h = repelling_hyperplane(a);
  CHECK(fubini_study(v, ProjectivePoint::at_angle(std::numbers::pi / 8)) < 1e-12);
  CHECK(fubini_study(ProjectivePoint(h.normal()), ProjectivePoint::at_angle(3 * std::numbers::pi / 8)) < 1e-12);
  CHECK(point_hyperplane_distance(v, h) == doctest::Approx(std::sin(std::numbers::pi / 4)).epsilon(1e-12));

  CHECK(error_code_of([] { attracting_point(SquareMatrix::rotation(0.4)); }) == ErrorCode::DegenerateGap);
  CHECK(error_code_of([] { repelling_hyperplane(SquareMatrix::identity(3)); }) == ErrorCode::DegenerateGap);
}

TEST_CASE("contraction lemma on random elements") {
  RandomStream rng(61, 0);
  int tested = 0;
  for (int t = 0; t < 500; ++t) {
    const std::size_t d = 2 + t % 3;
    Vector stretch(d, 1.0);
    stretch[0] = 30.0;
    stretch[d - 1] = 1.0 / 30.0;
    const auto g = testing::random_sl(rng, d) * SquareMatrix::diagonal(stretch);
    const double ce = contraction_epsilon(g);
    if (!(ce < 0.9)) continue;
    const double eps = std::min(0.99, ce * (1.0 + 0.5 * rng.uniform()));
    const auto v = attracting_point(g);
    const auto h = repelling_hyperplane(g);
    const ProjectivePoint x(random_unit_vector(rng, d));
    if (point_hyperplane_distance(x, h) < eps) continue;
    CHECK(fubini_study(act_projective(g, x), v) <= eps + 1e-9);
    ++tested;
  }
  CHECK(tested > 100);
}

TEST_CASE("inverse duality of the singular data") {
  RandomStream rng(62, 0);
  for (int t = 0; t < 100; ++t) {
    const std::size_t d = 2 + t % 3;
    const auto g = testing::random_sl(rng, d);
    const auto f = factor(g);
    const auto fi = factor(inverse(g));
    CHECK(fi.log_a[0] == doctest::Approx(-f.log_a[d - 1]).epsilon(1e-9).scale(1.0));
    if (fi.log_a[0] - fi.log_a[1] < 1e-3) continue;
    const ProjectivePoint last_row(f.u.row(d - 1));
    CHECK(fubini_study(attracting_point(inverse(g)), last_row) < 1e-9);
  }
}

TEST_CASE("certify_pair: identity pair fails") {
  const auto id = SquareMatrix::identity(2);
  const auto c = certify_pair(id, id);
  CHECK_FALSE(c.passed);
  CHECK_FALSE(c.contraction_ok);
}

TEST_CASE("certify_pair: diag(4,1/4) and its 45 degree conjugate pass at eps 0.26") {
  const auto c = certify_pair(kDiag4, rotated_diag4(), 0.26);
  CHECK(c.passed);
  CHECK(c.contraction_ok);
  CHECK(c.separation_ok);
  CHECK(c.cross_ok);
  CHECK(c.witnesses_ok);
  REQUIRE(c.players.size() == 4);
  CHECK(c.players[0].contraction_margin == doctest::Approx(0.0676 - 1.0 / 16).epsilon(1e-12));
  for (const auto& p : c.players) CHECK(std::abs(p.separation - 1.0) < 1e-9);
  CHECK(c.cross.size() == 8);
  for (const auto& m : c.cross) CHECK(m.distance >= std::numbers::sqrt2 / 2 - 1e-9);
  for (const auto& w : c.witnesses) {
    CHECK(w.found);
    CHECK(w.clearance > 0.0);
  }
  CHECK(recheck_margins(c) <= 1e-10);

  const auto automatic = certify_pair(kDiag4, rotated_diag4());
  CHECK(automatic.passed);
  CHECK(automatic.epsilon < 0.45);
}

TEST_CASE("certify_pair: the Sanov generators fail at every grid eps") {
  const SquareMatrix a{{1, 2}, {0, 1}}, b{{1, 0}, {2, 1}};
  const auto c = certify_pair(a, b);
  CHECK_FALSE(c.passed);
  CHECK_FALSE(c.separation_ok);
  CHECK(c.epsilons_tried.front() > std::numbers::sqrt2 - 1);
  for (double e : c.epsilons_tried) CHECK_FALSE(certify_pair(a, b, e).passed);
  CHECK(recheck_margins(c) <= 1e-10);
}

TEST_CASE("certify_pair argument checks") {
  CHECK(error_code_of([] { certify_pair(kDiag4, kDiag4, 1.5); }) == ErrorCode::InvalidArgument);
  CHECK(error_code_of([] { certify_pair(kDiag4, SquareMatrix::identity(3)); }) ==
        ErrorCode::DimensionMismatch);
}

TEST_CASE("word_oracle examples") {
  const auto d = rat({"2", "0", "0", "1/2"});
  const auto found = word_oracle(d, d.inverse(), 2);
  REQUIRE_FALSE(found.empty());
  CHECK(found.front() == "ab");

  const auto id = RationalMatrix::identity(2);
  const auto trivial = word_oracle(id, id, 1);
  CHECK(trivial == std::vector<std::string>{"a", "A", "b", "B"});

  CHECK(word_oracle(rat({"1", "2", "0", "1"}), rat({"1", "0", "2", "1"}), 8).empty());

  CHECK(error_code_of([&] { word_oracle(id, id, 13); }) == ErrorCode::OutOfRange);
  CHECK(error_code_of([] { exact_atoms(dirac("f", kDiag4)); }) == ErrorCode::ExactEntriesMissing);
}

TEST_CASE("word_oracle finds -I and evaluate_word reads left to right") {
  const auto quarter = rat({"0", "-1", "1", "0"});
  const auto found = word_oracle(quarter, RationalMatrix::identity(2), 2);
  CHECK(std::find(found.begin(), found.end(), "aa") != found.end());
  const auto a = rat({"1", "2", "0", "1"}), b = rat({"1", "0", "2", "1"});
  CHECK(evaluate_word(a, b, "ab") == a * b);
  CHECK(evaluate_word(a, b, "aA").is_identity());
  CHECK(evaluate_word(a, b, "Bb").is_identity());
}

TEST_CASE("freeness: equal deterministic walks never certify") {
  const auto spec = dirac("d4", kDiag4);
  const std::vector<std::size_t> grid{4, 6, 8, 10};
  const auto r = freeness_experiment(spec, spec, 10, grid, 50, 1);
  CHECK(r.certified_fraction == 0.0);
  for (const auto& p : r.series) CHECK(p.certified == 0);
}

TEST_CASE("freeness: Sanov walks certify with high probability") {
  const std::vector<std::size_t> grid{20, 30, 40, 50, 60};
  const auto r = freeness_experiment(sanov_spec(), sanov_spec(), 60, grid, 100, 7);
  CHECK(r.certified_fraction >= 0.9);
  CHECK(r.spot_checks > 0);
  CHECK(r.spot_check_relations == 0);
  CHECK(r.relations_found.empty());
  CHECK(error_code_of([&] { freeness_experiment(sanov_spec(), sanov_spec(), 60, grid, 10, 7); }) ==
        ErrorCode::InvalidArgument);
}

TEST_CASE("soundness: every certified exact pair has no short relation") {
  const auto spec = sanov_spec();
  const auto atoms = exact_atoms(spec);
  const Sampler sampler(spec);
  RandomStream rng(63, 0);
  int certified = 0;
  for (int t = 0; t < 40; ++t) {
    const std::size_t n = 4 + t % 6;
    std::array<RationalMatrix, 2> exact{RationalMatrix::identity(2), RationalMatrix::identity(2)};
    for (auto& x : exact)
      for (std::size_t s = 0; s < n; ++s) x = x * atoms[sampler.draw_index(rng)];
    const auto c = certify_pair(exact[0].to_double(), exact[1].to_double());
    if (!c.passed) continue;
    ++certified;
    CHECK(word_oracle(exact[0], exact[1], 6).empty());
  }
  CHECK(certified > 0);
}
