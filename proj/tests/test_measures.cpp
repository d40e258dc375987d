#include <doctest.h>

#include <cmath>

#include "furstenberg/measures.hpp"
#include "helpers.hpp"

using namespace furstenberg;
using testing::error_code_of;

namespace {

bool mentions(const std::vector<std::string>& diagnostics, const std::string& text) {
  for (const auto& d : diagnostics)
    if (d.find(text) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST_CASE("validate accepts good specs") {
  CHECK(validate(dirac("d", SquareMatrix{{2, 0}, {0, 0.5}})).empty());
  CHECK(validate(sanov_spec()).empty());
  CHECK(validate(diagrot_spec()).empty());
}

TEST_CASE("validate reports violated invariants") {
  MeasureSpec weights;
  weights.atoms = {{SquareMatrix::identity(2), std::nullopt, 0.5},
                   {SquareMatrix::identity(2), std::nullopt, 0.6}};
  CHECK(mentions(validate(weights), "weights sum 1.1 ≠ 1"));

  const auto det2 = dirac("det2", SquareMatrix{{2, 0}, {0, 1}});
  CHECK(mentions(validate(det2), "determinant 2 ≠ 1"));

  CHECK(mentions(validate(MeasureSpec{}), "atom list is empty"));

  MeasureSpec mixed;
  mixed.atoms = {{SquareMatrix::identity(2), std::nullopt, 0.5},
                 {SquareMatrix::identity(3), std::nullopt, 0.5}};
  CHECK(mentions(validate(mixed), "dimension"));

  MeasureSpec negative;
  negative.atoms = {{SquareMatrix::identity(2), std::nullopt, -0.5},
                    {SquareMatrix::identity(2), std::nullopt, 1.5}};
  CHECK(mentions(validate(negative), "weight"));

  MeasureSpec nonfinite;
  nonfinite.atoms = {{SquareMatrix{{NAN, 0}, {0, 1}}, std::nullopt, 1.0}};
  CHECK(mentions(validate(nonfinite), "non-finite"));

  CHECK(error_code_of([&] { require_valid(det2); }) == ErrorCode::InvalidSpec);
}

TEST_CASE("sampling a single atom or a degenerate weight vector") {
  const SquareMatrix a{{2, 0}, {0, 0.5}};
  RandomStream rng(1, 1);
  const auto single = dirac("a", a);
  for (int i = 0; i < 10; ++i) CHECK(sample(single, rng) == a);

  MeasureSpec two;
  two.atoms = {{a, std::nullopt, 1.0}, {SquareMatrix::identity(2), std::nullopt, 0.0}};
  for (int i = 0; i < 100; ++i) CHECK(sample(two, rng) == a);
}

TEST_CASE("uniform two-atom sampling frequencies") {
  const auto spec = uniform_on("two", {SquareMatrix::identity(2), SquareMatrix{{2, 0}, {0, 0.5}}});
  const Sampler s(spec);
  RandomStream rng(99, 4);
  const int n = 100000;
  int first = 0;
  for (int i = 0; i < n; ++i) first += s.draw_index(rng) == 0;
  const double se = std::sqrt(0.25 / n);
  CHECK(std::abs(first / double(n) - 0.5) < 3 * se);
}

TEST_CASE("sample streams are reproducible") {
  const auto spec = sanov_spec();
  RandomStream a(4, 4), b(4, 4);
  for (int i = 0; i < 200; ++i) CHECK(sample(spec, a) == sample(spec, b));
}

TEST_CASE("inverse_measure examples") {
  const auto inv = inverse_measure(dirac("d", SquareMatrix{{2, 0}, {0, 0.5}}));
  CHECK(testing::max_abs_diff(inv.atoms[0].matrix, SquareMatrix{{0.5, 0}, {0, 2}}) < 1e-15);

  const auto sanov = sanov_spec();
  const auto sanov_inv = inverse_measure(sanov);
  CHECK(*sanov_inv.atoms[0].exact == RationalMatrix::parse(2, {"1", "-2", "0", "1"}));
  CHECK(sanov_inv.atoms[0].weight == sanov.atoms[0].weight);

  const auto twice = inverse_measure(sanov_inv);
  for (std::size_t i = 0; i < sanov.atoms.size(); ++i) {
    CHECK(*twice.atoms[i].exact == *sanov.atoms[i].exact);
    CHECK(twice.atoms[i].matrix == sanov.atoms[i].matrix);
    CHECK(twice.atoms[i].weight == sanov.atoms[i].weight);
  }
}

TEST_CASE("bundled specs have exact entries and the expected atoms") {
  const auto s = sanov_spec();
  CHECK(s.all_exact());
  CHECK(s.atoms.size() == 4);
  CHECK(s.dim() == 2);
  const auto d = diagrot_spec();
  CHECK(d.all_exact());
  CHECK(d.atoms[2].exact->determinant() == 1);
  CHECK_FALSE(hypothesis_notes(s).empty());
}
