#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "furstenberg/linalg.hpp"
#include "furstenberg/rational.hpp"
#include "furstenberg/rng.hpp"

namespace furstenberg {

struct Atom {
  SquareMatrix matrix;
  std::optional<RationalMatrix> exact;
  double weight = 0.0;
};

// Finitely supported probability measure on SL_d(R).
struct MeasureSpec {
  std::string label;
  std::vector<Atom> atoms;

  std::size_t dim() const { return atoms.empty() ? 0 : atoms.front().matrix.dim(); }
  bool all_exact() const;
};

// Empty on success; otherwise one human-readable line per violated invariant.
std::vector<std::string> validate(const MeasureSpec& spec);
// Standing hypotheses that are reported rather than checked.
std::vector<std::string> hypothesis_notes(const MeasureSpec& spec);
// Throws measures.InvalidSpec listing the diagnostics.
void require_valid(const MeasureSpec& spec);

// Draws atoms by weight. Holds a copy of the matrices, cheap to share read-only.
class Sampler {
 public:
  explicit Sampler(const MeasureSpec& spec);
  std::size_t draw_index(RandomStream& rng) const;
  const SquareMatrix& draw(RandomStream& rng) const { return matrices_[draw_index(rng)]; }
  const SquareMatrix& atom(std::size_t i) const { return matrices_[i]; }
  std::size_t size() const { return matrices_.size(); }
  std::size_t dim() const { return matrices_.front().dim(); }

 private:
  std::vector<SquareMatrix> matrices_;
  std::vector<double> cumulative_;
};

SquareMatrix sample(const MeasureSpec& spec, RandomStream& rng);
MeasureSpec inverse_measure(const MeasureSpec& spec);

// Uniform measure on the given exact matrices (floating entries derived).
MeasureSpec uniform_exact(std::string label, const std::vector<RationalMatrix>& matrices);
MeasureSpec uniform_on(std::string label, const std::vector<SquareMatrix>& matrices);
MeasureSpec dirac(std::string label, const SquareMatrix& g);
// Uniform on [[1,2],[0,1]], [[1,0],[2,1]] and their inverses.
MeasureSpec sanov_spec();
// Uniform on diag(2,1/2), diag(1/2,2) and the rational rotation [[3/5,-4/5],[4/5,3/5]]^{+-1}.
MeasureSpec diagrot_spec();

}  // namespace furstenberg
