#include "furstenberg/measures.hpp"

#include <cmath>
#include <cstdio>

#include "furstenberg/errors.hpp"

namespace furstenberg {

namespace {

constexpr std::string_view kModule = "measures";

std::string num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

}  // namespace

bool MeasureSpec::all_exact() const {
  if (atoms.empty()) return false;
  for (const auto& a : atoms)
    if (!a.exact) return false;
  return true;
}

std::vector<std::string> validate(const MeasureSpec& spec) {
  std::vector<std::string> diag;
  if (spec.atoms.empty()) {
    diag.push_back("atom list is empty");
    return diag;
  }
  const std::size_t d = spec.dim();
  double total = 0.0;
  for (std::size_t i = 0; i < spec.atoms.size(); ++i) {
    const Atom& a = spec.atoms[i];
    const std::string tag = "atom " + std::to_string(i) + ": ";
    if (!std::isfinite(a.weight) || a.weight < 0.0)
      diag.push_back(tag + "weight " + num(a.weight) + " is not a non-negative number");
    else
      total += a.weight;
    if (a.matrix.dim() != d || d == 0) {
      diag.push_back(tag + "dimension " + std::to_string(a.matrix.dim()) + " ≠ " +
                     std::to_string(d));
      continue;
    }
    if (!a.matrix.all_finite()) {
      diag.push_back(tag + "non-finite entry");
      continue;
    }
    if (!is_unimodular(a.matrix)) diag.push_back(tag + "determinant " + num(determinant(a.matrix)) + " ≠ 1");
    if (a.exact) {
      if (a.exact->dim() != d) {
        diag.push_back(tag + "exact entries have dimension " + std::to_string(a.exact->dim()));
        continue;
      }
      const mpq_class det = a.exact->determinant();
      if (det != 1) diag.push_back(tag + "exact determinant " + det.get_str() + " ≠ 1");
      const SquareMatrix approx = a.exact->to_double();
      const double scale = std::max(1.0, a.matrix.max_abs());
      if ((approx - a.matrix).max_abs() > 1e-12 * scale)
        diag.push_back(tag + "exact entries disagree with floating entries");
    }
  }
  if (std::abs(total - 1.0) > 1e-12) diag.push_back("weights sum " + num(total) + " ≠ 1");
  return diag;
}

std::vector<std::string> hypothesis_notes(const MeasureSpec& spec) {
  std::vector<std::string> notes;
  notes.push_back("exponential moment: automatic (finitely supported, " +
                  std::to_string(spec.atoms.size()) + " atoms)");
  notes.push_back("Zariski density / irreducibility and proximality of the generated group: "
                  "assumed, not checked");
  notes.push_back(spec.all_exact() ? "exact entries: present (word oracle available)"
                                   : "exact entries: absent (word oracle unavailable)");
  return notes;
}

void require_valid(const MeasureSpec& spec) {
  const auto diag = validate(spec);
  if (diag.empty()) return;
  std::string all;
  for (const auto& s : diag) all += (all.empty() ? "" : "; ") + s;
  throw Error(kModule, ErrorCode::InvalidSpec, all);
}

Sampler::Sampler(const MeasureSpec& spec) {
  require_valid(spec);
  double acc = 0.0;
  for (const auto& a : spec.atoms) {
    matrices_.push_back(a.matrix);
    acc += a.weight;
    cumulative_.push_back(acc);
  }
  for (double& c : cumulative_) c /= acc;
}

std::size_t Sampler::draw_index(RandomStream& rng) const {
  if (matrices_.size() == 1) {
    rng.next_u64();  // keep the stream position independent of the atom count
    return 0;
  }
  const double u = rng.uniform();
  for (std::size_t i = 0; i < cumulative_.size(); ++i)
    if (u < cumulative_[i]) return i;
  // u can only get here through rounding of the cumulative sums
  for (std::size_t i = cumulative_.size(); i-- > 0;)
    if (i == 0 || cumulative_[i] > cumulative_[i - 1]) return i;
  return 0;
}

SquareMatrix sample(const MeasureSpec& spec, RandomStream& rng) {
  return Sampler(spec).draw(rng);
}

MeasureSpec inverse_measure(const MeasureSpec& spec) {
  MeasureSpec out;
  out.label = spec.label + "^-1";
  for (const auto& a : spec.atoms) {
    Atom b;
    b.weight = a.weight;
    if (a.exact) {
      b.exact = a.exact->inverse();
      b.matrix = b.exact->to_double();
    } else {
      b.matrix = inverse(a.matrix);
    }
    out.atoms.push_back(std::move(b));
  }
  return out;
}

MeasureSpec uniform_exact(std::string label, const std::vector<RationalMatrix>& matrices) {
  MeasureSpec s;
  s.label = std::move(label);
  for (const auto& m : matrices)
    s.atoms.push_back({m.to_double(), m, 1.0 / static_cast<double>(matrices.size())});
  return s;
}

MeasureSpec uniform_on(std::string label, const std::vector<SquareMatrix>& matrices) {
  MeasureSpec s;
  s.label = std::move(label);
  for (const auto& m : matrices)
    s.atoms.push_back({m, std::nullopt, 1.0 / static_cast<double>(matrices.size())});
  return s;
}

MeasureSpec dirac(std::string label, const SquareMatrix& g) {
  MeasureSpec s;
  s.label = std::move(label);
  s.atoms.push_back({g, std::nullopt, 1.0});
  return s;
}

MeasureSpec sanov_spec() {
  const auto a = RationalMatrix::parse(2, {"1", "2", "0", "1"});
  const auto b = RationalMatrix::parse(2, {"1", "0", "2", "1"});
  return uniform_exact("sanov", {a, b, a.inverse(), b.inverse()});
}

MeasureSpec diagrot_spec() {
  const auto a = RationalMatrix::parse(2, {"2", "0", "0", "1/2"});
  const auto r = RationalMatrix::parse(2, {"3/5", "-4/5", "4/5", "3/5"});
  return uniform_exact("diagrot", {a, a.inverse(), r, r.inverse()});
}

}  // namespace furstenberg
