#pragma once

#include <gmpxx.h>

#include <cstddef>
#include <string>
#include <vector>

#include "furstenberg/linalg.hpp"

namespace furstenberg {

// Exact rational matrix. Group elements are expected to have determinant
// exactly 1; construction does not enforce it, measure validation does.
class RationalMatrix {
 public:
  RationalMatrix() = default;
  explicit RationalMatrix(std::size_t dim);
  RationalMatrix(std::size_t dim, std::vector<mpq_class> row_major);

  // entries as "p/q", integers or finite decimals ("0.25"), row-major
  static RationalMatrix parse(std::size_t dim, const std::vector<std::string>& entries);
  static RationalMatrix identity(std::size_t dim);

  std::size_t dim() const noexcept { return dim_; }
  const mpq_class& operator()(std::size_t i, std::size_t j) const { return a_[i * dim_ + j]; }
  mpq_class& operator()(std::size_t i, std::size_t j) { return a_[i * dim_ + j]; }

  mpq_class determinant() const;
  RationalMatrix inverse() const;
  SquareMatrix to_double() const;
  std::vector<std::string> to_strings() const;
  bool is_identity() const;
  bool is_minus_identity() const;

  friend RationalMatrix operator*(const RationalMatrix& x, const RationalMatrix& y);
  friend bool operator==(const RationalMatrix& x, const RationalMatrix& y);

 private:
  std::size_t dim_ = 0;
  std::vector<mpq_class> a_;
};

mpq_class parse_rational(const std::string& text);

}  // namespace furstenberg
