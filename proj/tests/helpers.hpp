#pragma once

#include <cmath>
#include <utility>

#include "furstenberg/errors.hpp"
#include "furstenberg/linalg.hpp"
#include "furstenberg/rng.hpp"

namespace testing {

using furstenberg::RandomStream;
using furstenberg::SquareMatrix;
using furstenberg::Vector;

inline SquareMatrix gaussian_matrix(RandomStream& rng, std::size_t d) {
  SquareMatrix g(d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) g(i, j) = rng.normal();
  return g;
}

// Gaussian matrix rescaled to determinant 1 (rows swapped if needed)
inline SquareMatrix random_sl(RandomStream& rng, std::size_t d) {
  SquareMatrix g = gaussian_matrix(rng, d);
  double det = furstenberg::determinant(g);
  if (det < 0) {
    for (std::size_t j = 0; j < d; ++j) std::swap(g(0, j), g(1 % d, j));
    det = -det;
  }
  return (1.0 / std::pow(det, 1.0 / static_cast<double>(d))) * g;
}

inline double max_abs_diff(const SquareMatrix& a, const SquareMatrix& b) {
  return (a - b).max_abs();
}

template <class F>
furstenberg::ErrorCode error_code_of(F&& f) {
  try {
    f();
  } catch (const furstenberg::Error& e) {
    return e.code();
  }
  throw std::runtime_error("expected a furstenberg::Error");
}

}  // namespace testing
