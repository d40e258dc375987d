#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include "furstenberg/linalg.hpp"

namespace furstenberg {

std::uint64_t splitmix64(std::uint64_t& state);
// Folds a list of integers (master seed, role, indices...) into one stream id.
std::uint64_t stream_id(std::initializer_list<std::uint64_t> parts);

// One independent random stream per (master seed, stream id). Conversions to
// doubles are done here rather than through <random> distributions so that
// output is identical across standard library implementations.
class RandomStream {
 public:
  RandomStream(std::uint64_t master_seed, std::uint64_t stream);

  std::uint64_t next_u64() { return engine_(); }
  double uniform();                 // [0, 1)
  double normal();                  // standard normal
  std::size_t below(std::size_t n); // uniform on {0..n-1}
  std::uint64_t stream() const noexcept { return stream_; }

 private:
  std::mt19937_64 engine_;
  std::uint64_t stream_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

Vector random_unit_vector(RandomStream& rng, std::size_t dim);
// Haar-distributed orthogonal matrix via QR of a Gaussian matrix
SquareMatrix random_orthogonal(RandomStream& rng, std::size_t dim);

}  // namespace furstenberg
