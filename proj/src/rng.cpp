#include "furstenberg/rng.hpp"

#include <cmath>
#include <numbers>

namespace furstenberg {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t stream_id(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = 0x6a09e667f3bcc908ULL;
  for (std::uint64_t p : parts) {
    std::uint64_t s = h ^ p;
    h = splitmix64(s);
  }
  return h;
}

RandomStream::RandomStream(std::uint64_t master_seed, std::uint64_t stream) : stream_(stream) {
  std::uint64_t s = master_seed;
  const std::uint64_t a = splitmix64(s);
  s ^= stream;
  const std::uint64_t b = splitmix64(s);
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  engine_.seed(seq);
}

double RandomStream::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RandomStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double t = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(t);
  has_spare_ = true;
  return r * std::cos(t);
}

std::size_t RandomStream::below(std::size_t n) {
  // rejection keeps the draw exactly uniform
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do x = engine_();
  while (x >= limit);
  return static_cast<std::size_t>(x % n);
}

Vector random_unit_vector(RandomStream& rng, std::size_t dim) {
  Vector v(dim);
  double n = 0.0;
  while (n < 1e-8) {
    for (double& x : v) x = rng.normal();
    n = norm(v);
  }
  for (double& x : v) x /= n;
  return v;
}

SquareMatrix random_orthogonal(RandomStream& rng, std::size_t dim) {
  SquareMatrix g(dim);
  for (double& x : g.data()) x = rng.normal();
  return orthonormalize_columns(g);
}

}  // namespace furstenberg
