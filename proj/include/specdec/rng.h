#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace specdec {

// Seeded generator whose output is identical on every platform.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the
// standard. The standard <random> distributions are implementation defined,
// so every variate below is derived from raw 64-bit words by code in this
// repository.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on the open interval (0, 1), 53 bits of resolution.
  double uniform();

  // Exp(1) by inversion.
  double exponential();

  double normal();

  // Gamma(shape, 1); Marsaglia-Tsang with the shape < 1 boost.
  double gamma(double shape);

  // Index drawn proportionally to the non-negative weights. Weights need not
  // sum to one; at least one must be positive.
  int categorical(std::span<const double> weights);

 private:
  std::mt19937_64 engine_;
};

// Mixes a base seed with a stream id (splitmix64 finalizer) so that derived
// streams are decorrelated.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace specdec
