#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace specdec {

// Tokens are 0-based indices into the alphabet Ω.
using Token = std::int32_t;

inline constexpr double kNormTolerance = 1e-9;
inline constexpr double kZeroMass = 1e-12;

// A probability vector over the token alphabet. Always normalized: every
// constructor renormalizes its input.
class Dist {
 public:
  Dist() = default;

  // Throws AllZero when the input carries no mass, BadParam on negative or
  // non-finite entries.
  static Dist normalized(std::vector<double> raw);
  static Dist uniform(std::size_t size);
  static Dist point(std::size_t size, Token t);

  std::size_t size() const noexcept { return mass_.size(); }
  double operator[](Token t) const { return mass_[static_cast<std::size_t>(t)]; }
  std::span<const double> mass() const noexcept { return mass_; }
  std::size_t support_size() const;

  friend bool operator==(const Dist&, const Dist&) = default;

 private:
  explicit Dist(std::vector<double> m) : mass_(std::move(m)) {}
  std::vector<double> mass_;
};

Dist normalize(std::vector<double> raw);

// ½ Σ |p_i − q_i|
double tv_distance(const Dist& p, const Dist& q);

// Σ p_i q_i / (p_i + q_i), terms with p_i + q_i = 0 contribute 0.
double hm_distance(const Dist& p, const Dist& q);

// Σ p_i log2(p_i / q_i); SupportViolation when q misses p's support.
double kl_divergence(const Dist& p, const Dist& q);

double entropy_bits(const Dist& p);
double entropy_bits(std::span<const double> probs);

// normalize(max(p − q, 0)). NoResidualMass when p ≤ q everywhere, which in
// exact arithmetic means acceptance was certain.
Dist residual_dist(const Dist& p_target, const Dist& q_draft);

// q with `rejected` zeroed and renormalized. Degenerate when q puts all its
// mass on `rejected`.
Dist without_replacement_update(const Dist& q, Token rejected);

}  // namespace specdec
