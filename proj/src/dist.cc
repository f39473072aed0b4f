#include "specdec/dist.h"

#include <cmath>
#include <string>

#include "specdec/error.h"

namespace specdec {

namespace {

void require_same_length(const Dist& p, const Dist& q) {
  if (p.size() != q.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                std::to_string(p.size()) + " vs " + std::to_string(q.size()));
  }
}

}  // namespace

Dist Dist::normalized(std::vector<double> raw) {
  double total = 0.0;
  for (double v : raw) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::kBadParam, "negative or non-finite mass");
    }
    total += v;
  }
  if (total < kZeroMass) {
    throw Error(ErrorCode::kAllZero, "input sums to " + std::to_string(total));
  }
  for (double& v : raw) v /= total;
  return Dist(std::move(raw));
}

Dist Dist::uniform(std::size_t size) {
  return Dist(std::vector<double>(size, 1.0 / static_cast<double>(size)));
}

Dist Dist::point(std::size_t size, Token t) {
  std::vector<double> m(size, 0.0);
  m.at(static_cast<std::size_t>(t)) = 1.0;
  return Dist(std::move(m));
}

std::size_t Dist::support_size() const {
  std::size_t n = 0;
  for (double v : mass_) n += v > 0.0 ? 1 : 0;
  return n;
}

Dist normalize(std::vector<double> raw) { return Dist::normalized(std::move(raw)); }

double tv_distance(const Dist& p, const Dist& q) {
  require_same_length(p, q);
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p.mass()[i] - q.mass()[i]);
  return 0.5 * s;
}

double hm_distance(const Dist& p, const Dist& q) {
  require_same_length(p, q);
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double a = p.mass()[i];
    const double b = q.mass()[i];
    if (a + b > 0.0) s += a * b / (a + b);
  }
  return s;
}

double kl_divergence(const Dist& p, const Dist& q) {
  require_same_length(p, q);
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double a = p.mass()[i];
    if (a <= 0.0) continue;
    const double b = q.mass()[i];
    if (b <= 0.0) {
      throw Error(ErrorCode::kSupportViolation,
                  "q has no mass on token " + std::to_string(i));
    }
    s += a * std::log2(a / b);
  }
  // Rounding can leave a tiny negative value for p ≈ q.
  return s < 0.0 ? 0.0 : s;
}

double entropy_bits(std::span<const double> probs) {
  double h = 0.0;
  for (double v : probs) {
    if (v > 0.0) h -= v * std::log2(v);
  }
  return h < 0.0 ? 0.0 : h;
}

double entropy_bits(const Dist& p) { return entropy_bits(p.mass()); }

Dist residual_dist(const Dist& p_target, const Dist& q_draft) {
  require_same_length(p_target, q_draft);
  std::vector<double> r(p_target.size());
  double total = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    r[i] = std::max(p_target.mass()[i] - q_draft.mass()[i], 0.0);
    total += r[i];
  }
  if (total < kZeroMass) {
    throw Error(ErrorCode::kNoResidualMass, "p <= q entrywise");
  }
  return Dist::normalized(std::move(r));
}

Dist without_replacement_update(const Dist& q, Token rejected) {
  if (rejected < 0 || static_cast<std::size_t>(rejected) >= q.size()) {
    throw Error(ErrorCode::kBadParam, "token out of range");
  }
  if (q[rejected] >= 1.0 - kZeroMass) {
    throw Error(ErrorCode::kDegenerate,
                "all mass on rejected token " + std::to_string(rejected));
  }
  std::vector<double> m(q.mass().begin(), q.mass().end());
  m[static_cast<std::size_t>(rejected)] = 0.0;
  return Dist::normalized(std::move(m));
}

}  // namespace specdec
