#pragma once

// Random inputs for property tests.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "specdec/dist.h"
#include "specdec/rng.h"

namespace specdec::testing {

// Dirichlet(alpha) row; a few entries are zeroed now and then to exercise
// partial supports.
inline Dist random_dist(Rng& rng, int n, double alpha = 1.0, bool allow_zeros = true) {
  std::vector<double> w(static_cast<std::size_t>(n));
  for (double& x : w) x = rng.gamma(alpha);
  if (allow_zeros && n > 2 && rng.uniform() < 0.3) {
    w[static_cast<std::size_t>(rng.categorical(std::vector<double>(w.size(), 1.0)))] = 0.0;
  }
  return Dist::normalized(w);
}

inline int random_int(Rng& rng, int lo, int hi) {
  return lo + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
}

// Non-increasing vector of n values with sum at most 1.
inline std::vector<double> random_acceptance(Rng& rng, int n) {
  std::vector<double> w(static_cast<std::size_t>(n) + 1);
  for (double& x : w) x = rng.exponential();
  double total = 0.0;
  for (double x : w) total += x;
  std::vector<double> a(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = w[i] / total;
  std::sort(a.begin(), a.end(), std::greater<>());
  return a;
}

inline double tv(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return 0.5 * s;
}

}  // namespace specdec::testing
