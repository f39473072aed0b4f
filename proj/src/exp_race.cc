#include "specdec/exp_race.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "specdec/error.h"
#include "specdec/rng.h"

namespace specdec {

std::vector<double> fresh_race(int alphabet_size, Rng& rng) {
  std::vector<double> e(static_cast<std::size_t>(alphabet_size));
  for (double& v : e) v = rng.exponential();
  return e;
}

const std::vector<double>& RaceTable::ensure_race(const TreeIndex& node, Rng& rng) {
  auto it = races_.find(node);
  if (it != races_.end()) return it->second;
  return races_.emplace(node, fresh_race(alphabet_size_, rng)).first->second;
}

const std::vector<double>* RaceTable::find(const TreeIndex& node) const {
  auto it = races_.find(node);
  return it == races_.end() ? nullptr : &it->second;
}

const std::vector<double>& RaceTable::at(const TreeIndex& node) const {
  const auto* e = find(node);
  if (!e) throw Error(ErrorCode::kBadParam, "no race stored at vertex " + to_string(node));
  return *e;
}

Token winner(std::span<const double> e, const Dist& d) {
  if (e.size() != d.size()) throw Error(ErrorCode::kLengthMismatch, "race and distribution sizes differ");
  Token best = -1;
  double best_time = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < e.size(); ++i) {
    const double p = d.mass()[i];
    if (p <= 0.0) continue;
    const double t = e[i] / p;
    if (best < 0 || t < best_time) {
      best = static_cast<Token>(i);
      best_time = t;
    }
  }
  if (best < 0) throw Error(ErrorCode::kEmptySupport, "race over empty support");
  return best;
}

Token gumbel_winner(std::span<const double> e, const Dist& d) {
  if (e.size() != d.size()) throw Error(ErrorCode::kLengthMismatch, "race and distribution sizes differ");
  Token best = -1;
  double best_key = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < e.size(); ++i) {
    const double p = d.mass()[i];
    if (p <= 0.0) continue;
    const double key = std::log(p) - std::log(e[i]);
    if (best < 0 || key > best_key) {
      best = static_cast<Token>(i);
      best_key = key;
    }
  }
  if (best < 0) throw Error(ErrorCode::kEmptySupport, "race over empty support");
  return best;
}

std::vector<Token> arrivals(std::span<const double> e, const Dist& d, std::size_t k) {
  if (e.size() != d.size()) throw Error(ErrorCode::kLengthMismatch, "race and distribution sizes differ");
  std::vector<Token> support;
  std::vector<double> times(e.size(), 0.0);
  for (std::size_t i = 0; i < e.size(); ++i) {
    if (d.mass()[i] > 0.0) {
      support.push_back(static_cast<Token>(i));
      times[i] = e[i] / d.mass()[i];
    }
  }
  if (k > support.size()) {
    throw Error(ErrorCode::kInsufficientSupport, "asked for " + std::to_string(k) +
                                                     " arrivals from a support of " +
                                                     std::to_string(support.size()));
  }
  auto earlier = [&](Token a, Token b) {
    const double ta = times[static_cast<std::size_t>(a)];
    const double tb = times[static_cast<std::size_t>(b)];
    return ta < tb || (ta == tb && a < b);
  };
  std::partial_sort(support.begin(), support.begin() + static_cast<std::ptrdiff_t>(k),
                    support.end(), earlier);
  support.resize(k);
  return support;
}

}  // namespace specdec
