#pragma once

#include <map>
#include <span>
#include <vector>

#include "specdec/dist.h"
#include "specdec/draft_tree.h"

namespace specdec {

class Rng;

// Exp(1) variates, one per token, drawn once per tree vertex whose children
// race. The same vector drives Q's draft arrivals and P's verification.
class RaceTable {
 public:
  explicit RaceTable(int alphabet_size) : alphabet_size_(alphabet_size) {}

  // Existing vector for `node`, or a freshly drawn one that is stored.
  const std::vector<double>& ensure_race(const TreeIndex& node, Rng& rng);

  const std::vector<double>* find(const TreeIndex& node) const;
  const std::vector<double>& at(const TreeIndex& node) const;
  std::size_t size() const noexcept { return races_.size(); }
  int alphabet_size() const noexcept { return alphabet_size_; }

 private:
  int alphabet_size_;
  std::map<TreeIndex, std::vector<double>> races_;
};

std::vector<double> fresh_race(int alphabet_size, Rng& rng);

// argmin over supported tokens of e_i / d_i; ties go to the smaller token.
Token winner(std::span<const double> e, const Dist& d);

// Gumbel-max form of the same race: argmax log d_i − log e_i.
Token gumbel_winner(std::span<const double> e, const Dist& d);

// The k earliest arrivals e_i / d_i over d's support, in arrival order.
std::vector<Token> arrivals(std::span<const double> e, const Dist& d, std::size_t k);

}  // namespace specdec
