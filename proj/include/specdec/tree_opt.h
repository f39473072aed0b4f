#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "specdec/draft_tree.h"
#include "specdec/markov_source.h"
#include "specdec/verifier.h"

namespace specdec {

// 0-th order acceptance model: a[i-1] is the probability that the i-th
// sibling is the accepted one, given that its parent was reached. The
// acceptance probability of a vertex is the product along its path.
struct AcceptanceModel {
  std::vector<double> a;
  int alphabet_size = 0;  // fan-out cap used by the tree search

  // a(i) for 1-based i; 0 past the end of the table.
  double at(int sibling) const;
  double vertex_probability(const TreeIndex& index) const;
  // Entropy of (a(1), …, a(n), 1 − Σa), the residual term dropped when ≤ 0.
  double entropy_bits() const;
  // Throws BadParam unless entries lie in [0,1] and are non-increasing.
  void validate() const;
};

// Per-sibling-index acceptance tallies gathered while decoding.
struct AcceptanceCounts {
  std::vector<std::uint64_t> accepts;  // accepts[i-1]: sibling i was accepted
  std::vector<std::uint64_t> trials;   // trials[i-1]: a reached vertex had a child i

  // Tallies one verification round over `tree`.
  void add(const DraftTree& tree, const StepResult& step);
  void merge(const AcceptanceCounts& other);
};

struct ScoredTree {
  DraftTree tree;
  double score = 0.0;  // Σ vertex acceptance probabilities
  // Vertices with their acceptance probability, in the order they were added.
  std::vector<std::pair<TreeIndex, double>> per_node;
};

// Greedy best-first construction of the k-vertex drafting tree maximizing
// the expected number of accepted tokens. Equal probabilities go to the
// shorter path, then to the lexicographically smaller one.
ScoredTree optimal_tree(const AcceptanceModel& r, int k);

// Isotonic (non-increasing) regression by pool-adjacent-violators.
std::vector<double> pool_adjacent_violators(const std::vector<double>& values,
                                            const std::vector<double>& weights);

// a(i) = accepts/trials for the leading indices with at least `min_trials`
// trials, projected onto non-increasing sequences. NoData when nothing is left.
AcceptanceModel estimate_acceptance(const AcceptanceCounts& counts, int alphabet_size,
                                    std::uint64_t min_trials = 100);

double expected_accepted(const DraftTree& tree, const AcceptanceModel& r);

// Probability that `node` is accepted, by exhaustive enumeration of drafts
// and accept/reject branches for GSD, and by Monte Carlo over shared races
// for ERSD. Test oracle only: TooLarge beyond 6 tokens or depth 3.
double exact_acceptance_oracle(Method method, const MarkovSource& p, const MarkovSource& q,
                               const Context& ctx, const TreeIndex& node,
                               std::uint64_t seed = 0x5eed, std::size_t mc_draws = 1'000'000);

// Law of the accepted sibling index when every token in Q's support is
// drafted under one parent. Entry i-1 is index i; the extra last entry is
// the probability that nothing is accepted (0 when Q has full support).
std::vector<double> index_distribution_mc(Method method, const Dist& p, const Dist& q,
                                          std::size_t samples, Rng& rng);
// Exhaustive version for GSD, up to 8 tokens.
std::vector<double> index_distribution_exact_gsd(const Dist& p, const Dist& q);

struct AcceptanceEntropy {
  double bits = 0.0;
  std::string estimator;  // how the per-context laws were obtained
};

// H[R] = E_{x∼P} H[R(·|x)] over P's stationary law of contexts.
AcceptanceEntropy acceptance_entropy(Method method, const MarkovSource& p, const MarkovSource& q,
                                     std::size_t samples, std::uint64_t seed);

// {"alphabet_size": n, "a": [...], "kl_bits": optional}
std::string to_json(const AcceptanceModel& r, std::optional<double> kl_bits = std::nullopt);
AcceptanceModel acceptance_from_json(const std::string& text, std::optional<double>* kl_bits = nullptr);
AcceptanceModel load_acceptance(const std::filesystem::path& path, std::optional<double>* kl_bits = nullptr);

}  // namespace specdec
