#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "specdec/dist.h"

namespace specdec {

class Rng;

// Partial output x_{:n}; only the last `order` tokens matter to a source.
using Context = std::vector<Token>;

// Marks positions before the start of the sequence in a context window.
inline constexpr Token kStartSymbol = -1;

// Order-m Markov source over an alphabet of `alphabet_size` tokens.
//
// Rows are stored for every context reachable from the all-start context:
// windows of m symbols whose start padding is a (possibly empty) prefix.
// There are Σ_{j≤m} |Ω|^j of them; a window with j real tokens lives at
// offset Σ_{i<j}|Ω|^i plus the base-|Ω| value of those tokens.
class MarkovSource {
 public:
  MarkovSource(int order, int alphabet_size, std::vector<Dist> rows);

  int order() const noexcept { return order_; }
  int alphabet_size() const noexcept { return alphabet_size_; }
  std::size_t row_count() const noexcept { return rows_.size(); }

  const Dist& conditional(std::span<const Token> ctx) const;
  // Conditional after ctx || suffix, without materializing the concatenation.
  const Dist& conditional(std::span<const Token> ctx, std::span<const Token> suffix) const;
  const Dist& row(std::size_t index) const { return rows_.at(index); }

  // Row index for the window formed by the last `order` tokens of ctx.
  std::size_t context_index(std::span<const Token> ctx) const;

  // Inverse of context_index: the start-padded window of length `order`.
  std::vector<Token> window(std::size_t index) const;

  // Stationary law of the chain over full windows (no start padding),
  // returned over row indices; padded rows get weight 0.
  std::vector<double> stationary_row_weights() const;

 private:
  int order_;
  int alphabet_size_;
  std::vector<Dist> rows_;
  std::vector<std::size_t> offsets_;  // offsets_[j] = Σ_{i<j} |Ω|^i
};

// Rows drawn i.i.d. from a symmetric Dirichlet(concentration).
MarkovSource random_source(std::uint64_t seed, int order, int alphabet_size,
                           double concentration);

// Each row becomes (1 − mix)·p + mix·Dirichlet(concentration).
MarkovSource perturb_draft(const MarkovSource& p_src, double mix,
                           std::uint64_t seed, double concentration = 1.0);

std::vector<Token> autoregressive_sample(const MarkovSource& src,
                                         const Context& ctx, std::size_t n,
                                         Rng& rng);

// Expected row-wise KL(P‖Q) in bits under P's stationary law.
double stationary_kl_bits(const MarkovSource& p, const MarkovSource& q);

std::string to_json(const MarkovSource& src);
MarkovSource source_from_json(const std::string& text);
void save_source(const MarkovSource& src, const std::filesystem::path& path);
MarkovSource load_source(const std::filesystem::path& path);

}  // namespace specdec
