#include "specdec/bounds.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "specdec/error.h"

namespace specdec {

namespace {

void check_tunstall_args(int k, int alphabet_size, double h_r_bits) {
  if (k < 0 || alphabet_size < 2) throw Error(ErrorCode::kBadParam, "need k >= 0 and |Ω| >= 2");
  if (!(h_r_bits > 0.0)) throw Error(ErrorCode::kZeroEntropy, "acceptance entropy must be positive");
}

}  // namespace

double tunstall_bound(int k, int alphabet_size, double h_r_bits) {
  check_tunstall_args(k, alphabet_size, h_r_bits);
  return (std::log2(static_cast<double>(alphabet_size)) + std::log2(static_cast<double>(k) + 1.0)) /
         h_r_bits;
}

double tunstall_bound_tight(int k, int alphabet_size, double h_r_bits) {
  check_tunstall_args(k, alphabet_size, h_r_bits);
  const auto leaves = static_cast<double>(tunstall_leaf_count(static_cast<std::uint64_t>(k),
                                                              static_cast<std::uint64_t>(alphabet_size)));
  return std::log2(leaves) / h_r_bits;
}

std::uint64_t tunstall_leaf_count(std::uint64_t k, std::uint64_t alphabet_size) {
  if (alphabet_size < 2) throw Error(ErrorCode::kBadParam, "|Ω| must be >= 2");
  return alphabet_size + k * (alphabet_size - 1);
}

std::uint64_t codeword_bits(std::uint64_t k, std::uint64_t alphabet_size) {
  const std::uint64_t leaves = tunstall_leaf_count(k, alphabet_size);
  // ⌈log2 leaves⌉ in integers.
  std::uint64_t bits = 0;
  while ((std::uint64_t{1} << bits) < leaves) ++bits;
  return bits;
}

LemmaTerms lemma_terms(const AcceptanceModel& r, int d) {
  if (d < 1 || static_cast<std::size_t>(d) > r.a.size()) {
    throw Error(ErrorCode::kBadParam, "d must lie in [1, " + std::to_string(r.a.size()) + "]");
  }
  LemmaTerms t;
  std::vector<double> probs(r.a.begin(), r.a.begin() + d);
  double total = 0.0;
  double smallest = std::numeric_limits<double>::infinity();
  for (double v : probs) {
    total += v;
    smallest = std::min(smallest, v);
  }
  t.p_res = std::max(0.0, 1.0 - total);
  probs.push_back(t.p_res);
  t.h_res_bits = entropy_bits(probs);
  if (t.p_res == 0.0) {
    t.min_m = 0.0;
  } else {
    t.min_m = smallest > 0.0 ? t.p_res / smallest : std::numeric_limits<double>::infinity();
  }
  return t;
}

namespace {

double lemma_bound_from_terms(const LemmaTerms& t, int k, int d, std::int64_t m) {
  if (k < 0) throw Error(ErrorCode::kBadParam, "k must be >= 0");
  if (m < 1 || static_cast<double>(m) < t.min_m * (1.0 - 1e-12)) {
    throw Error(ErrorCode::kInvalidM, "m = " + std::to_string(m) + " below the validity threshold " +
                                          std::to_string(t.min_m));
  }
  const double md = static_cast<double>(m);
  const double denom = t.h_res_bits + t.p_res * std::log2(md);
  if (!(denom > 0.0)) throw Error(ErrorCode::kZeroEntropy, "degenerate acceptance model");
  return (std::log2(static_cast<double>(d) + md) + std::log2(static_cast<double>(k) + 1.0)) / denom;
}

}  // namespace

double lemma_m_bound(const AcceptanceModel& r, int k, int d, std::int64_t m) {
  return lemma_bound_from_terms(lemma_terms(r, d), k, d, m);
}

LemmaMinimum min_lemma_m_bound(const AcceptanceModel& r, int k, int d) {
  const LemmaTerms t = lemma_terms(r, d);
  LemmaMinimum best{std::numeric_limits<double>::infinity(), 0};
  if (!std::isfinite(t.min_m)) return best;
  std::int64_t m = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor(t.min_m)));
  if (static_cast<double>(m) < t.min_m * (1.0 - 1e-12)) ++m;
  for (; m <= kLemmaScanCap; ++m) {
    double b;
    try {
      b = lemma_bound_from_terms(t, k, d, m);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kZeroEntropy) throw;
      continue;
    }
    if (b < best.bound) best = {b, m};
    // With p_res = 0 the denominator no longer depends on m and the
    // numerator grows, so m = threshold is already the minimum.
    if (t.p_res == 0.0) break;
  }
  return best;
}

EntropySandwich entropy_sandwich(double kl_bits, double epsilon, double grs_constant) {
  if (!(kl_bits >= 0.0)) throw Error(ErrorCode::kBadParam, "KL must be >= 0");
  if (!(epsilon > 0.0)) throw Error(ErrorCode::kBadParam, "epsilon must be > 0");
  const double log_term = std::log2(kl_bits + 1.0);
  return {kl_bits, kl_bits + (1.0 + epsilon) * log_term + grs_constant, kl_bits + log_term + 4.0};
}

BoundReport make_bound_report(const AcceptanceModel& r, int k, std::optional<double> kl_bits,
                              double epsilon, double grs_constant) {
  BoundReport rep;
  rep.k = k;
  rep.alphabet_size = r.alphabet_size;
  rep.h_r_bits = r.entropy_bits();
  rep.tunstall_bound = tunstall_bound(k, r.alphabet_size, rep.h_r_bits);
  rep.tunstall_bound_tight = tunstall_bound_tight(k, r.alphabet_size, rep.h_r_bits);
  rep.d = optimal_tree(r, k).tree.max_sibling_index();
  if (static_cast<std::size_t>(rep.d) <= r.a.size()) rep.lemma = min_lemma_m_bound(r, k, rep.d);
  rep.kl_bits = kl_bits;
  rep.epsilon = epsilon;
  rep.grs_constant = grs_constant;
  if (kl_bits) rep.sandwich = entropy_sandwich(*kl_bits, epsilon, grs_constant);
  return rep;
}

}  // namespace specdec
