#pragma once

#include <cstdint>
#include <optional>

#include "specdec/tree_opt.h"

namespace specdec {

// Upper bounds on the expected number of generated tokens per target
// evaluation, from the Tunstall-code view of the optimal drafting tree.
// All logarithms are base 2.

// (log|Ω| + log(k+1)) / H[R]. ZeroEntropy when h_r_bits ≤ 0.
double tunstall_bound(int k, int alphabet_size, double h_r_bits);
// log(k(|Ω|−1) + |Ω|) / H[R], never larger than tunstall_bound.
double tunstall_bound_tight(int k, int alphabet_size, double h_r_bits);

// Leaves of a Tunstall tree after k expansions and the codeword length that
// indexes them.
std::uint64_t tunstall_leaf_count(std::uint64_t k, std::uint64_t alphabet_size);
std::uint64_t codeword_bits(std::uint64_t k, std::uint64_t alphabet_size);

struct LemmaTerms {
  double p_res = 0.0;        // 1 − Σ_{i≤d} a(i), clamped at 0
  double h_res_bits = 0.0;   // H[(a(1), …, a(d), p_res)]
  double min_m = 0.0;        // p_res / min_{i≤d} a(i)
};

LemmaTerms lemma_terms(const AcceptanceModel& r, int d);

// (log(d+m) + log(k+1)) / (H[R^res] + p_res log m). InvalidM when m is
// below p_res / min_{i≤d} a(i) (or m < 1); BadParam when d is out of range.
double lemma_m_bound(const AcceptanceModel& r, int k, int d, std::int64_t m);

struct LemmaMinimum {
  double bound = 0.0;
  std::int64_t m_star = 0;
};

inline constexpr std::int64_t kLemmaScanCap = 1'000'000;

// Exact scan over every valid integer m up to kLemmaScanCap.
LemmaMinimum min_lemma_m_bound(const AcceptanceModel& r, int k, int d);

struct EntropySandwich {
  double lower = 0.0;      // D[P‖Q]
  double grs_upper = 0.0;  // D + (1+ε) log(D+1) + C
  double pfr_upper = 0.0;  // D + log(D+1) + 4
};

inline constexpr double kDefaultGrsConstant = 4.0;

EntropySandwich entropy_sandwich(double kl_bits, double epsilon,
                                 double grs_constant = kDefaultGrsConstant);

struct BoundReport {
  int k = 0;
  int alphabet_size = 0;
  double h_r_bits = 0.0;
  double tunstall_bound = 0.0;
  double tunstall_bound_tight = 0.0;
  int d = 0;  // largest sibling index used by the optimal tree
  std::optional<LemmaMinimum> lemma;
  std::optional<double> kl_bits;
  std::optional<EntropySandwich> sandwich;
  double epsilon = 0.0;
  double grs_constant = kDefaultGrsConstant;
};

// Bounds for k drafted tokens under acceptance model r. The Tunstall bound
// uses r's own entropy; the sandwich is filled only when kl_bits is given.
BoundReport make_bound_report(const AcceptanceModel& r, int k, std::optional<double> kl_bits,
                              double epsilon, double grs_constant = kDefaultGrsConstant);

}  // namespace specdec
