#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "specdec/bounds.h"
#include "specdec/markov_source.h"
#include "specdec/tree_opt.h"
#include "specdec/verifier.h"

namespace specdec {

struct Strategy {
  enum class Kind { kSequence, kBatch, kSpecInfer, kOptimal };
  Kind kind = Kind::kSequence;
  int specinfer_depth = 2;  // shared prefix length for kSpecInfer

  // "sequence", "batch", "optimal", "specinfer" (depth 2) or "specinfer:D".
  static Strategy parse(const std::string& name);
  std::string name() const;

  // Topology with k drafted tokens. SpecInfer shares min(depth, k−1) tokens
  // and spends the rest on alternatives after them; optimal uses `best`.
  DraftTree tree_for(int k, const DraftTree* best = nullptr) const;
};

struct ExperimentConfig {
  std::uint64_t seed = 20250612;
  int alphabet_size = 64;
  int markov_order = 1;
  double draft_mix = 0.3;
  double concentration = 0.5;
  std::vector<Method> methods{Method::kGsd, Method::kErsd};
  std::vector<Strategy> strategies{Strategy::parse("sequence"), Strategy::parse("batch"),
                                   Strategy::parse("specinfer"), Strategy::parse("optimal")};
  std::vector<int> k_values{1, 2, 3, 4, 6, 8, 12, 16, 24, 32};
  int tokens_per_run = 1000;
  int runs = 20;
  int context_length = 8;
  int entropy_samples = 20000;     // draws per context for H[R]
  int exactness_trials = 200000;
  int min_trials = 100;            // per-index floor when estimating R
  double epsilon = 0.1;            // GRS entropy bound slack
  double grs_constant = kDefaultGrsConstant;

  // Throws Config naming the offending field.
  void validate() const;
};

// JSON object with ExperimentConfig field names; missing keys keep their
// defaults, unknown keys are rejected.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string to_json(const ExperimentConfig& cfg);

struct ResultRow {
  std::string method;
  std::string strategy;
  int k = 0;
  double empirical_mean = 0.0;    // generated tokens per target evaluation
  double empirical_stderr = 0.0;
  double theoretical = 0.0;       // 1 + Σ R(j) under the estimated model
  double tunstall_bound = 0.0;
  double lemma_m_bound = 0.0;
  std::int64_t m_star = 0;
  double h_r_bits = 0.0;
  double kl_bits = 0.0;
  // Not part of the CSV.
  std::vector<double> marginal_acceptance;  // per sibling index
  std::uint64_t steps = 0;

  friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

struct MethodSummary {
  Method method = Method::kGsd;
  AcceptanceCounts counts;   // phase-1 tallies behind the estimate
  AcceptanceModel estimate;
  AcceptanceEntropy exact_entropy;
};

struct SweepResult {
  std::vector<ResultRow> rows;
  std::vector<MethodSummary> methods;
  double kl_bits = 0.0;
  ExperimentConfig config;
};

// Phase 1 estimates R per method from sequence and batch runs, phase 2 builds
// the optimal trees, phase 3 runs every (method, strategy, k) cell. Cells of
// one (method, k) share their random stream, so identical topologies give
// identical results.
SweepResult run_sweep(const ExperimentConfig& cfg);

// Random target and draft sources for a config.
struct SourcePair {
  MarkovSource p;
  MarkovSource q;
};
SourcePair make_sources(const ExperimentConfig& cfg);

struct ExactnessCell {
  std::string method;
  std::string strategy;
  double tv = 0.0;
  int trials = 0;
};

// Law of the first two emitted tokens against exhaustive autoregressive
// enumeration, for simple, sequence(3), batch(3), specinfer(3,2) and
// optimal(6). TooLarge above 5 tokens. `make_step` lets tests swap in a
// broken verifier.
std::vector<ExactnessCell> exactness_suite(const ExperimentConfig& cfg,
                                           const std::function<StepFn(Method)>& make_step = step_fn);

inline constexpr const char* kCsvHeader =
    "method,strategy,k,empirical_mean,empirical_stderr,theoretical,tunstall_bound,lemma_m_bound,m_star,"
    "h_r_bits,kl_bits";

std::string format_csv(const std::vector<ResultRow>& rows);
std::vector<ResultRow> parse_csv(const std::string& text);
void emit_csv(const std::vector<ResultRow>& rows, const std::filesystem::path& path);
std::string format_svg_plot(const std::vector<ResultRow>& rows);
void emit_svg_plot(const std::vector<ResultRow>& rows, const std::filesystem::path& path);

// results.csv, acceptance_by_index.csv, metadata.json and expected_generated.svg.
void write_sweep_outputs(const SweepResult& result, const std::filesystem::path& dir);

}  // namespace specdec
