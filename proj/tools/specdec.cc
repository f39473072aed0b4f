// Command-line driver: sweeps, exactness checks, optimal trees and bounds.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "specdec/bounds.h"
#include "specdec/error.h"
#include "specdec/harness.h"
#include "specdec/tree_opt.h"

namespace {

using namespace specdec;

int cmd_sweep(const std::string& config_path, const std::string& out_dir) {
  const ExperimentConfig cfg = load_config(config_path);
  const SweepResult result = run_sweep(cfg);
  write_sweep_outputs(result, out_dir);
  std::cout << "wrote " << result.rows.size() << " rows to " << out_dir << "\n";
  for (const MethodSummary& m : result.methods) {
    std::cout << to_string(m.method) << ": H[R] = " << m.exact_entropy.bits << " bits ("
              << m.exact_entropy.estimator << "), a(1) = " << m.estimate.at(1) << "\n";
  }
  return 0;
}

int cmd_exactness(const std::string& config_path) {
  const ExperimentConfig cfg = load_config(config_path);
  const auto cells = exactness_suite(cfg);
  double worst = 0.0;
  std::printf("%-6s %-16s %10s %8s\n", "method", "strategy", "tv", "trials");
  for (const ExactnessCell& c : cells) {
    std::printf("%-6s %-16s %10.6f %8d\n", c.method.c_str(), c.strategy.c_str(), c.tv, c.trials);
    worst = std::max(worst, c.tv);
  }
  std::printf("max tv %.6f\n", worst);
  return worst < 0.01 ? 0 : 1;
}

int cmd_tree(const std::string& acceptance_path, int k) {
  const AcceptanceModel r = load_acceptance(acceptance_path);
  const ScoredTree best = optimal_tree(r, k);
  std::cout << "# expected accepted " << best.score << "\n" << serialize_tree(best.tree);
  return 0;
}

int cmd_bounds(const std::string& acceptance_path, int k, double epsilon, double grs_c,
               std::optional<double> kl_flag) {
  std::optional<double> kl;
  const AcceptanceModel r = load_acceptance(acceptance_path, &kl);
  if (kl_flag) kl = kl_flag;
  const BoundReport rep = make_bound_report(r, k, kl, epsilon, grs_c);
  std::cout << "k                   " << rep.k << "\n"
            << "alphabet_size       " << rep.alphabet_size << "\n"
            << "h_r_bits            " << rep.h_r_bits << "\n"
            << "tunstall_bound      " << rep.tunstall_bound << "\n"
            << "tunstall_tight      " << rep.tunstall_bound_tight << "\n"
            << "tunstall_leaves     " << tunstall_leaf_count(k, rep.alphabet_size) << "\n"
            << "codeword_bits       " << codeword_bits(k, rep.alphabet_size) << "\n"
            << "d                   " << rep.d << "\n";
  if (rep.lemma) {
    std::cout << "lemma_m_bound       " << rep.lemma->bound << "\n"
              << "m_star              " << rep.lemma->m_star << "\n";
  }
  if (rep.sandwich) {
    std::cout << "kl_bits             " << *rep.kl_bits << "\n"
              << "entropy_lower       " << rep.sandwich->lower << "\n"
              << "entropy_grs_upper   " << rep.sandwich->grs_upper << " (eps " << rep.epsilon << ", C "
              << rep.grs_constant << ")\n"
              << "entropy_pfr_upper   " << rep.sandwich->pfr_upper << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"speculative decoding experiments on Markov sources"};
  app.require_subcommand(1);

  std::string config;
  std::string out;
  auto* sweep = app.add_subcommand("sweep", "run the strategy/k sweep and write results");
  sweep->add_option("--config", config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  sweep->add_option("--out", out, "output directory")->required();

  auto* exact = app.add_subcommand("exactness", "compare emitted token laws with autoregressive sampling");
  exact->add_option("--config", config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);

  std::string acceptance;
  int k = 0;
  auto* tree = app.add_subcommand("tree", "print the optimal drafting tree");
  tree->add_option("--acceptance", acceptance, "acceptance model (JSON)")->required()->check(CLI::ExistingFile);
  tree->add_option("--k", k, "drafted tokens")->required()->check(CLI::NonNegativeNumber);

  double epsilon = 0.1;
  double grs_c = kDefaultGrsConstant;
  std::optional<double> kl;
  auto* bounds = app.add_subcommand("bounds", "print speed-up bounds for an acceptance model");
  bounds->add_option("--acceptance", acceptance, "acceptance model (JSON)")->required()->check(CLI::ExistingFile);
  bounds->add_option("--k", k, "drafted tokens")->required()->check(CLI::NonNegativeNumber);
  bounds->add_option("--epsilon", epsilon, "slack in the GRS entropy bound");
  bounds->add_option("--grs-c", grs_c, "additive constant in the GRS entropy bound");
  bounds->add_option("--kl", kl, "D[P||Q] in bits, overrides kl_bits from the acceptance file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sweep) return cmd_sweep(config, out);
    if (*exact) return cmd_exactness(config);
    if (*tree) return cmd_tree(acceptance, k);
    if (*bounds) return cmd_bounds(acceptance, k, epsilon, grs_c, kl);
  } catch (const specdec::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
