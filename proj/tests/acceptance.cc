// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any fails. argv[1], when given, is the CLI binary used
// for the determinism check.

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "gen.h"
#include "oracles.h"
#include "specdec/bounds.h"
#include "specdec/dist.h"
#include "specdec/error.h"
#include "specdec/harness.h"
#include "specdec/markov_source.h"
#include "specdec/rng.h"
#include "specdec/tree_opt.h"
#include "specdec/verifier.h"

using namespace specdec;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void report(int id, const char* name, const std::function<Outcome()>& check) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("criterion %2d %-34s %s  %s [%.1fs]\n", id, name, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), f, a, b, c);
  return buf;
}

double simple_acceptance(Method m, const MarkovSource& p, const MarkovSource& q, int n, Rng& rng) {
  const DraftTree simple = topology_batch(1);
  long accepted = 0;
  for (int i = 0; i < n; ++i) accepted += speculative_step(m, p, q, {}, simple, rng).accepted_count;
  return static_cast<double>(accepted) / n;
}

struct RowPair {
  MarkovSource p;
  MarkovSource q;
};

std::vector<RowPair> random_pairs(std::uint64_t seed, int count) {
  Rng rng(seed);
  std::vector<RowPair> out;
  for (int i = 0; i < count; ++i) {
    const int n = specdec::testing::random_int(rng, 2, 16);
    const double alpha = 0.2 + 2.0 * rng.uniform();
    Dist p = specdec::testing::random_dist(rng, n, alpha);
    Dist q = specdec::testing::random_dist(rng, n, alpha);
    out.push_back({MarkovSource(0, n, {p}), MarkovSource(0, n, {q})});
  }
  return out;
}

Outcome exactness() {
  double worst = 0.0;
  std::string where;
  int cells = 0;
  for (std::uint64_t seed : {101u, 202u, 303u}) {
    ExperimentConfig cfg;
    cfg.seed = seed;
    cfg.alphabet_size = 4;
    cfg.k_values = {1, 2, 3, 4};
    cfg.draft_mix = seed == 202u ? 0.8 : 0.4;
    cfg.concentration = 1.0;
    cfg.exactness_trials = 200000;
    for (const ExactnessCell& c : exactness_suite(cfg)) {
      ++cells;
      if (c.tv > worst) {
        worst = c.tv;
        where = c.method + "/" + c.strategy;
      }
    }
  }
  return {worst < 0.01, fmt("%.0f cells, max TV %.5f", cells, worst) + " at " + where + " (< 0.01)"};
}

Outcome lemma_sandwich() {
  Rng rng(7);
  int inside = 0;
  int ordered = 0;
  double worst = 0.0;
  const auto pairs = random_pairs(1001, 100);
  for (const RowPair& pq : pairs) {
    const Dist& p = pq.p.row(0);
    const Dist& q = pq.q.row(0);
    const double lo = hm_distance(p, q);
    const double hi = 1.0 - tv_distance(p, q);
    ordered += hi >= lo;
    const double rate = simple_acceptance(Method::kErsd, pq.p, pq.q, 100000, rng);
    const bool ok = rate >= lo - 0.01 && rate <= hi + 0.01;
    inside += ok;
    worst = std::max({worst, lo - rate, rate - hi});
  }
  return {inside == 100 && ordered == 100,
          fmt("%.0f/100 rates inside [HM-0.01, 1-TV+0.01], 1-TV >= HM on %.0f/100, worst excursion %.4f", inside,
              ordered, worst)};
}

Outcome gsd_simple() {
  Rng rng(8);
  int ok = 0;
  double worst = 0.0;
  for (const RowPair& pq : random_pairs(1001, 100)) {
    const double target = 1.0 - tv_distance(pq.p.row(0), pq.q.row(0));
    const double rate = simple_acceptance(Method::kGsd, pq.p, pq.q, 100000, rng);
    worst = std::max(worst, std::abs(rate - target));
    ok += std::abs(rate - target) <= 0.01;
  }
  return {ok == 100, fmt("%.0f/100 pairs within 0.01 of 1-TV, worst %.4f", ok, worst)};
}

Outcome greedy_optimal() {
  Rng rng(9);
  int matches = 0;
  int cases = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = specdec::testing::random_int(rng, 1, 4);
    const AcceptanceModel r{specdec::testing::random_acceptance(rng, n), n};
    for (int k = 1; k <= 6; ++k) {
      const double greedy = optimal_tree(r, k).score;
      const double best = specdec::testing::best_score_exhaustive(r, k);
      // Same products summed in a different order can differ in the last bit.
      const double gap = std::abs(greedy - best);
      worst = std::max(worst, gap);
      matches += gap <= 1e-12 * best;
      ++cases;
    }
  }
  return {matches == cases, fmt("%.0f/%.0f (vector, k) cases equal to exhaustive max, worst gap %.1e", matches,
                                cases, worst)};
}

Outcome tunstall_upper(const SweepResult& sweep) {
  int ok = 0;
  double slack = 1e300;
  for (const ResultRow& r : sweep.rows) {
    ok += r.empirical_mean <= r.tunstall_bound;
    slack = std::min(slack, r.tunstall_bound - r.empirical_mean);
  }
  return {ok == static_cast<int>(sweep.rows.size()),
          fmt("%.0f/%.0f cells below the bound, smallest margin %.3f", ok, static_cast<double>(sweep.rows.size()),
              slack)};
}

Outcome lemma_upper(const SweepResult& sweep) {
  int ok = 0;
  int valid = 0;
  double slack = 1e300;
  for (const ResultRow& r : sweep.rows) {
    ok += r.empirical_mean <= r.lemma_m_bound;
    slack = std::min(slack, r.lemma_m_bound - r.empirical_mean);
  }
  // The reported m* respects the threshold and anything below it is refused.
  int checks = 0;
  for (const MethodSummary& m : sweep.methods) {
    for (int k : sweep.config.k_values) {
      const int d = optimal_tree(m.estimate, k).tree.max_sibling_index();
      const LemmaTerms t = lemma_terms(m.estimate, d);
      const LemmaMinimum best = min_lemma_m_bound(m.estimate, k, d);
      bool refused = true;
      const auto below = static_cast<std::int64_t>(std::ceil(t.min_m * (1.0 - 1e-12))) - 1;
      if (below >= 1) {
        try {
          lemma_m_bound(m.estimate, k, d, below);
          refused = false;
        } catch (const Error& e) {
          refused = e.code() == ErrorCode::kInvalidM;
        }
      }
      valid += refused && static_cast<double>(best.m_star) >= t.min_m * (1.0 - 1e-12);
      ++checks;
    }
  }
  return {ok == static_cast<int>(sweep.rows.size()) && valid == checks,
          fmt("%.0f/%.0f cells below the bound (smallest margin %.3f)", ok, static_cast<double>(sweep.rows.size()),
              slack) +
              fmt(", threshold enforced %.0f/%.0f", valid, checks)};
}

const ResultRow* find_row(const SweepResult& s, const std::string& method, const std::string& strategy, int k) {
  for (const ResultRow& r : s.rows) {
    if (r.method == method && r.strategy == strategy && r.k == k) return &r;
  }
  return nullptr;
}

Outcome figure_shapes(const SweepResult& sweep) {
  std::vector<std::string> problems;
  const auto& ks = sweep.config.k_values;
  double batch_max = 0.0;
  double worst_dominance = 1e300;
  for (const MethodSummary& ms : sweep.methods) {
    const std::string m(to_string(ms.method));
    for (int k : ks) {
      const ResultRow* batch = find_row(sweep, m, "batch", k);
      const ResultRow* opt = find_row(sweep, m, "optimal", k);
      if (!batch || !opt) return {false, "sweep is missing batch or optimal rows"};
      batch_max = std::max(batch_max, batch->empirical_mean);
      if (batch->empirical_mean >= 2.0) problems.push_back(m + " batch k=" + std::to_string(k) + " reaches 2");
      if (k < 3) continue;
      for (const char* other : {"sequence", "batch", "specinfer"}) {
        const ResultRow* o = find_row(sweep, m, other, k);
        if (!o) continue;
        const double margin = 2.0 * std::hypot(opt->empirical_stderr, o->empirical_stderr);
        const double lead = opt->empirical_mean - o->empirical_mean + margin;
        worst_dominance = std::min(worst_dominance, lead);
        if (lead < 0.0) problems.push_back(m + " optimal below " + other + " at k=" + std::to_string(k));
      }
    }
    // Per-token gain of the optimal tree between consecutive k values.
    double prev_theory = 1e300;
    double prev_emp = 1e300;
    double prev_se = 0.0;
    for (std::size_t i = 1; i < ks.size(); ++i) {
      const ResultRow* a = find_row(sweep, m, "optimal", ks[i - 1]);
      const ResultRow* b = find_row(sweep, m, "optimal", ks[i]);
      const double dk = ks[i] - ks[i - 1];
      const double theory = (b->theoretical - a->theoretical) / dk;
      const double emp = (b->empirical_mean - a->empirical_mean) / dk;
      const double se = std::hypot(a->empirical_stderr, b->empirical_stderr) / dk;
      if (theory > prev_theory * (1.0 + 1e-12)) problems.push_back(m + " model gain increases at k=" + std::to_string(ks[i]));
      if (emp > prev_emp + 2.0 * std::hypot(se, prev_se)) {
        problems.push_back(m + " empirical gain increases at k=" + std::to_string(ks[i]));
      }
      prev_theory = theory;
      prev_emp = emp;
      prev_se = se;
    }
  }
  const ResultRow* g1 = find_row(sweep, "gsd", "batch", ks.front());
  const ResultRow* e1 = find_row(sweep, "ersd", "batch", ks.front());
  if (g1 && e1 && ks.front() == 1 &&
      g1->empirical_mean < e1->empirical_mean - 2.0 * std::hypot(g1->empirical_stderr, e1->empirical_stderr)) {
    problems.push_back("gsd below ersd at batch k=1");
  }
  std::string detail = fmt("batch max %.4f (< 2), smallest optimal lead incl. 2-stderr %.4f", batch_max,
                           worst_dominance);
  for (const std::string& p : problems) detail += "; " + p;
  return {problems.empty(), detail};
}

Outcome tunstall_arithmetic() {
  int bad = 0;
  for (std::uint64_t n = 2; n <= 64; ++n) {
    for (std::uint64_t k = 0; k <= 100; ++k) {
      // Each expansion turns one leaf into n.
      std::uint64_t leaves = n;
      for (std::uint64_t i = 0; i < k; ++i) leaves += n - 1;
      const auto bits = static_cast<std::uint64_t>(std::bit_width(leaves - 1));
      bad += tunstall_leaf_count(k, n) != leaves || codeword_bits(k, n) != bits;
    }
  }
  return {bad == 0, fmt("%.0f mismatches over k in [0,100], |alphabet| in [2,64]", bad)};
}

Outcome complexity() {
  AcceptanceModel r{{0.45, 0.2, 0.1, 0.06, 0.04, 0.03, 0.02, 0.015, 0.01, 0.008}, 64};
  auto best_time = [&](int k, int reps) {
    double best = 1e300;
    for (int rep = 0; rep < reps; ++rep) {
      const auto start = std::chrono::steady_clock::now();
      const ScoredTree t = optimal_tree(r, k);
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      if (t.tree.size() != static_cast<std::size_t>(k)) return 1e300;
      best = std::min(best, secs);
    }
    return best;
  };
  const double small = best_time(10000, 20);
  const double large = best_time(100000, 7);
  const double ratio = large / small;
  return {large < 1.0 && ratio <= 15.0, fmt("k=1e5 %.3fs (< 1s), k=1e4 %.4fs, ratio %.1f (<= 15)", large, small, ratio)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism(const std::string& cli) {
  const fs::path work = fs::temp_directory_path() / "specdec_acceptance_determinism";
  fs::remove_all(work);
  fs::create_directories(work);
  const fs::path config = work / "config.json";
  {
    std::ofstream out(config);
    out << to_json(ExperimentConfig{});
  }
  if (cli.empty()) {
    // No binary given: compare two in-process sweeps instead.
    const SweepResult a = run_sweep(ExperimentConfig{});
    const SweepResult b = run_sweep(ExperimentConfig{});
    return {format_csv(a.rows) == format_csv(b.rows), "two in-process sweeps of the default config"};
  }
  for (const char* run : {"a", "b"}) {
    const std::string cmd = "\"" + cli + "\" sweep --config \"" + config.string() + "\" --out \"" +
                            (work / run).string() + "\" > /dev/null";
    if (std::system(cmd.c_str()) != 0) return {false, "sweep command failed: " + cmd};
  }
  const std::string a = slurp(work / "a" / "results.csv");
  const std::string b = slurp(work / "b" / "results.csv");
  return {!a.empty() && a == b, fmt("two CLI sweeps of the default config, results.csv %.0f bytes, identical", a.size())};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";

  report(1, "exactness", exactness);
  report(2, "race acceptance sandwich", lemma_sandwich);
  report(3, "greedy single-draft acceptance", gsd_simple);
  report(4, "greedy tree optimality", greedy_optimal);

  SweepResult sweep;
  const auto start = std::chrono::steady_clock::now();
  bool have_sweep = true;
  try {
    sweep = run_sweep(ExperimentConfig{});
  } catch (const std::exception& e) {
    std::printf("default sweep failed: %s\n", e.what());
    have_sweep = false;
  }
  std::printf("default sweep: %zu cells in %.1fs, KL %.3f bits\n", sweep.rows.size(),
              std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(), sweep.kl_bits);
  auto with_sweep = [&](Outcome (*f)(const SweepResult&)) {
    return [&, f]() -> Outcome { return have_sweep ? f(sweep) : Outcome{false, "no sweep"}; };
  };
  report(5, "expansion bound over the sweep", with_sweep(tunstall_upper));
  report(6, "residual-m bound over the sweep", with_sweep(lemma_upper));
  report(7, "strategy curve shapes", with_sweep(figure_shapes));
  report(8, "leaf count and codeword length", tunstall_arithmetic);
  report(9, "tree construction scaling", complexity);
  report(10, "sweep determinism", [&] { return determinism(cli); });

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
