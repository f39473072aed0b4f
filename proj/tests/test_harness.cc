#include <cmath>
#include <filesystem>
#include <limits>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>

#include "doctest.h"
#include "specdec/drafting.h"
#include "specdec/error.h"
#include "specdec/harness.h"
#include "specdec/rng.h"

using namespace specdec;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.seed = 3;
  cfg.alphabet_size = 6;
  cfg.k_values = {1, 2, 3, 5};
  cfg.tokens_per_run = 300;
  cfg.runs = 4;
  cfg.entropy_samples = 2000;
  return cfg;
}

const ResultRow& row(const SweepResult& r, const std::string& method, const std::string& strategy, int k) {
  for (const ResultRow& x : r.rows) {
    if (x.method == method && x.strategy == strategy && x.k == k) return x;
  }
  FAIL("missing row");
  return r.rows.front();
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Takes every first child without looking at P: a broken verifier.
StepFn accept_always(Method) {
  return [](const MarkovSource& p, const MarkovSource& q, const Context& ctx, const DraftTree& tree, Rng& rng) {
    const DraftedTokens d = draft_gsd(q, ctx, tree, rng);
    StepResult r;
    int node = 0;
    while (!tree.children(node).empty()) {
      node = tree.children(node).front();
      r.emitted.push_back(d.token(node));
      r.accepted_nodes.push_back(tree.index(node));
    }
    r.emitted.push_back(rng.categorical(p.conditional(ctx, d.paths[static_cast<std::size_t>(node)]).mass()));
    r.accepted_count = static_cast<int>(r.accepted_nodes.size());
    return r;
  };
}

}  // namespace

TEST_CASE("strategy names") {
  CHECK(Strategy::parse("specinfer").specinfer_depth == 2);
  CHECK(Strategy::parse("specinfer:3").name() == "specinfer:3");
  CHECK(Strategy::parse("specinfer:3").tree_for(6) == topology_specinfer(3, 3));
  CHECK(Strategy::parse("specinfer").tree_for(1) == topology_batch(1));
  CHECK(Strategy::parse("specinfer").tree_for(2) == topology_specinfer(1, 1));
  CHECK_THROWS_AS(Strategy::parse("wide"), Error);
  CHECK_THROWS_AS(Strategy::parse("optimal").tree_for(3), Error);
}

TEST_CASE("config parsing") {
  const ExperimentConfig cfg = parse_config(R"({"seed": 9, "alphabet_size": 8, "k_values": [1, 2, 4],
                                                "methods": ["gsd"], "strategies": ["batch", "specinfer:1"]})");
  CHECK(cfg.seed == 9);
  CHECK(cfg.methods == std::vector<Method>{Method::kGsd});
  CHECK(cfg.strategies.size() == 2);
  CHECK(parse_config(to_json(cfg)).k_values == cfg.k_values);

  auto message = [](const std::string& text) -> std::string {
    try {
      parse_config(text);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kConfig);
      return e.what();
    }
    return "";
  };
  CHECK(message(R"({"sead": 1})").find("sead") != std::string::npos);
  CHECK(message(R"({"runs": 0})").find("runs") != std::string::npos);
  CHECK(message(R"({"k_values": [2, 1]})").find("k_values") != std::string::npos);
  CHECK(message(R"({"alphabet_size": 4})").find("k_values") != std::string::npos);
  CHECK(message(R"({"methods": ["fast"]})").find("methods") != std::string::npos);
  CHECK(message("[1]") != "");
}

TEST_CASE("CSV round trip and SVG structure") {
  std::vector<ResultRow> rows;
  for (int i = 0; i < 6; ++i) {
    ResultRow r;
    r.method = i % 2 ? "ersd" : "gsd";
    r.strategy = i < 2 ? "batch" : (i < 4 ? "sequence" : "optimal");
    r.k = i + 1;
    r.empirical_mean = 1.0 + 1.0 / 3.0 * i;
    r.empirical_stderr = 0.1 / (i + 7);
    r.theoretical = std::sqrt(2.0) + i;
    r.tunstall_bound = 5.0 / 7.0 + i;
    r.lemma_m_bound = i == 5 ? std::numeric_limits<double>::infinity() : 1e-300 * i + 3;
    r.m_star = 12345678901LL * i;
    r.h_r_bits = 0.1 + 0.2;
    r.kl_bits = 1e-17;
    rows.push_back(r);
  }
  const std::string csv = format_csv(rows);
  CHECK(csv.substr(0, csv.find('\n')) ==
        "method,strategy,k,empirical_mean,empirical_stderr,theoretical,tunstall_bound,lemma_m_bound,m_star,"
        "h_r_bits,kl_bits");
  CHECK(parse_csv(csv) == rows);

  const std::string svg = format_svg_plot(rows);
  const std::regex series("<polyline class=\"empirical\"");
  CHECK(std::distance(std::sregex_iterator(svg.begin(), svg.end(), series), std::sregex_iterator()) == 6);

  const auto dir = std::filesystem::temp_directory_path() / "specdec_test_empty";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  CHECK_THROWS_AS(emit_csv({}, dir / "x.csv"), Error);
  CHECK_FALSE(std::filesystem::exists(dir / "x.csv"));
  CHECK_THROWS_AS(emit_svg_plot({}, dir / "x.svg"), Error);
  CHECK_FALSE(std::filesystem::exists(dir / "x.svg"));
  CHECK_THROWS_AS(emit_csv(rows, dir / "missing" / "x.csv"), Error);
}

TEST_CASE("small sweep") {
  ExperimentConfig cfg = small_config();
  const SweepResult r = run_sweep(cfg);
  CHECK(r.rows.size() == 2 * 4 * 4);
  for (const ResultRow& x : r.rows) {
    CHECK(x.empirical_mean >= 1.0);
    CHECK(x.empirical_mean <= x.k + 1.0);
    CHECK(x.empirical_stderr >= 0.0);
    CHECK(x.theoretical <= x.tunstall_bound);
    if (x.strategy == "batch") CHECK(x.empirical_mean <= 2.0);
  }
  for (const char* m : {"gsd", "ersd"}) {
    CHECK(row(r, m, "sequence", 1).empirical_mean == row(r, m, "batch", 1).empirical_mean);
    CHECK(row(r, m, "sequence", 1).empirical_stderr == row(r, m, "batch", 1).empirical_stderr);
  }
  const SweepResult again = run_sweep(cfg);
  CHECK(format_csv(again.rows) == format_csv(r.rows));

  const auto dir = std::filesystem::temp_directory_path() / "specdec_test_sweep";
  std::filesystem::remove_all(dir);
  write_sweep_outputs(r, dir);
  for (const char* f : {"results.csv", "acceptance_by_index.csv", "metadata.json", "expected_generated.svg"}) {
    CHECK(std::filesystem::exists(dir / f));
  }
  CHECK(parse_csv(slurp(dir / "results.csv")).size() == r.rows.size());
}

TEST_CASE("identical models generate k + 1 tokens per step") {
  ExperimentConfig cfg = small_config();
  cfg.draft_mix = 0.0;
  cfg.strategies = {Strategy::parse("sequence"), Strategy::parse("batch")};
  const SweepResult r = run_sweep(cfg);
  for (const ResultRow& x : r.rows) {
    if (x.strategy == "sequence") {
      CHECK(x.empirical_mean == x.k + 1.0);
      CHECK(x.empirical_stderr == 0.0);
    } else {
      CHECK(x.empirical_mean == 2.0);
    }
  }
}

TEST_CASE("exactness suite and its sensitivity") {
  ExperimentConfig cfg = small_config();
  cfg.alphabet_size = 4;
  cfg.k_values = {1, 2, 3, 4};
  cfg.exactness_trials = 50000;
  const auto cells = exactness_suite(cfg);
  CHECK(cells.size() == 10);
  for (const ExactnessCell& c : cells) CHECK(c.tv < 0.02);

  const auto broken = exactness_suite(cfg, accept_always);
  double worst = 0.0;
  for (const ExactnessCell& c : broken) worst = std::max(worst, c.tv);
  CHECK(worst > 0.05);

  cfg.alphabet_size = 6;
  CHECK_THROWS_AS(exactness_suite(cfg), Error);
}
