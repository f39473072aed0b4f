#include "specdec/harness.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"
#include "specdec/error.h"
#include "specdec/rng.h"

namespace specdec {

namespace {

using nlohmann::json;

// Stream ids for derive_seed; one per independent random consumer.
constexpr std::uint64_t kTargetStream = 1;
constexpr std::uint64_t kDraftStream = 2;
constexpr std::uint64_t kContextStream = 3;
constexpr std::uint64_t kEntropyStream = 10;
constexpr std::uint64_t kEstimateStream = 100;
constexpr std::uint64_t kCellStream = 1'000'000;

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw Error(ErrorCode::kIo, "cannot format number");
  return std::string(buf, end);
}

double parse_double(const std::string& s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  double v = 0.0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || end != s.data() + s.size()) {
    throw Error(ErrorCode::kParse, "bad number '" + s + "'");
  }
  return v;
}

struct CellOutcome {
  std::vector<int> generated;  // tokens emitted per step
  AcceptanceCounts counts;
};

CellOutcome run_cell(const StepFn& step, const SourcePair& src, const DraftTree& tree,
                     const ExperimentConfig& cfg, std::uint64_t seed) {
  CellOutcome out;
  Rng rng(seed);
  for (int run = 0; run < cfg.runs; ++run) {
    Context ctx = autoregressive_sample(src.p, {}, static_cast<std::size_t>(cfg.context_length), rng);
    int produced = 0;
    while (produced < cfg.tokens_per_run) {
      const StepResult r = step(src.p, src.q, ctx, tree, rng);
      out.generated.push_back(static_cast<int>(r.emitted.size()));
      out.counts.add(tree, r);
      ctx.insert(ctx.end(), r.emitted.begin(), r.emitted.end());
      produced += static_cast<int>(r.emitted.size());
    }
  }
  return out;
}

std::pair<double, double> mean_stderr(const std::vector<int>& xs) {
  const auto n = static_cast<double>(xs.size());
  double mean = 0.0;
  for (int x : xs) mean += x;
  mean /= n;
  double ss = 0.0;
  for (int x : xs) ss += (x - mean) * (x - mean);
  const double var = xs.size() > 1 ? ss / (n - 1.0) : 0.0;
  return {mean, std::sqrt(var / n)};
}

std::size_t method_slot(Method m) { return m == Method::kGsd ? 0 : 1; }

}  // namespace

Strategy Strategy::parse(const std::string& name) {
  Strategy s;
  if (name == "sequence") {
    s.kind = Kind::kSequence;
  } else if (name == "batch") {
    s.kind = Kind::kBatch;
  } else if (name == "optimal") {
    s.kind = Kind::kOptimal;
  } else if (name == "specinfer") {
    s.kind = Kind::kSpecInfer;
  } else if (name.rfind("specinfer:", 0) == 0) {
    s.kind = Kind::kSpecInfer;
    const std::string tail = name.substr(10);
    int depth = -1;
    auto [end, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), depth);
    if (ec != std::errc{} || end != tail.data() + tail.size() || depth < 0) {
      throw Error(ErrorCode::kConfig, "strategies: bad specinfer depth in '" + name + "'");
    }
    s.specinfer_depth = depth;
  } else {
    throw Error(ErrorCode::kConfig, "strategies: unknown strategy '" + name + "'");
  }
  return s;
}

std::string Strategy::name() const {
  switch (kind) {
    case Kind::kSequence: return "sequence";
    case Kind::kBatch: return "batch";
    case Kind::kOptimal: return "optimal";
    case Kind::kSpecInfer:
      return specinfer_depth == 2 ? "specinfer" : "specinfer:" + std::to_string(specinfer_depth);
  }
  return "unknown";
}

DraftTree Strategy::tree_for(int k, const DraftTree* best) const {
  switch (kind) {
    case Kind::kSequence: return topology_sequence(k);
    case Kind::kBatch: return topology_batch(k);
    case Kind::kSpecInfer: {
      const int depth = std::min(specinfer_depth, k - 1);
      return topology_specinfer(k - depth, depth);
    }
    case Kind::kOptimal:
      if (!best || static_cast<int>(best->size()) != k) {
        throw Error(ErrorCode::kBadParam, "optimal strategy needs a tree with k vertices");
      }
      return *best;
  }
  throw Error(ErrorCode::kBadParam, "unknown strategy");
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw Error(ErrorCode::kConfig, field + ": " + why);
  };
  if (alphabet_size < 2) fail("alphabet_size", "must be >= 2");
  if (markov_order < 0) fail("markov_order", "must be >= 0");
  if (!(draft_mix >= 0.0 && draft_mix <= 1.0)) fail("draft_mix", "must lie in [0,1]");
  if (!(concentration > 0.0)) fail("concentration", "must be > 0");
  if (methods.empty()) fail("methods", "must not be empty");
  if (strategies.empty()) fail("strategies", "must not be empty");
  if (k_values.empty()) fail("k_values", "must not be empty");
  for (std::size_t i = 0; i < k_values.size(); ++i) {
    if (k_values[i] < 1) fail("k_values", "entries must be >= 1");
    if (i > 0 && k_values[i] <= k_values[i - 1]) fail("k_values", "must be strictly ascending");
  }
  const bool has_batch = std::any_of(strategies.begin(), strategies.end(),
                                     [](const Strategy& s) { return s.kind == Strategy::Kind::kBatch; });
  if (has_batch && k_values.back() > alphabet_size) {
    fail("k_values", "batch drafting needs k <= alphabet_size");
  }
  if (tokens_per_run < 1) fail("tokens_per_run", "must be >= 1");
  if (runs < 1) fail("runs", "must be >= 1");
  if (context_length < 0) fail("context_length", "must be >= 0");
  if (entropy_samples < 1) fail("entropy_samples", "must be >= 1");
  if (exactness_trials < 1) fail("exactness_trials", "must be >= 1");
  if (min_trials < 1) fail("min_trials", "must be >= 1");
  if (!(epsilon > 0.0)) fail("epsilon", "must be > 0");
}

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfig, std::string("not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::kConfig, "top level must be an object");
  ExperimentConfig cfg;
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "seed") cfg.seed = value.get<std::uint64_t>();
      else if (key == "alphabet_size") cfg.alphabet_size = value.get<int>();
      else if (key == "markov_order") cfg.markov_order = value.get<int>();
      else if (key == "draft_mix") cfg.draft_mix = value.get<double>();
      else if (key == "concentration") cfg.concentration = value.get<double>();
      else if (key == "methods") {
        cfg.methods.clear();
        for (const auto& m : value) cfg.methods.push_back(parse_method(m.get<std::string>()));
      } else if (key == "strategies") {
        cfg.strategies.clear();
        for (const auto& s : value) cfg.strategies.push_back(Strategy::parse(s.get<std::string>()));
      } else if (key == "k_values") cfg.k_values = value.get<std::vector<int>>();
      else if (key == "tokens_per_run") cfg.tokens_per_run = value.get<int>();
      else if (key == "runs") cfg.runs = value.get<int>();
      else if (key == "context_length") cfg.context_length = value.get<int>();
      else if (key == "entropy_samples") cfg.entropy_samples = value.get<int>();
      else if (key == "exactness_trials") cfg.exactness_trials = value.get<int>();
      else if (key == "min_trials") cfg.min_trials = value.get<int>();
      else if (key == "epsilon") cfg.epsilon = value.get<double>();
      else if (key == "grs_constant") cfg.grs_constant = value.get<double>();
      else throw Error(ErrorCode::kConfig, "unknown key '" + key + "'");
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kConfig, key + ": " + e.what());
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kConfig) throw;
      throw Error(ErrorCode::kConfig, key + ": " + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string to_json(const ExperimentConfig& cfg) {
  json j;
  j["seed"] = cfg.seed;
  j["alphabet_size"] = cfg.alphabet_size;
  j["markov_order"] = cfg.markov_order;
  j["draft_mix"] = cfg.draft_mix;
  j["concentration"] = cfg.concentration;
  std::vector<std::string> methods;
  for (Method m : cfg.methods) methods.emplace_back(to_string(m));
  j["methods"] = methods;
  std::vector<std::string> strategies;
  for (const Strategy& s : cfg.strategies) strategies.push_back(s.name());
  j["strategies"] = strategies;
  j["k_values"] = cfg.k_values;
  j["tokens_per_run"] = cfg.tokens_per_run;
  j["runs"] = cfg.runs;
  j["context_length"] = cfg.context_length;
  j["entropy_samples"] = cfg.entropy_samples;
  j["exactness_trials"] = cfg.exactness_trials;
  j["min_trials"] = cfg.min_trials;
  j["epsilon"] = cfg.epsilon;
  j["grs_constant"] = cfg.grs_constant;
  return j.dump(2);
}

SourcePair make_sources(const ExperimentConfig& cfg) {
  MarkovSource p = random_source(derive_seed(cfg.seed, kTargetStream), cfg.markov_order,
                                 cfg.alphabet_size, cfg.concentration);
  MarkovSource q = perturb_draft(p, cfg.draft_mix, derive_seed(cfg.seed, kDraftStream), cfg.concentration);
  return {std::move(p), std::move(q)};
}

SweepResult run_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  SweepResult result;
  result.config = cfg;
  const SourcePair src = make_sources(cfg);
  result.kl_bits = stationary_kl_bits(src.p, src.q);
  const int k_max = cfg.k_values.back();

  for (Method method : cfg.methods) {
    const std::uint64_t slot = method_slot(method);
    MethodSummary summary;
    summary.method = method;

    // Phase 1: per-index acceptance from sequence and batch drafting.
    const StepFn step = step_fn(method);
    const DraftTree seq = topology_sequence(k_max);
    const DraftTree batch = topology_batch(std::min(k_max, cfg.alphabet_size));
    summary.counts.merge(
        run_cell(step, src, seq, cfg, derive_seed(cfg.seed, kEstimateStream + 10 * slot)).counts);
    summary.counts.merge(
        run_cell(step, src, batch, cfg, derive_seed(cfg.seed, kEstimateStream + 10 * slot + 1)).counts);
    summary.estimate = estimate_acceptance(summary.counts, cfg.alphabet_size,
                                           static_cast<std::uint64_t>(cfg.min_trials));
    summary.exact_entropy = acceptance_entropy(method, src.p, src.q,
                                               static_cast<std::size_t>(cfg.entropy_samples),
                                               derive_seed(cfg.seed, kEntropyStream + slot));

    for (int k : cfg.k_values) {
      // Phase 2: optimal tree for this k under the estimated model.
      const ScoredTree best = optimal_tree(summary.estimate, k);
      const int d = best.tree.max_sibling_index();
      const LemmaMinimum lemma = min_lemma_m_bound(summary.estimate, k, d);
      // Zero acceptance entropy (Q ≡ P) makes every draft certain: no finite bound.
      const double tunstall = summary.exact_entropy.bits > 0.0
                                  ? tunstall_bound(k, cfg.alphabet_size, summary.exact_entropy.bits)
                                  : std::numeric_limits<double>::infinity();
      const std::uint64_t cell_seed = derive_seed(cfg.seed, kCellStream + 100'000 * slot +
                                                                static_cast<std::uint64_t>(k));

      // Phase 3: every strategy at this k, on a shared random stream.
      for (const Strategy& strategy : cfg.strategies) {
        const DraftTree tree = strategy.tree_for(k, &best.tree);
        tree.check_fan_out(cfg.alphabet_size);
        const CellOutcome cell = run_cell(step, src, tree, cfg, cell_seed);
        ResultRow row;
        row.method = std::string(to_string(method));
        row.strategy = strategy.name();
        row.k = k;
        std::tie(row.empirical_mean, row.empirical_stderr) = mean_stderr(cell.generated);
        row.theoretical = 1.0 + expected_accepted(tree, summary.estimate);
        row.tunstall_bound = tunstall;
        row.lemma_m_bound = lemma.bound;
        row.m_star = lemma.m_star;
        row.h_r_bits = summary.exact_entropy.bits;
        row.kl_bits = result.kl_bits;
        row.steps = cell.generated.size();
        for (std::size_t i = 0; i < cell.counts.trials.size(); ++i) {
          row.marginal_acceptance.push_back(
              cell.counts.trials[i] ? static_cast<double>(cell.counts.accepts[i]) /
                                          static_cast<double>(cell.counts.trials[i])
                                    : 0.0);
        }
        result.rows.push_back(std::move(row));
      }
    }
    result.methods.push_back(std::move(summary));
  }
  return result;
}

std::vector<ExactnessCell> exactness_suite(const ExperimentConfig& cfg,
                                           const std::function<StepFn(Method)>& make_step) {
  cfg.validate();
  if (cfg.alphabet_size > 5) {
    throw Error(ErrorCode::kTooLarge, "exactness enumeration needs alphabet_size <= 5");
  }
  const int n = cfg.alphabet_size;
  const SourcePair src = make_sources(cfg);
  Rng ctx_rng(derive_seed(cfg.seed, kContextStream));
  const Context ctx = autoregressive_sample(src.p, {}, static_cast<std::size_t>(cfg.context_length), ctx_rng);

  // Exhaustive autoregressive law of (x1, x2).
  std::vector<double> exact(static_cast<std::size_t>(n * n), 0.0);
  const Dist& first = src.p.conditional(ctx);
  for (Token a = 0; a < n; ++a) {
    Context next = ctx;
    next.push_back(a);
    const Dist& second = src.p.conditional(next);
    for (Token b = 0; b < n; ++b) {
      exact[static_cast<std::size_t>(a * n + b)] = first[a] * second[b];
    }
  }

  // Optimal tree from the exact greedy index law at this context.
  std::vector<double> law = index_distribution_exact_gsd(first, src.q.conditional(ctx));
  law.pop_back();
  AcceptanceModel model{pool_adjacent_violators(law, std::vector<double>(law.size(), 1.0)), n};

  std::vector<std::pair<std::string, DraftTree>> topologies;
  topologies.emplace_back("simple", topology_batch(1));
  topologies.emplace_back("sequence(3)", topology_sequence(3));
  if (n >= 3) {
    topologies.emplace_back("batch(3)", topology_batch(3));
    topologies.emplace_back("specinfer(3,2)", topology_specinfer(3, 2));
  }
  topologies.emplace_back("optimal(6)", optimal_tree(model, 6).tree);

  std::vector<ExactnessCell> cells;
  std::uint64_t stream = 0;
  for (Method method : cfg.methods) {
    const StepFn step = make_step(method);
    for (const auto& [name, tree] : topologies) {
      Rng rng(derive_seed(cfg.seed, kCellStream + 7'000'000 + stream++));
      std::vector<double> hist(exact.size(), 0.0);
      for (int t = 0; t < cfg.exactness_trials; ++t) {
        const Generation g = generate(step, src.p, src.q, ctx, tree, 2, rng);
        hist[static_cast<std::size_t>(g.tokens[0] * n + g.tokens[1])] += 1.0;
      }
      double tv = 0.0;
      for (std::size_t i = 0; i < hist.size(); ++i) {
        tv += std::abs(hist[i] / cfg.exactness_trials - exact[i]);
      }
      cells.push_back({std::string(to_string(method)), name, 0.5 * tv, cfg.exactness_trials});
    }
  }
  return cells;
}

std::string format_csv(const std::vector<ResultRow>& rows) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const ResultRow& r : rows) {
    out += r.method + ',' + r.strategy + ',' + std::to_string(r.k) + ',' + format_double(r.empirical_mean) +
           ',' + format_double(r.empirical_stderr) + ',' + format_double(r.theoretical) + ',' +
           format_double(r.tunstall_bound) + ',' + format_double(r.lemma_m_bound) + ',' +
           std::to_string(r.m_star) + ',' + format_double(r.h_r_bits) + ',' + format_double(r.kl_bits) + '\n';
  }
  return out;
}

std::vector<ResultRow> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw Error(ErrorCode::kParse, "CSV header mismatch");
  }
  std::vector<ResultRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (f.size() != 11) throw Error(ErrorCode::kParse, "expected 11 fields: " + line);
    ResultRow r;
    r.method = f[0];
    r.strategy = f[1];
    r.k = std::stoi(f[2]);
    r.empirical_mean = parse_double(f[3]);
    r.empirical_stderr = parse_double(f[4]);
    r.theoretical = parse_double(f[5]);
    r.tunstall_bound = parse_double(f[6]);
    r.lemma_m_bound = parse_double(f[7]);
    r.m_star = std::stoll(f[8]);
    r.h_r_bits = parse_double(f[9]);
    r.kl_bits = parse_double(f[10]);
    rows.push_back(std::move(r));
  }
  return rows;
}

void emit_csv(const std::vector<ResultRow>& rows, const std::filesystem::path& path) {
  if (rows.empty()) throw Error(ErrorCode::kBadParam, "no rows to write to " + path.string());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << format_csv(rows);
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

std::string format_svg_plot(const std::vector<ResultRow>& rows) {
  if (rows.empty()) throw Error(ErrorCode::kBadParam, "no rows to plot");
  std::vector<std::string> methods;
  std::vector<std::string> strategies;
  int k_max = 1;
  double y_max = 2.0;
  for (const ResultRow& r : rows) {
    if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) methods.push_back(r.method);
    if (std::find(strategies.begin(), strategies.end(), r.strategy) == strategies.end()) {
      strategies.push_back(r.strategy);
    }
    k_max = std::max(k_max, r.k);
    y_max = std::max({y_max, r.empirical_mean + r.empirical_stderr, r.theoretical});
  }
  y_max = std::ceil(y_max + 0.5);
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  constexpr double kW = 520, kH = 340, kLeft = 50, kTop = 30, kPlotW = 440, kPlotH = 260;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW * static_cast<double>(methods.size())
      << "\" height=\"" << kH << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  for (std::size_t mi = 0; mi < methods.size(); ++mi) {
    const double ox = kW * static_cast<double>(mi);
    auto px = [&](double k) { return ox + kLeft + kPlotW * (k / k_max); };
    auto py = [&](double y) { return kTop + kPlotH * (1.0 - std::min(y, y_max) / y_max); };
    svg << "<g data-method=\"" << methods[mi] << "\">\n";
    svg << "<text x=\"" << ox + kLeft << "\" y=\"18\">expected generated tokens vs k (" << methods[mi]
        << ")</text>\n";
    svg << "<rect x=\"" << ox + kLeft << "\" y=\"" << kTop << "\" width=\"" << kPlotW << "\" height=\""
        << kPlotH << "\" fill=\"none\" stroke=\"#888\"/>\n";
    for (int y = 0; y <= static_cast<int>(y_max); ++y) {
      svg << "<text x=\"" << ox + kLeft - 18 << "\" y=\"" << py(y) + 4 << "\">" << y << "</text>\n";
    }
    svg << "<text x=\"" << px(k_max) - 10 << "\" y=\"" << kTop + kPlotH + 16 << "\">" << k_max << "</text>\n";

    for (std::size_t si = 0; si < strategies.size(); ++si) {
      std::ostringstream emp;
      std::ostringstream theo;
      for (const ResultRow& r : rows) {
        if (r.method != methods[mi] || r.strategy != strategies[si]) continue;
        emp << px(r.k) << ',' << py(r.empirical_mean) << ' ';
        theo << px(r.k) << ',' << py(r.theoretical) << ' ';
      }
      if (emp.str().empty()) continue;
      const char* color = colors[si % std::size(colors)];
      svg << "<polyline class=\"empirical\" data-series=\"" << methods[mi] << '/' << strategies[si]
          << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"" << emp.str() << "\"/>\n";
      svg << "<polyline class=\"theoretical\" data-series=\"" << methods[mi] << '/' << strategies[si]
          << "\" fill=\"none\" stroke=\"" << color << "\" stroke-dasharray=\"4 3\" points=\"" << theo.str()
          << "\"/>\n";
      svg << "<text x=\"" << ox + kLeft + 8 << "\" y=\"" << kTop + 14 + 13 * static_cast<double>(si)
          << "\" fill=\"" << color << "\">" << strategies[si] << "</text>\n";
    }
    // Bounds depend on k only; take them from the first strategy's rows.
    std::ostringstream tun;
    std::ostringstream lem;
    for (const ResultRow& r : rows) {
      if (r.method != methods[mi] || r.strategy != strategies.front()) continue;
      tun << px(r.k) << ',' << py(r.tunstall_bound) << ' ';
      if (std::isfinite(r.lemma_m_bound)) lem << px(r.k) << ',' << py(r.lemma_m_bound) << ' ';
    }
    svg << "<polyline class=\"bound\" data-bound=\"tunstall\" fill=\"none\" stroke=\"#444\" "
           "stroke-dasharray=\"1 3\" points=\""
        << tun.str() << "\"/>\n";
    svg << "<polyline class=\"bound\" data-bound=\"lemma-m\" fill=\"none\" stroke=\"#000\" "
           "stroke-dasharray=\"6 2\" points=\""
        << lem.str() << "\"/>\n";
    svg << "</g>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void emit_svg_plot(const std::vector<ResultRow>& rows, const std::filesystem::path& path) {
  const std::string text = format_svg_plot(rows);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << text;
}

void write_sweep_outputs(const SweepResult& result, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir.string() + ": " + ec.message());
  emit_csv(result.rows, dir / "results.csv");
  emit_svg_plot(result.rows, dir / "expected_generated.svg");

  {
    std::ofstream out(dir / "acceptance_by_index.csv", std::ios::binary);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + (dir / "acceptance_by_index.csv").string());
    out << "method,strategy,k,index,acceptance\n";
    for (const ResultRow& r : result.rows) {
      for (std::size_t i = 0; i < r.marginal_acceptance.size(); ++i) {
        out << r.method << ',' << r.strategy << ',' << r.k << ',' << i + 1 << ','
            << format_double(r.marginal_acceptance[i]) << '\n';
      }
    }
  }

  json meta;
  meta["config"] = json::parse(to_json(result.config));
  meta["kl_bits"] = result.kl_bits;
  const EntropySandwich sandwich =
      entropy_sandwich(result.kl_bits, result.config.epsilon, result.config.grs_constant);
  meta["entropy_sandwich"] = {{"lower", sandwich.lower},
                              {"grs_upper", sandwich.grs_upper},
                              {"pfr_upper", sandwich.pfr_upper},
                              {"grs_constant", result.config.grs_constant},
                              {"epsilon", result.config.epsilon}};
  for (const MethodSummary& m : result.methods) {
    json jm;
    jm["estimated_a"] = m.estimate.a;
    jm["estimated_h_bits"] = m.estimate.entropy_bits();
    jm["phase1_trials"] = m.counts.trials;
    jm["phase1_accepts"] = m.counts.accepts;
    jm["exact_h_r_bits"] = m.exact_entropy.bits;
    jm["h_r_estimator"] = m.exact_entropy.estimator;
    // Gap between observed and 0-th order predicted sequence performance
    // at the largest k; sign is reported, not assumed.
    for (const ResultRow& r : result.rows) {
      if (r.method == to_string(m.method) && r.strategy == "sequence" && r.k == result.config.k_values.back()) {
        jm["sequence_gap_at_kmax"] = r.empirical_mean - r.theoretical;
      }
    }
    meta["methods"][std::string(to_string(m.method))] = jm;
  }
  std::ofstream out(dir / "metadata.json", std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + (dir / "metadata.json").string());
  out << meta.dump(2) << '\n';
}

}  // namespace specdec
