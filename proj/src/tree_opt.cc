#include "specdec/tree_opt.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "json.hpp"
#include "specdec/error.h"
#include "specdec/exp_race.h"
#include "specdec/rng.h"

namespace specdec {

double AcceptanceModel::at(int sibling) const {
  if (sibling < 1 || static_cast<std::size_t>(sibling) > a.size()) return 0.0;
  return a[static_cast<std::size_t>(sibling) - 1];
}

double AcceptanceModel::vertex_probability(const TreeIndex& index) const {
  double r = 1.0;
  for (int j : index.path) r *= at(j);
  return r;
}

double AcceptanceModel::entropy_bits() const {
  std::vector<double> probs = a;
  double total = 0.0;
  for (double v : a) total += v;
  if (total < 1.0) probs.push_back(1.0 - total);
  return specdec::entropy_bits(probs);
}

void AcceptanceModel::validate() const {
  if (alphabet_size < 1) throw Error(ErrorCode::kBadParam, "alphabet_size must be >= 1");
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!(a[i] >= 0.0 && a[i] <= 1.0)) {
      throw Error(ErrorCode::kBadParam, "a(" + std::to_string(i + 1) + ") outside [0,1]");
    }
    if (i > 0 && a[i] > a[i - 1]) {
      throw Error(ErrorCode::kBadParam, "a must be non-increasing at index " + std::to_string(i + 1));
    }
  }
}

void AcceptanceCounts::add(const DraftTree& tree, const StepResult& step) {
  auto grow = [&](std::size_t n) {
    if (trials.size() < n) {
      trials.resize(n, 0);
      accepts.resize(n, 0);
    }
  };
  int node = 0;
  std::size_t level = 0;
  for (;;) {
    const auto& kids = tree.children(node);
    grow(kids.size());
    for (std::size_t i = 0; i < kids.size(); ++i) ++trials[i];
    if (level >= step.accepted_nodes.size()) break;
    const TreeIndex& taken = step.accepted_nodes[level++];
    ++accepts[static_cast<std::size_t>(taken.last()) - 1];
    node = *tree.find(taken);
  }
}

void AcceptanceCounts::merge(const AcceptanceCounts& other) {
  if (trials.size() < other.trials.size()) {
    trials.resize(other.trials.size(), 0);
    accepts.resize(other.trials.size(), 0);
  }
  for (std::size_t i = 0; i < other.trials.size(); ++i) {
    trials[i] += other.trials[i];
    accepts[i] += other.accepts[i];
  }
}

ScoredTree optimal_tree(const AcceptanceModel& r, int k) {
  if (k < 1) throw Error(ErrorCode::kBadParam, "k must be >= 1");
  r.validate();
  if (!(r.at(1) > 0.0)) throw Error(ErrorCode::kBadParam, "a(1) must be positive");

  // A placed vertex is its parent slot plus sibling position; -1 is the root.
  struct Placed {
    int parent;
    int sibling;
    double prob;
    int depth;
  };
  // Depth is looked up only on ties.
  struct Candidate {
    double prob;
    int parent;
    int sibling;
  };
  std::vector<Placed> placed;
  placed.reserve(static_cast<std::size_t>(k));

  auto depth_of = [&](const Candidate& c) {
    return c.parent < 0 ? 1 : placed[static_cast<std::size_t>(c.parent)].depth + 1;
  };
  // Equal depth is guaranteed by the caller: climb both paths to their common
  // parent, where the sibling positions decide.
  auto lex_less = [&](const Candidate& x, const Candidate& y) {
    int px = x.parent;
    int py = y.parent;
    int sx = x.sibling;
    int sy = y.sibling;
    while (px != py) {
      sx = placed[static_cast<std::size_t>(px)].sibling;
      sy = placed[static_cast<std::size_t>(py)].sibling;
      px = placed[static_cast<std::size_t>(px)].parent;
      py = placed[static_cast<std::size_t>(py)].parent;
    }
    return sx < sy;
  };
  auto before = [&](const Candidate& x, const Candidate& y) {
    if (x.prob != y.prob) return x.prob > y.prob;
    const int dx = depth_of(x);
    const int dy = depth_of(y);
    if (dx != dy) return dx < dy;
    return lex_less(x, y);
  };

  // Vertices pop in the total order, and the map from a popped vertex to the
  // candidate it spawns at a given sibling position preserves that order. One
  // FIFO queue per sibling position therefore stays sorted, and only the queue
  // heads need a heap.
  const auto width = static_cast<std::size_t>(r.alphabet_size);
  std::vector<std::vector<Candidate>> queues(width + 1);
  std::vector<std::size_t> cursor(width + 1, 0);
  auto head_after = [&](std::size_t x, std::size_t y) {
    return before(queues[y][cursor[y]], queues[x][cursor[x]]);
  };
  std::vector<std::size_t> heads;
  auto enqueue = [&](const Candidate& c) {
    const auto j = static_cast<std::size_t>(c.sibling);
    queues[j].push_back(c);
    if (cursor[j] + 1 == queues[j].size()) {
      heads.push_back(j);
      std::push_heap(heads.begin(), heads.end(), head_after);
    }
  };

  enqueue({r.at(1), -1, 1});
  for (int step = 0; step < k; ++step) {
    std::pop_heap(heads.begin(), heads.end(), head_after);
    const std::size_t j = heads.back();
    heads.pop_back();
    const Candidate c = queues[j][cursor[j]++];
    if (cursor[j] < queues[j].size()) {
      heads.push_back(j);
      std::push_heap(heads.begin(), heads.end(), head_after);
    }
    const int slot = static_cast<int>(placed.size());
    placed.push_back({c.parent, c.sibling, c.prob, depth_of(c)});
    const double parent_prob = c.parent < 0 ? 1.0 : placed[static_cast<std::size_t>(c.parent)].prob;
    enqueue({c.prob * r.at(1), slot, 1});
    if (c.sibling < r.alphabet_size) enqueue({parent_prob * r.at(c.sibling + 1), c.parent, c.sibling + 1});
  }

  ScoredTree out;
  out.per_node.reserve(placed.size());
  for (const Placed& pl : placed) {
    TreeIndex idx;
    idx.path.reserve(static_cast<std::size_t>(pl.depth));
    if (pl.parent >= 0) {
      const auto& up = out.per_node[static_cast<std::size_t>(pl.parent)].first.path;
      idx.path.assign(up.begin(), up.end());
    }
    idx.path.push_back(pl.sibling);
    out.score += pl.prob;
    out.per_node.emplace_back(std::move(idx), pl.prob);
  }
  // Siblings are placed in order, so a depth-first walk lists the vertices
  // lexicographically and spares DraftTree a sort.
  const std::size_t n = placed.size();
  std::vector<int> first(n + 2, 0);
  for (const Placed& pl : placed) ++first[static_cast<std::size_t>(pl.parent + 2)];
  for (std::size_t s = 1; s < first.size(); ++s) first[s] += first[s - 1];
  std::vector<int> kids(n);
  {
    std::vector<int> fill(first.begin(), first.end() - 1);
    for (std::size_t s = 0; s < n; ++s) {
      kids[static_cast<std::size_t>(fill[static_cast<std::size_t>(placed[s].parent + 1)]++)] = static_cast<int>(s);
    }
  }
  std::vector<TreeIndex> nodes;
  nodes.reserve(n);
  std::vector<int> path;
  std::vector<int> stack(kids.rend() - first[1], kids.rend());
  while (!stack.empty()) {
    const int s = stack.back();
    stack.pop_back();
    const Placed& pl = placed[static_cast<std::size_t>(s)];
    path.resize(static_cast<std::size_t>(pl.depth) - 1);
    path.push_back(pl.sibling);
    nodes.push_back(TreeIndex{path});
    const auto lo = static_cast<std::size_t>(first[static_cast<std::size_t>(s) + 1]);
    const auto hi = static_cast<std::size_t>(first[static_cast<std::size_t>(s) + 2]);
    for (std::size_t c = hi; c > lo; --c) stack.push_back(kids[c - 1]);
  }
  out.tree = DraftTree(std::move(nodes));
  return out;
}

std::vector<double> pool_adjacent_violators(const std::vector<double>& values,
                                            const std::vector<double>& weights) {
  if (values.size() != weights.size()) throw Error(ErrorCode::kLengthMismatch, "values vs weights");
  struct Block {
    double mean;
    double weight;
    std::size_t count;
  };
  std::vector<Block> blocks;
  for (std::size_t i = 0; i < values.size(); ++i) {
    blocks.push_back({values[i], weights[i], 1});
    // Non-increasing target: merge while a later block exceeds an earlier one.
    while (blocks.size() > 1 && blocks[blocks.size() - 2].mean < blocks.back().mean) {
      Block b = blocks.back();
      blocks.pop_back();
      Block& a = blocks.back();
      const double w = a.weight + b.weight;
      a.mean = w > 0.0 ? (a.mean * a.weight + b.mean * b.weight) / w : 0.5 * (a.mean + b.mean);
      a.weight = w;
      a.count += b.count;
    }
  }
  std::vector<double> out;
  out.reserve(values.size());
  for (const Block& b : blocks) out.insert(out.end(), b.count, b.mean);
  return out;
}

AcceptanceModel estimate_acceptance(const AcceptanceCounts& counts, int alphabet_size,
                                    std::uint64_t min_trials) {
  std::vector<double> raw;
  std::vector<double> weights;
  for (std::size_t i = 0; i < counts.trials.size(); ++i) {
    if (counts.trials[i] == 0 || counts.trials[i] < min_trials) break;
    raw.push_back(static_cast<double>(counts.accepts[i]) / static_cast<double>(counts.trials[i]));
    weights.push_back(static_cast<double>(counts.trials[i]));
  }
  if (raw.empty()) throw Error(ErrorCode::kNoData, "no index has enough trials");
  AcceptanceModel m{pool_adjacent_violators(raw, weights), alphabet_size};
  m.validate();
  return m;
}

double expected_accepted(const DraftTree& tree, const AcceptanceModel& r) {
  std::vector<double> prob(tree.size() + 1, 1.0);
  double total = 0.0;
  for (int id = 1; id <= static_cast<int>(tree.size()); ++id) {
    const auto i = static_cast<std::size_t>(id);
    prob[i] = prob[static_cast<std::size_t>(tree.parent_id(id))] * r.at(tree.index(id).last());
    total += prob[i];
  }
  return total;
}

namespace {

// Visits every accept event of greedy verification at one vertex whose
// children are drawn without replacement from q: on_accept(position, token,
// probability). Positions past `max_position` are not explored.
void enumerate_gsd_level(const Dist& p, const Dist& q, int max_position,
                         const std::function<void(int, Token, double)>& on_accept) {
  std::function<void(const Dist&, const Dist&, int, double)> rec =
      [&](const Dist& target, const Dist& draft, int position, double weight) {
        for (std::size_t i = 0; i < draft.size(); ++i) {
          const auto t = static_cast<Token>(i);
          if (draft[t] <= 0.0) continue;
          const double w = weight * draft[t];
          const double alpha = std::min(1.0, target[t] / draft[t]);
          if (alpha > 0.0) on_accept(position, t, w * alpha);
          if (position >= max_position || alpha >= 1.0) continue;
          Dist next_target;
          Dist next_draft;
          try {
            next_target = residual_dist(target, draft);
            next_draft = without_replacement_update(draft, t);
          } catch (const Error& e) {
            if (e.code() != ErrorCode::kNoResidualMass && e.code() != ErrorCode::kDegenerate) throw;
            continue;
          }
          rec(next_target, next_draft, position + 1, w * (1.0 - alpha));
        }
      };
  rec(p, q, 1, 1.0);
}

double gsd_vertex_probability(const MarkovSource& p, const MarkovSource& q, const Context& ctx,
                              std::span<const int> path) {
  if (path.empty()) return 1.0;
  const int target = path.front();
  std::vector<double> by_token(static_cast<std::size_t>(p.alphabet_size()), 0.0);
  enumerate_gsd_level(p.conditional(ctx), q.conditional(ctx), target,
                      [&](int position, Token t, double prob) {
                        if (position == target) by_token[static_cast<std::size_t>(t)] += prob;
                      });
  double total = 0.0;
  for (std::size_t t = 0; t < by_token.size(); ++t) {
    if (by_token[t] == 0.0) continue;
    Context next = ctx;
    next.push_back(static_cast<Token>(t));
    total += by_token[t] * gsd_vertex_probability(p, q, next, path.subspan(1));
  }
  return total;
}

}  // namespace

double exact_acceptance_oracle(Method method, const MarkovSource& p, const MarkovSource& q,
                               const Context& ctx, const TreeIndex& node, std::uint64_t seed,
                               std::size_t mc_draws) {
  if (p.alphabet_size() > 6 || node.depth() > 3) {
    throw Error(ErrorCode::kTooLarge, "oracle limited to 6 tokens and depth 3");
  }
  if (node.is_root()) return 1.0;
  if (method == Method::kGsd) return gsd_vertex_probability(p, q, ctx, node.path);

  Rng rng(seed);
  std::size_t hits = 0;
  Context running;
  for (std::size_t draw = 0; draw < mc_draws; ++draw) {
    running = ctx;
    bool ok = true;
    for (int position : node.path) {
      const std::vector<double> e = fresh_race(p.alphabet_size(), rng);
      const Dist& q_row = q.conditional(running);
      if (q_row.support_size() < static_cast<std::size_t>(position)) {
        throw Error(ErrorCode::kInsufficientSupport, "vertex position beyond draft support");
      }
      const Token drafted = arrivals(e, q_row, static_cast<std::size_t>(position)).back();
      if (winner(e, p.conditional(running)) != drafted) {
        ok = false;
        break;
      }
      running.push_back(drafted);
    }
    hits += ok ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(mc_draws);
}

std::vector<double> index_distribution_exact_gsd(const Dist& p, const Dist& q) {
  if (p.size() > 8) throw Error(ErrorCode::kTooLarge, "exhaustive index law limited to 8 tokens");
  const auto support = static_cast<int>(q.support_size());
  std::vector<double> out(static_cast<std::size_t>(support) + 1, 0.0);
  enumerate_gsd_level(p, q, support, [&](int position, Token, double prob) {
    out[static_cast<std::size_t>(position) - 1] += prob;
  });
  double total = 0.0;
  for (int i = 0; i < support; ++i) total += out[static_cast<std::size_t>(i)];
  out.back() = std::max(0.0, 1.0 - total);
  return out;
}

std::vector<double> index_distribution_mc(Method method, const Dist& p, const Dist& q,
                                          std::size_t samples, Rng& rng) {
  if (p.size() != q.size()) throw Error(ErrorCode::kLengthMismatch, "p vs q");
  const std::size_t n = p.size();
  const std::size_t support = q.support_size();
  std::vector<double> counts(support + 1, 0.0);
  std::vector<double> target(n);
  std::vector<double> draft(n);
  for (std::size_t s = 0; s < samples; ++s) {
    std::size_t slot = support;  // nothing accepted
    if (method == Method::kErsd) {
      const std::vector<double> e = fresh_race(static_cast<int>(n), rng);
      const Token w = winner(e, p);
      const auto wi = static_cast<std::size_t>(w);
      if (q.mass()[wi] > 0.0) {
        const double tw = e[wi] / q.mass()[wi];
        std::size_t rank = 0;
        for (std::size_t j = 0; j < n; ++j) {
          if (q.mass()[j] <= 0.0 || j == wi) continue;
          const double tj = e[j] / q.mass()[j];
          if (tj < tw || (tj == tw && j < wi)) ++rank;
        }
        slot = rank;
      }
    } else {
      std::copy(p.mass().begin(), p.mass().end(), target.begin());
      std::copy(q.mass().begin(), q.mass().end(), draft.begin());
      for (std::size_t pos = 0; pos < support; ++pos) {
        const auto t = static_cast<std::size_t>(rng.categorical(draft));
        double draft_total = 0.0;
        for (double v : draft) draft_total += v;
        double target_total = 0.0;
        for (double v : target) target_total += v;
        const double qt = draft[t] / draft_total;
        const double pt = target[t] / target_total;
        if (rng.uniform() < std::min(1.0, pt / qt)) {
          slot = pos;
          break;
        }
        double residual_total = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          target[j] = std::max(target[j] / target_total - draft[j] / draft_total, 0.0);
          residual_total += target[j];
        }
        if (residual_total < kZeroMass) {
          slot = pos;
          break;
        }
        draft[t] = 0.0;
      }
    }
    counts[slot] += 1.0;
  }
  for (double& c : counts) c /= static_cast<double>(samples);
  return counts;
}

AcceptanceEntropy acceptance_entropy(Method method, const MarkovSource& p, const MarkovSource& q,
                                     std::size_t samples, std::uint64_t seed) {
  const std::vector<double> weights = p.stationary_row_weights();
  const bool exhaustive = method == Method::kGsd && p.alphabet_size() <= 8;
  AcceptanceEntropy out;
  for (std::size_t r = 0; r < weights.size(); ++r) {
    if (weights[r] <= 0.0) continue;
    std::vector<double> law;
    if (exhaustive) {
      law = index_distribution_exact_gsd(p.row(r), q.row(r));
    } else {
      Rng rng(derive_seed(seed, r));
      law = index_distribution_mc(method, p.row(r), q.row(r), samples, rng);
    }
    out.bits += weights[r] * entropy_bits(law);
  }
  out.estimator = exhaustive ? "exhaustive enumeration per context"
                             : "monte carlo, " + std::to_string(samples) + " draws per context";
  if (p.order() > 0) out.estimator += ", weighted by the stationary context law";
  return out;
}

std::string to_json(const AcceptanceModel& r, std::optional<double> kl_bits) {
  nlohmann::json j;
  j["alphabet_size"] = r.alphabet_size;
  j["a"] = r.a;
  if (kl_bits) j["kl_bits"] = *kl_bits;
  return j.dump(1);
}

AcceptanceModel acceptance_from_json(const std::string& text, std::optional<double>* kl_bits) {
  try {
    const auto j = nlohmann::json::parse(text);
    for (const auto& [key, _] : j.items()) {
      if (key != "alphabet_size" && key != "a" && key != "kl_bits") {
        throw Error(ErrorCode::kParse, "unknown key '" + key + "' in acceptance model");
      }
    }
    AcceptanceModel m;
    m.a = j.at("a").get<std::vector<double>>();
    m.alphabet_size = j.value("alphabet_size", static_cast<int>(m.a.size()));
    if (kl_bits) {
      *kl_bits = j.contains("kl_bits") ? std::optional<double>(j["kl_bits"].get<double>()) : std::nullopt;
    }
    m.validate();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, e.what());
  }
}

AcceptanceModel load_acceptance(const std::filesystem::path& path, std::optional<double>* kl_bits) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return acceptance_from_json(ss.str(), kl_bits);
}

}  // namespace specdec
