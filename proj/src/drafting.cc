#include "specdec/drafting.h"

#include "specdec/error.h"
#include "specdec/rng.h"

namespace specdec {

namespace {

DraftedTokens empty_draft(const DraftTree& tree) {
  DraftedTokens d;
  d.tokens.assign(tree.size() + 1, -1);
  d.paths.assign(tree.size() + 1, {});
  d.draw_order.reserve(tree.size());
  return d;
}

void record(DraftedTokens& d, int id, int parent, Token t) {
  const auto i = static_cast<std::size_t>(id);
  d.tokens[i] = t;
  d.paths[i] = d.paths[static_cast<std::size_t>(parent)];
  d.paths[i].push_back(t);
  d.draw_order.push_back(id);
}

}  // namespace

std::map<TreeIndex, Token> DraftedTokens::assignment(const DraftTree& tree) const {
  std::map<TreeIndex, Token> out;
  for (std::size_t id = 1; id < tokens.size(); ++id) {
    out.emplace(tree.index(static_cast<int>(id)), tokens[id]);
  }
  return out;
}

DraftedTokens draft_gsd(const MarkovSource& q, const Context& ctx, const DraftTree& tree, Rng& rng) {
  DraftedTokens d = empty_draft(tree);
  std::vector<double> weights;
  for (int id = 1; id <= static_cast<int>(tree.size()); ++id) {
    const int parent = tree.parent_id(id);
    const Dist& row = q.conditional(ctx, d.paths[static_cast<std::size_t>(parent)]);
    weights.assign(row.mass().begin(), row.mass().end());
    for (int sib : tree.children(parent)) {
      if (sib == id) break;
      weights[static_cast<std::size_t>(d.tokens[static_cast<std::size_t>(sib)])] = 0.0;
    }
    double remaining = 0.0;
    for (double w : weights) remaining += w;
    if (remaining <= kZeroMass) {
      throw Error(ErrorCode::kExhaustedAlphabet,
                  "vertex " + to_string(tree.index(id)) + " has no draft mass left");
    }
    record(d, id, parent, rng.categorical(weights));
  }
  return d;
}

DraftedTokens draft_ersd(const MarkovSource& q, const Context& ctx, const DraftTree& tree, Rng& rng) {
  DraftedTokens d = empty_draft(tree);
  d.races.emplace(q.alphabet_size());
  for (int id = 1; id <= static_cast<int>(tree.size()); ++id) {
    const int parent = tree.parent_id(id);
    const auto& siblings = tree.children(parent);
    if (siblings.front() != id) continue;  // assigned with the first child
    const Dist& row = q.conditional(ctx, d.paths[static_cast<std::size_t>(parent)]);
    const auto& e = d.races->ensure_race(tree.index(parent), rng);
    const std::vector<Token> order = arrivals(e, row, siblings.size());
    for (std::size_t i = 0; i < siblings.size(); ++i) {
      record(d, siblings[i], parent, order[i]);
    }
  }
  return d;
}

}  // namespace specdec
