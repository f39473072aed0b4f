#include "specdec/verifier.h"

#include <algorithm>

#include "specdec/error.h"
#include "specdec/rng.h"

namespace specdec {

std::string_view to_string(Method m) {
  return m == Method::kGsd ? "gsd" : "ersd";
}

Method parse_method(std::string_view name) {
  if (name == "gsd" || name == "GSD") return Method::kGsd;
  if (name == "ersd" || name == "ERSD") return Method::kErsd;
  throw Error(ErrorCode::kParse, "unknown method '" + std::string(name) + "'");
}

StepResult verify_gsd(const MarkovSource& p, const MarkovSource& q, const Context& ctx,
                      const DraftedTokens& drafted, const DraftTree& tree, Rng& rng) {
  StepResult out;
  int node = 0;
  Dist p_target;
  for (;;) {
    const auto& path = drafted.paths[static_cast<std::size_t>(node)];
    p_target = p.conditional(ctx, path);
    Dist q_draft = q.conditional(ctx, path);
    const auto& kids = tree.children(node);
    int accepted = -1;
    for (std::size_t i = 0; i < kids.size(); ++i) {
      const Token t = drafted.token(kids[i]);
      const double ratio = p_target[t] / q_draft[t];
      if (rng.uniform() < std::min(1.0, ratio)) {
        accepted = kids[i];
        break;
      }
      try {
        p_target = residual_dist(p_target, q_draft);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kNoResidualMass) throw;
        // p_target ≤ q_draft means the ratio was ≥ 1 up to rounding.
        accepted = kids[i];
        break;
      }
      if (i + 1 < kids.size()) q_draft = without_replacement_update(q_draft, t);
    }
    if (accepted < 0) break;
    out.emitted.push_back(drafted.token(accepted));
    out.accepted_nodes.push_back(tree.index(accepted));
    node = accepted;
  }
  out.emitted.push_back(rng.categorical(p_target.mass()));
  out.accepted_count = static_cast<int>(out.accepted_nodes.size());
  return out;
}

StepResult verify_ersd(const MarkovSource& p, const MarkovSource& /*q*/, const Context& ctx,
                       const DraftedTokens& drafted, const DraftTree& tree, Rng& rng) {
  if (!drafted.races) throw Error(ErrorCode::kBadParam, "exponential-race verification needs stored races");
  StepResult out;
  int node = 0;
  for (;;) {
    const Dist& p_row = p.conditional(ctx, drafted.paths[static_cast<std::size_t>(node)]);
    const auto& kids = tree.children(node);
    if (kids.empty()) {
      out.emitted.push_back(winner(fresh_race(p.alphabet_size(), rng), p_row));
      break;
    }
    const Token w = winner(drafted.races->at(tree.index(node)), p_row);
    out.emitted.push_back(w);
    auto match = std::find_if(kids.begin(), kids.end(),
                              [&](int kid) { return drafted.token(kid) == w; });
    if (match == kids.end()) break;
    out.accepted_nodes.push_back(tree.index(*match));
    node = *match;
  }
  out.accepted_count = static_cast<int>(out.accepted_nodes.size());
  return out;
}

StepResult speculative_step(Method method, const MarkovSource& p, const MarkovSource& q,
                            const Context& ctx, const DraftTree& tree, Rng& rng) {
  if (method == Method::kGsd) {
    const DraftedTokens d = draft_gsd(q, ctx, tree, rng);
    return verify_gsd(p, q, ctx, d, tree, rng);
  }
  const DraftedTokens d = draft_ersd(q, ctx, tree, rng);
  return verify_ersd(p, q, ctx, d, tree, rng);
}

StepFn step_fn(Method method) {
  return [method](const MarkovSource& p, const MarkovSource& q, const Context& ctx,
                  const DraftTree& tree, Rng& rng) {
    return speculative_step(method, p, q, ctx, tree, rng);
  };
}

Generation generate(const StepFn& step, const MarkovSource& p, const MarkovSource& q,
                    const Context& ctx, const DraftTree& tree, std::size_t n_tokens, Rng& rng) {
  if (n_tokens < 1) throw Error(ErrorCode::kBadParam, "n_tokens must be >= 1");
  Generation g;
  Context running = ctx;
  while (g.tokens.size() < n_tokens) {
    const StepResult r = step(p, q, running, tree, rng);
    g.accepted_counts.push_back(r.accepted_count);
    g.tokens.insert(g.tokens.end(), r.emitted.begin(), r.emitted.end());
    running.insert(running.end(), r.emitted.begin(), r.emitted.end());
  }
  g.tokens.resize(n_tokens);
  return g;
}

Generation generate(Method method, const MarkovSource& p, const MarkovSource& q,
                    const Context& ctx, const DraftTree& tree, std::size_t n_tokens, Rng& rng) {
  return generate(step_fn(method), p, q, ctx, tree, n_tokens, rng);
}

}  // namespace specdec
