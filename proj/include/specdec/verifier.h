#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "specdec/drafting.h"

namespace specdec {

enum class Method { kGsd, kErsd };

std::string_view to_string(Method m);
Method parse_method(std::string_view name);

// Outcome of one draft/evaluate/verify round.
struct StepResult {
  std::vector<Token> emitted;               // accepted drafts, then one more token
  std::vector<TreeIndex> accepted_nodes;    // root-descending accepted path
  int accepted_count = 0;
};

// Greedy verification: children are tried in sibling order, each accepted
// with probability min(1, P_target/Q_draft). A rejection moves P_target to
// the residual and removes the rejected token from Q_draft. The last token
// is sampled from whatever P_target holds when the children run out.
StepResult verify_gsd(const MarkovSource& p, const MarkovSource& q, const Context& ctx,
                      const DraftedTokens& drafted, const DraftTree& tree, Rng& rng);

// Exponential-race verification: the winner of the stored race under P is
// emitted at every vertex on the path; the walk descends while the winner
// matches a drafted child. A frontier vertex gets a fresh race under P.
StepResult verify_ersd(const MarkovSource& p, const MarkovSource& q, const Context& ctx,
                       const DraftedTokens& drafted, const DraftTree& tree, Rng& rng);

// Draft then verify.
StepResult speculative_step(Method method, const MarkovSource& p, const MarkovSource& q,
                            const Context& ctx, const DraftTree& tree, Rng& rng);

// Signature shared by the real step and test doubles.
using StepFn = std::function<StepResult(const MarkovSource& p, const MarkovSource& q,
                                        const Context& ctx, const DraftTree& tree, Rng& rng)>;

StepFn step_fn(Method method);

struct Generation {
  std::vector<Token> tokens;       // exactly n_tokens
  std::vector<int> accepted_counts;  // one entry per step
};

Generation generate(Method method, const MarkovSource& p, const MarkovSource& q,
                    const Context& ctx, const DraftTree& tree, std::size_t n_tokens, Rng& rng);
Generation generate(const StepFn& step, const MarkovSource& p, const MarkovSource& q,
                    const Context& ctx, const DraftTree& tree, std::size_t n_tokens, Rng& rng);

}  // namespace specdec
