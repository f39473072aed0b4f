#pragma once

#include <map>
#include <optional>
#include <vector>

#include "specdec/draft_tree.h"
#include "specdec/exp_race.h"
#include "specdec/markov_source.h"

namespace specdec {

class Rng;

// Draft tokens for every vertex of a DraftTree, indexed by vertex id.
struct DraftedTokens {
  std::vector<Token> tokens;             // tokens[0] belongs to the root and is unused
  std::vector<std::vector<Token>> paths;  // drafted tokens from the root down to each vertex
  std::vector<int> draw_order;           // vertex ids in the order they were drawn
  std::optional<RaceTable> races;        // present for exponential-race drafting

  Token token(int id) const { return tokens.at(static_cast<std::size_t>(id)); }
  std::map<TreeIndex, Token> assignment(const DraftTree& tree) const;
};

// Sampling without replacement among siblings by renormalizing Q after
// zeroing the tokens of earlier siblings. Vertices are visited in
// lexicographic order. Throws ExhaustedAlphabet if a vertex has more
// children than Q's conditional has support.
DraftedTokens draft_gsd(const MarkovSource& q, const Context& ctx, const DraftTree& tree, Rng& rng);

// The children of a vertex are the first arrivals of one shared exponential
// race under Q's conditional, which is stored for verification. Throws
// InsufficientSupport when a vertex has more children than Q's support.
DraftedTokens draft_ersd(const MarkovSource& q, const Context& ctx, const DraftTree& tree, Rng& rng);

}  // namespace specdec
