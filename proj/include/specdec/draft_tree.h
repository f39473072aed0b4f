#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "specdec/dist.h"

namespace specdec {

// Vertex address (j₁,…,j_l) in a drafting tree; 1-based sibling positions.
// The empty path is the root. Ordering is lexicographic, so a parent sorts
// before its children and sibling i before sibling i+1.
struct TreeIndex {
  std::vector<int> path;

  std::size_t depth() const noexcept { return path.size(); }
  bool is_root() const noexcept { return path.empty(); }
  TreeIndex parent() const;
  TreeIndex child(int sibling) const;
  int last() const { return path.back(); }

  friend auto operator<=>(const TreeIndex&, const TreeIndex&) = default;
};

std::string to_string(const TreeIndex& index);        // "1,1,2"
TreeIndex parse_tree_index(const std::string& text);  // inverse

// Prefix-closed and sibling-closed set of non-root vertices.
//
// Vertices get dense ids: 0 is the root and 1..size() follow lexicographic
// order, which is also a valid drafting order.
class DraftTree {
 public:
  DraftTree() : DraftTree(std::vector<TreeIndex>{}) {}

  // Throws InvalidTree when the set is not prefix/sibling closed or holds
  // the root or a non-positive entry.
  explicit DraftTree(std::vector<TreeIndex> nodes);

  std::size_t size() const noexcept { return nodes_.size() - 1; }
  // Lexicographically ordered non-root vertices.
  std::vector<TreeIndex> nodes() const;

  const TreeIndex& index(int id) const { return nodes_.at(static_cast<std::size_t>(id)); }
  std::optional<int> find(const TreeIndex& index) const;
  int parent_id(int id) const { return parent_[static_cast<std::size_t>(id)]; }
  // Ids of the children of `id`, in sibling order.
  const std::vector<int>& children(int id) const { return children_[static_cast<std::size_t>(id)]; }

  // Largest sibling position anywhere in the tree (0 for an empty tree).
  int max_sibling_index() const noexcept { return max_sibling_; }
  int max_depth() const noexcept { return max_depth_; }

  // Throws BadParam when some vertex has more than `alphabet_size` children.
  void check_fan_out(int alphabet_size) const;

  friend bool operator==(const DraftTree& a, const DraftTree& b) { return a.nodes_ == b.nodes_; }

 private:
  std::vector<TreeIndex> nodes_;  // nodes_[0] is the root
  std::vector<int> parent_;
  std::vector<std::vector<int>> children_;
  int max_sibling_ = 0;
  int max_depth_ = 0;
};

DraftTree topology_sequence(int k);
DraftTree topology_batch(int k);
// `depth` shared tokens followed by `width` alternatives for the next one.
// depth = 0 degenerates to batch(width).
DraftTree topology_specinfer(int width, int depth);

// Newline-separated index paths, one vertex per line.
std::string serialize_tree(const DraftTree& tree);
DraftTree parse_tree(const std::string& text);

}  // namespace specdec
