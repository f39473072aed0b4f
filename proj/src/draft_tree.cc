#include "specdec/draft_tree.h"

#include <algorithm>
#include <charconv>
#include <sstream>

#include "specdec/error.h"

namespace specdec {

TreeIndex TreeIndex::parent() const {
  if (path.empty()) throw Error(ErrorCode::kBadParam, "root has no parent");
  return TreeIndex{std::vector<int>(path.begin(), path.end() - 1)};
}

TreeIndex TreeIndex::child(int sibling) const {
  TreeIndex c = *this;
  c.path.push_back(sibling);
  return c;
}

std::string to_string(const TreeIndex& index) {
  std::string s;
  for (std::size_t i = 0; i < index.path.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(index.path[i]);
  }
  return s;
}

TreeIndex parse_tree_index(const std::string& text) {
  TreeIndex idx;
  const char* p = text.data();
  const char* end = text.data() + text.size();
  while (p < end) {
    int v = 0;
    auto [next, ec] = std::from_chars(p, end, v);
    if (ec != std::errc{} || v < 1) {
      throw Error(ErrorCode::kParse, "bad tree index '" + text + "'");
    }
    idx.path.push_back(v);
    p = next;
    if (p < end) {
      if (*p != ',') throw Error(ErrorCode::kParse, "bad tree index '" + text + "'");
      ++p;
      if (p == end) throw Error(ErrorCode::kParse, "trailing comma in '" + text + "'");
    }
  }
  if (idx.path.empty()) throw Error(ErrorCode::kParse, "empty tree index");
  return idx;
}

DraftTree::DraftTree(std::vector<TreeIndex> nodes) {
  if (!std::is_sorted(nodes.begin(), nodes.end())) std::sort(nodes.begin(), nodes.end());
  if (std::adjacent_find(nodes.begin(), nodes.end()) != nodes.end()) {
    throw Error(ErrorCode::kInvalidTree, "duplicate vertex");
  }
  nodes_.reserve(nodes.size() + 1);
  nodes_.push_back(TreeIndex{});
  for (auto& n : nodes) nodes_.push_back(std::move(n));

  parent_.assign(nodes_.size(), -1);
  children_.assign(nodes_.size(), {});
  // Sorted order is preorder, so the parent of a vertex at depth d is the
  // latest vertex seen at depth d−1, provided it is a prefix.
  std::vector<int> last_at_depth{0};
  for (std::size_t id = 1; id < nodes_.size(); ++id) {
    const TreeIndex& n = nodes_[id];
    if (n.is_root()) throw Error(ErrorCode::kInvalidTree, "root listed as a vertex");
    for (int v : n.path) {
      if (v < 1) throw Error(ErrorCode::kInvalidTree, "sibling positions are 1-based");
    }
    const std::size_t d = n.depth();
    if (d > last_at_depth.size()) throw Error(ErrorCode::kInvalidTree, "missing parent of " + to_string(n));
    const int pid = last_at_depth[d - 1];
    const auto& pp = nodes_[static_cast<std::size_t>(pid)].path;
    if (pp.size() != d - 1 || !std::equal(pp.begin(), pp.end(), n.path.begin())) {
      throw Error(ErrorCode::kInvalidTree, "missing parent of " + to_string(n));
    }
    // Siblings are visited in order, so closure means the next expected position.
    auto& kids = children_[static_cast<std::size_t>(pid)];
    if (n.last() != static_cast<int>(kids.size()) + 1) {
      throw Error(ErrorCode::kInvalidTree, "missing earlier sibling of " + to_string(n));
    }
    parent_[id] = pid;
    kids.push_back(static_cast<int>(id));
    last_at_depth.resize(d);
    last_at_depth.push_back(static_cast<int>(id));
    max_sibling_ = std::max(max_sibling_, n.last());
    max_depth_ = std::max(max_depth_, static_cast<int>(d));
  }
}

std::vector<TreeIndex> DraftTree::nodes() const {
  return std::vector<TreeIndex>(nodes_.begin() + 1, nodes_.end());
}

std::optional<int> DraftTree::find(const TreeIndex& index) const {
  auto it = std::lower_bound(nodes_.begin(), nodes_.end(), index);
  if (it == nodes_.end() || *it != index) return std::nullopt;
  return static_cast<int>(it - nodes_.begin());
}

void DraftTree::check_fan_out(int alphabet_size) const {
  if (max_sibling_ > alphabet_size) {
    throw Error(ErrorCode::kBadParam, "a vertex has " + std::to_string(max_sibling_) +
                                          " children but the alphabet has " +
                                          std::to_string(alphabet_size) + " tokens");
  }
}

DraftTree topology_sequence(int k) {
  if (k < 1) throw Error(ErrorCode::kBadParam, "sequence needs k >= 1");
  std::vector<TreeIndex> nodes;
  TreeIndex cur;
  for (int i = 0; i < k; ++i) {
    cur = cur.child(1);
    nodes.push_back(cur);
  }
  return DraftTree(std::move(nodes));
}

DraftTree topology_batch(int k) {
  if (k < 1) throw Error(ErrorCode::kBadParam, "batch needs k >= 1");
  std::vector<TreeIndex> nodes;
  for (int i = 1; i <= k; ++i) nodes.push_back(TreeIndex{{i}});
  return DraftTree(std::move(nodes));
}

DraftTree topology_specinfer(int width, int depth) {
  if (width < 1 || depth < 0) throw Error(ErrorCode::kBadParam, "specinfer needs width >= 1, depth >= 0");
  std::vector<TreeIndex> nodes;
  TreeIndex cur;
  for (int i = 0; i < depth; ++i) {
    cur = cur.child(1);
    nodes.push_back(cur);
  }
  for (int i = 1; i <= width; ++i) nodes.push_back(cur.child(i));
  return DraftTree(std::move(nodes));
}

std::string serialize_tree(const DraftTree& tree) {
  std::string out;
  for (const TreeIndex& n : tree.nodes()) {
    out += to_string(n);
    out += '\n';
  }
  return out;
}

DraftTree parse_tree(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<TreeIndex> nodes;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    nodes.push_back(parse_tree_index(line));
  }
  return DraftTree(std::move(nodes));
}

}  // namespace specdec
