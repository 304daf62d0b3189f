#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace treetn {

/// Sorted list of zero-based mode indices. Printing and serialization use
/// one-based labels so that the root of a d-mode tree reads {1,...,d}.
using Modes = std::vector<int>;

struct TreeNode {
  Modes modes;
  int parent = -1;
  std::vector<int> children;  // sorted by first mode
  int level = 0;
};

/// Dimension partition tree over D = {0,...,d-1}.
///
/// Nodes are stored in breadth-first order with node 0 the root, and the
/// children of each node sorted by their smallest mode. The tree is immutable
/// after construction.
class DimensionTree {
 public:
  /// Explicit listing: every interior node followed by its children.
  using ChildrenMap = std::vector<std::pair<Modes, std::vector<Modes>>>;

  static DimensionTree trivial(int d);
  static DimensionTree linear_binary(int d);
  static DimensionTree balanced_binary(int d);
  static DimensionTree custom(const ChildrenMap& children_map);

  int dimension() const { return d_; }
  std::size_t size() const { return nodes_.size(); }
  int root() const { return 0; }
  const TreeNode& node(int id) const { return nodes_.at(static_cast<std::size_t>(id)); }
  const std::vector<TreeNode>& nodes() const { return nodes_; }

  bool is_leaf(int id) const { return node(id).children.empty(); }
  int depth() const { return depth_; }
  int arity() const { return arity_; }

  /// Node id of the leaf {nu}.
  int leaf_of_mode(int nu) const { return leaf_of_mode_.at(static_cast<std::size_t>(nu)); }
  /// Node id for a mode set, or -1 if the set is not a node.
  int find(const Modes& modes) const;

  /// T_l, ordered by sorted mode list.
  const std::vector<int>& level_nodes(int level) const {
    return levels_.at(static_cast<std::size_t>(level));
  }
  std::vector<int> interior_nodes() const;
  std::vector<int> leaves() const;

  Modes complement(const Modes& modes) const;
  Modes complement(int id) const { return complement(node(id).modes); }

  /// One-based label such as "{1,2}".
  std::string label(int id) const;

  bool operator==(const DimensionTree& other) const;

 private:
  DimensionTree() = default;
  void finalize();

  int d_ = 0;
  int depth_ = 0;
  int arity_ = 0;
  std::vector<TreeNode> nodes_;
  std::vector<std::vector<int>> levels_;
  std::vector<int> leaf_of_mode_;
};

struct TreeStats {
  int depth = 0;
  int arity = 0;
  std::size_t node_count = 0;
  std::vector<std::vector<Modes>> levels;
  std::vector<Modes> complements;  // per node id; empty for the root
};

TreeStats tree_stats(const DimensionTree& tree);

/// One-based "{1,2,3}" rendering of a mode set.
std::string modes_label(const Modes& modes);

// Nested-array JSON: a node is [modes, child, child, ...] with one-based
// sorted modes, e.g. [[1,2],[[1]],[[2]]].
std::string tree_to_json(const DimensionTree& tree);
DimensionTree tree_from_json(const std::string& text);

/// Tree kinds addressable by name: "trivial", "linear", "balanced".
DimensionTree make_tree(const std::string& kind, int d);

}  // namespace treetn
