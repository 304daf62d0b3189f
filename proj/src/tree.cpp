#include "treetn/tree.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <queue>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace treetn {

namespace {

Modes iota_modes(int begin, int end) {
  Modes m(static_cast<std::size_t>(end - begin));
  std::iota(m.begin(), m.end(), begin);
  return m;
}

void require_dimension(int d) {
  if (d < 2) throw std::invalid_argument("dimension tree needs d >= 2, got " + std::to_string(d));
}

bool mode_order(const Modes& a, const Modes& b) { return a.front() < b.front(); }

void split_balanced(const Modes& modes, DimensionTree::ChildrenMap& out) {
  if (modes.size() < 2) return;
  const std::size_t left = (modes.size() + 1) / 2;
  Modes lhs(modes.begin(), modes.begin() + static_cast<std::ptrdiff_t>(left));
  Modes rhs(modes.begin() + static_cast<std::ptrdiff_t>(left), modes.end());
  out.emplace_back(modes, std::vector<Modes>{lhs, rhs});
  split_balanced(lhs, out);
  split_balanced(rhs, out);
}

nlohmann::json node_to_json(const DimensionTree& tree, int id) {
  nlohmann::json j = nlohmann::json::array();
  nlohmann::json modes = nlohmann::json::array();
  for (int m : tree.node(id).modes) modes.push_back(m + 1);
  j.push_back(modes);
  for (int c : tree.node(id).children) j.push_back(node_to_json(tree, c));
  return j;
}

Modes modes_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.empty()) throw std::invalid_argument("tree json: node modes must be a nonempty array");
  Modes m;
  for (const auto& v : j) {
    if (!v.is_number_integer() || v.get<int>() < 1)
      throw std::invalid_argument("tree json: modes must be positive integers");
    m.push_back(v.get<int>() - 1);
  }
  return m;
}

void node_from_json(const nlohmann::json& j, DimensionTree::ChildrenMap& out) {
  if (!j.is_array() || j.empty()) throw std::invalid_argument("tree json: node must be [modes, children...]");
  Modes modes = modes_from_json(j[0]);
  if (j.size() == 1) return;
  std::vector<Modes> children;
  for (std::size_t i = 1; i < j.size(); ++i) {
    const auto& child = j[i];
    if (!child.is_array() || child.empty()) throw std::invalid_argument("tree json: malformed child");
    children.push_back(modes_from_json(child[0]));
    node_from_json(child, out);
  }
  out.emplace_back(std::move(modes), std::move(children));
}

}  // namespace

std::string modes_label(const Modes& modes) {
  std::string s = "{";
  for (std::size_t i = 0; i < modes.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(modes[i] + 1);
  }
  return s + "}";
}

DimensionTree DimensionTree::trivial(int d) {
  require_dimension(d);
  std::vector<Modes> leaves;
  for (int nu = 0; nu < d; ++nu) leaves.push_back({nu});
  return custom({{iota_modes(0, d), leaves}});
}

DimensionTree DimensionTree::linear_binary(int d) {
  require_dimension(d);
  ChildrenMap map;
  for (int k = d; k >= 2; --k) map.emplace_back(iota_modes(0, k), std::vector<Modes>{iota_modes(0, k - 1), {k - 1}});
  return custom(map);
}

DimensionTree DimensionTree::balanced_binary(int d) {
  require_dimension(d);
  ChildrenMap map;
  split_balanced(iota_modes(0, d), map);
  return custom(map);
}

DimensionTree DimensionTree::custom(const ChildrenMap& children_map) {
  if (children_map.empty()) throw std::invalid_argument("tree listing is empty");

  std::map<Modes, std::vector<Modes>> listing;
  int max_mode = -1;
  for (const auto& [parent, kids] : children_map) {
    Modes p = parent;
    std::sort(p.begin(), p.end());
    if (p.empty()) throw std::invalid_argument("tree listing contains an empty node");
    if (std::adjacent_find(p.begin(), p.end()) != p.end())
      throw std::invalid_argument("node " + modes_label(p) + " repeats a mode");
    if (p.front() < 0) throw std::invalid_argument("negative mode index");
    max_mode = std::max(max_mode, p.back());
    std::vector<Modes> sorted_kids;
    for (Modes k : kids) {
      if (k.empty()) throw std::invalid_argument("node " + modes_label(p) + " has an empty child");
      std::sort(k.begin(), k.end());
      sorted_kids.push_back(std::move(k));
    }
    std::sort(sorted_kids.begin(), sorted_kids.end(), mode_order);
    if (!listing.emplace(p, std::move(sorted_kids)).second)
      throw std::invalid_argument("node " + modes_label(p) + " listed twice");
  }

  const int d = max_mode + 1;
  const Modes root = iota_modes(0, d);
  if (!listing.count(root)) throw std::invalid_argument("tree listing must contain the root " + modes_label(root));

  DimensionTree tree;
  tree.d_ = d;
  std::map<Modes, bool> seen;
  std::queue<std::pair<Modes, int>> pending;
  pending.emplace(root, -1);
  while (!pending.empty()) {
    auto [modes, parent] = pending.front();
    pending.pop();
    if (seen[modes]) throw std::invalid_argument("node " + modes_label(modes) + " appears more than once");
    seen[modes] = true;
    const int id = static_cast<int>(tree.nodes_.size());
    TreeNode node;
    node.modes = modes;
    node.parent = parent;
    node.level = parent < 0 ? 0 : tree.nodes_[static_cast<std::size_t>(parent)].level + 1;
    tree.nodes_.push_back(node);
    if (parent >= 0) tree.nodes_[static_cast<std::size_t>(parent)].children.push_back(id);

    auto it = listing.find(modes);
    if (it == listing.end()) {
      if (modes.size() != 1) throw std::invalid_argument("leaf " + modes_label(modes) + " is not a singleton");
      continue;
    }
    const auto& kids = it->second;
    if (kids.size() < 2)
      throw std::invalid_argument("interior node " + modes_label(modes) + " needs at least two children");
    Modes joined;
    for (const auto& k : kids) joined.insert(joined.end(), k.begin(), k.end());
    std::sort(joined.begin(), joined.end());
    if (std::adjacent_find(joined.begin(), joined.end()) != joined.end())
      throw std::invalid_argument("children of " + modes_label(modes) + " overlap");
    if (joined != modes) throw std::invalid_argument("children of " + modes_label(modes) + " do not partition it");
    for (const auto& k : kids) pending.emplace(k, id);
  }
  for (const auto& [modes, kids] : listing) {
    if (!seen[modes]) throw std::invalid_argument("node " + modes_label(modes) + " is not reachable from the root");
  }
  tree.finalize();
  return tree;
}

void DimensionTree::finalize() {
  leaf_of_mode_.assign(static_cast<std::size_t>(d_), -1);
  depth_ = 0;
  arity_ = 0;
  for (std::size_t id = 0; id < nodes_.size(); ++id) {
    const auto& n = nodes_[id];
    depth_ = std::max(depth_, n.level);
    arity_ = std::max(arity_, static_cast<int>(n.children.size()));
    if (n.children.empty()) {
      auto& slot = leaf_of_mode_[static_cast<std::size_t>(n.modes.front())];
      if (slot != -1) throw std::invalid_argument("singleton " + modes_label(n.modes) + " appears twice");
      slot = static_cast<int>(id);
    }
  }
  for (int nu = 0; nu < d_; ++nu) {
    if (leaf_of_mode_[static_cast<std::size_t>(nu)] < 0)
      throw std::invalid_argument("singleton {" + std::to_string(nu + 1) + "} is missing");
  }
  levels_.assign(static_cast<std::size_t>(depth_ + 1), {});
  for (std::size_t id = 0; id < nodes_.size(); ++id)
    levels_[static_cast<std::size_t>(nodes_[id].level)].push_back(static_cast<int>(id));
  for (auto& lvl : levels_) {
    std::sort(lvl.begin(), lvl.end(), [&](int a, int b) {
      return nodes_[static_cast<std::size_t>(a)].modes < nodes_[static_cast<std::size_t>(b)].modes;
    });
  }
}

int DimensionTree::find(const Modes& modes) const {
  for (std::size_t id = 0; id < nodes_.size(); ++id)
    if (nodes_[id].modes == modes) return static_cast<int>(id);
  return -1;
}

std::vector<int> DimensionTree::interior_nodes() const {
  std::vector<int> out;
  for (std::size_t id = 0; id < nodes_.size(); ++id)
    if (!nodes_[id].children.empty()) out.push_back(static_cast<int>(id));
  return out;
}

std::vector<int> DimensionTree::leaves() const {
  std::vector<int> out;
  for (std::size_t id = 0; id < nodes_.size(); ++id)
    if (nodes_[id].children.empty()) out.push_back(static_cast<int>(id));
  return out;
}

Modes DimensionTree::complement(const Modes& modes) const {
  Modes out;
  for (int nu = 0; nu < d_; ++nu)
    if (!std::binary_search(modes.begin(), modes.end(), nu)) out.push_back(nu);
  return out;
}

std::string DimensionTree::label(int id) const { return modes_label(node(id).modes); }

bool DimensionTree::operator==(const DimensionTree& other) const {
  if (d_ != other.d_ || nodes_.size() != other.nodes_.size()) return false;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].modes != other.nodes_[i].modes || nodes_[i].children != other.nodes_[i].children) return false;
  }
  return true;
}

TreeStats tree_stats(const DimensionTree& tree) {
  TreeStats s;
  s.depth = tree.depth();
  s.arity = tree.arity();
  s.node_count = tree.size();
  for (int l = 0; l <= tree.depth(); ++l) {
    std::vector<Modes> lvl;
    for (int id : tree.level_nodes(l)) lvl.push_back(tree.node(id).modes);
    s.levels.push_back(std::move(lvl));
  }
  for (std::size_t id = 0; id < tree.size(); ++id)
    s.complements.push_back(id == 0 ? Modes{} : tree.complement(static_cast<int>(id)));
  return s;
}

std::string tree_to_json(const DimensionTree& tree) { return node_to_json(tree, tree.root()).dump(); }

DimensionTree tree_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  DimensionTree::ChildrenMap map;
  node_from_json(j, map);
  if (map.empty()) throw std::invalid_argument("tree json describes a single leaf");
  return DimensionTree::custom(map);
}

DimensionTree make_tree(const std::string& kind, int d) {
  if (kind == "trivial") return DimensionTree::trivial(d);
  if (kind == "linear") return DimensionTree::linear_binary(d);
  if (kind == "balanced") return DimensionTree::balanced_binary(d);
  throw std::invalid_argument("unknown tree kind '" + kind + "'");
}

}  // namespace treetn
