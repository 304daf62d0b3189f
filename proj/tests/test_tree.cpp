#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "treetn/tree.hpp"

using namespace treetn;

namespace {

std::set<Modes> node_set(const DimensionTree& t) {
  std::set<Modes> out;
  for (const auto& n : t.nodes()) out.insert(n.modes);
  return out;
}

void check_partition_invariants(const DimensionTree& t) {
  for (std::size_t id = 0; id < t.size(); ++id) {
    const auto& n = t.node(static_cast<int>(id));
    if (n.children.empty()) {
      CHECK(n.modes.size() == 1);
      continue;
    }
    CHECK(n.children.size() >= 2);
    Modes merged;
    for (int c : n.children) {
      CHECK(t.node(c).parent == static_cast<int>(id));
      CHECK(t.node(c).level == n.level + 1);
      merged.insert(merged.end(), t.node(c).modes.begin(), t.node(c).modes.end());
    }
    std::sort(merged.begin(), merged.end());
    CHECK(merged == n.modes);
  }
}

}  // namespace

TEST_CASE("trivial tree") {
  const auto t3 = DimensionTree::trivial(3);
  CHECK(node_set(t3) == std::set<Modes>{{0, 1, 2}, {0}, {1}, {2}});
  CHECK(t3.depth() == 1);
  CHECK(node_set(DimensionTree::trivial(2)) == std::set<Modes>{{0, 1}, {0}, {1}});
  const auto t5 = DimensionTree::trivial(5);
  CHECK(t5.arity() == 5);
  CHECK(t5.size() == 6);
  CHECK_THROWS_AS(DimensionTree::trivial(1), std::invalid_argument);
}

TEST_CASE("linear binary tree") {
  const auto t4 = DimensionTree::linear_binary(4);
  CHECK(t4.depth() == 3);
  CHECK(t4.size() == 7);
  CHECK(DimensionTree::linear_binary(2) == DimensionTree::trivial(2));
  const auto t5 = DimensionTree::linear_binary(5);
  std::vector<Modes> level2;
  for (int id : t5.level_nodes(2)) level2.push_back(t5.node(id).modes);
  CHECK(level2 == std::vector<Modes>{{0, 1, 2}, {3}});
  for (int d = 2; d <= 12; ++d) {
    const auto t = DimensionTree::linear_binary(d);
    CHECK(t.size() == static_cast<std::size_t>(2 * d - 1));
    for (int l = 1; l <= d - 1; ++l) {
      std::vector<Modes> got;
      for (int id : t.level_nodes(l)) got.push_back(t.node(id).modes);
      Modes head;
      for (int m = 0; m < d - l; ++m) head.push_back(m);
      CHECK(got == std::vector<Modes>{head, {d - l}});
    }
  }
  CHECK_THROWS_AS(DimensionTree::linear_binary(1), std::invalid_argument);
}

TEST_CASE("balanced binary tree") {
  CHECK(DimensionTree::balanced_binary(4).depth() == 2);
  CHECK(DimensionTree::balanced_binary(2).depth() == 1);
  const auto t5 = DimensionTree::balanced_binary(5);
  CHECK(t5.depth() == 3);
  const auto& root = t5.node(0);
  REQUIRE(root.children.size() == 2);
  CHECK(t5.node(root.children[0]).modes == Modes{0, 1, 2});
  CHECK(t5.node(root.children[1]).modes == Modes{3, 4});
  for (int d = 2; d <= 64; ++d) {
    const auto t = DimensionTree::balanced_binary(d);
    CHECK(t.depth() == static_cast<int>(std::ceil(std::log2(d))));
    for (int l = 0; l <= t.depth(); ++l) {
      CHECK(t.level_nodes(l).size() <= (std::size_t{1} << l));
      const auto cap = static_cast<std::size_t>(std::ceil(d / std::pow(2.0, l)));
      for (int id : t.level_nodes(l)) CHECK(t.node(id).modes.size() <= cap);
    }
    check_partition_invariants(t);
  }
  CHECK_THROWS_AS(DimensionTree::balanced_binary(0), std::invalid_argument);
}

TEST_CASE("custom tree from an explicit listing") {
  const DimensionTree::ChildrenMap figure{{{0, 1, 2, 3, 4}, {{0, 1, 2}, {3, 4}}},
                                          {{0, 1, 2}, {{0}, {1, 2}}},
                                          {{1, 2}, {{1}, {2}}},
                                          {{3, 4}, {{3}, {4}}}};
  const auto t = DimensionTree::custom(figure);
  CHECK(t.depth() == 3);
  CHECK(t.size() == 9);
  check_partition_invariants(t);
  CHECK(DimensionTree::custom({{{0, 1}, {{0}, {1}}}}) == DimensionTree::trivial(2));
  CHECK_THROWS_AS(DimensionTree::custom({{{0, 1, 2}, {{0, 1}, {1, 2}}}, {{0, 1}, {{0}, {1}}}, {{1, 2}, {{1}, {2}}}}),
                  std::invalid_argument);
  // non-singleton leaf
  CHECK_THROWS_AS(DimensionTree::custom({{{0, 1, 2}, {{0}, {1, 2}}}}), std::invalid_argument);
  // children do not cover the parent
  CHECK_THROWS_AS(DimensionTree::custom({{{0, 1, 2}, {{0}, {1}}}}), std::invalid_argument);
  // single child
  CHECK_THROWS_AS(DimensionTree::custom({{{0, 1}, {{0, 1}}}}), std::invalid_argument);
}

TEST_CASE("tree statistics and complements") {
  const auto s = tree_stats(DimensionTree::balanced_binary(4));
  CHECK(s.depth == 2);
  CHECK(s.arity == 2);
  CHECK(s.node_count == 7);
  CHECK(s.levels[1] == std::vector<Modes>{{0, 1}, {2, 3}});
  const auto s6 = tree_stats(DimensionTree::trivial(6));
  CHECK(s6.arity == 6);
  CHECK(s6.node_count == 7);
  const auto t = DimensionTree::balanced_binary(4);
  CHECK(t.complement(Modes{0, 1}) == Modes{2, 3});
  for (const auto* tree : {&t}) {
    for (std::size_t id = 1; id < tree->size(); ++id) {
      const auto& m = tree->node(static_cast<int>(id)).modes;
      CHECK(tree->complement(tree->complement(m)) == m);
    }
  }
}

TEST_CASE("json round trip and labels") {
  const auto t = DimensionTree::balanced_binary(5);
  const auto text = tree_to_json(t);
  CHECK(text.rfind("[[1,2,3,4,5],", 0) == 0);
  CHECK(tree_from_json(text) == t);
  CHECK(t.label(0) == "{1,2,3,4,5}");
  CHECK(modes_label({0, 2}) == "{1,3}");
  CHECK(make_tree("linear", 4) == DimensionTree::linear_binary(4));
  CHECK_THROWS_AS(make_tree("star", 4), std::invalid_argument);
  CHECK_THROWS(tree_from_json("[[1,2],[[1]],[[3]]]"));
}
