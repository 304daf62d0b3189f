#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "treetn/discretize.hpp"
#include "treetn/tensor.hpp"
#include "treetn/tree.hpp"

namespace treetn {

/// Rank per node id. The root entry is always 1.
using RankMap = std::vector<int>;

RankMap uniform_ranks(const DimensionTree& tree, int r);

/// Ranks given per level: level_ranks[l] applies to every node of T_l
/// (l >= 1); missing trailing levels repeat the last value.
RankMap level_ranks(const DimensionTree& tree, const std::vector<int>& per_level);

/// Necessary admissibility conditions that fail for `ranks`: interior
/// r_alpha <= prod of children ranks, leaf r_nu <= n_nu. Empty when none fail.
std::vector<std::string> admissibility_warnings(const DimensionTree& tree, const RankMap& ranks,
                                                std::span<const std::size_t> leaf_dims);

/// Tree tensor network: a component tensor per node.
///
/// Axis order of every component is the parent rank index first (absent at
/// the root), then one axis per child in sorted-node order. Leaf components
/// are r_nu x n_nu matrices mapping the basis vector phi^nu(x_nu) to rank
/// space.
class TreeTensorNetwork {
 public:
  TreeTensorNetwork(DimensionTree tree, std::vector<FullTensor> cores, std::vector<UnivariateBasis> bases = {});

  const DimensionTree& tree() const { return tree_; }
  const RankMap& ranks() const { return ranks_; }
  const FullTensor& core(int node) const { return cores_.at(static_cast<std::size_t>(node)); }
  const std::vector<FullTensor>& cores() const { return cores_; }
  const std::vector<UnivariateBasis>& bases() const { return bases_; }
  bool has_bases() const { return !bases_.empty(); }
  std::vector<std::size_t> leaf_dims() const;

  /// Admissibility notices collected at construction.
  const std::vector<std::string>& warnings() const { return warnings_; }

  /// Function value at x; requires leaf bases.
  double evaluate(std::span<const double> x) const;
  /// Coefficient-tensor entry at a multi-index over the leaf dimensions.
  double entry(std::span<const std::size_t> index) const;

  /// Evaluation wrapped as a FunctionHandle over the bases' box.
  FunctionHandle as_function(std::string name = "network") const;

 private:
  DimensionTree tree_;
  RankMap ranks_;
  std::vector<FullTensor> cores_;
  std::vector<UnivariateBasis> bases_;
  std::vector<std::string> warnings_;
};

/// Contracts the network into its coefficient tensor over the leaf bases.
FullTensor to_full_tensor(const TreeTensorNetwork& v, bool orthonormal = true);

/// sum over interior alpha of r_alpha prod_{beta in S(alpha)} r_beta plus
/// sum over leaves of r_nu n_nu, with r_D = 1.
std::size_t complexity_N(const DimensionTree& tree, const RankMap& ranks, std::span<const std::size_t> leaf_dims);
inline std::size_t complexity_N(const TreeTensorNetwork& v) {
  const auto n = v.leaf_dims();
  return complexity_N(v.tree(), v.ranks(), n);
}

/// Numerical alpha-rank of every node (threshold kRankThreshold * sigma_1).
RankMap measured_ranks(const FullTensor& a, const DimensionTree& tree);

// Directory layout: manifest.json (tree, ranks, bases, core index) plus one
// core_<id>.bin per node in the tensor binary format.
void save_network(const TreeTensorNetwork& v, const std::string& directory);
TreeTensorNetwork load_network(const std::string& directory);

}  // namespace treetn
