#pragma once

#include <cstddef>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "treetn/discretize.hpp"
#include "treetn/tensor.hpp"
#include "treetn/tree.hpp"
#include "treetn/ttn.hpp"

namespace treetn {

/// Singular values and tails of one alpha-matricization.
struct NodeWidths {
  Modes modes;
  std::vector<double> sigma;  // nonincreasing, sigma[k-1] = sigma_k
  std::vector<double> delta;  // delta[n] = sqrt(sum_{k>n} sigma_k^2), n = 0..sigma.size()

  /// delta_n for any n >= 0 (zero beyond the rank).
  double width(std::size_t n) const { return n < delta.size() ? delta[n] : 0.0; }
};

NodeWidths width_of(const FullTensor& a, const Modes& modes);

/// Widths for every node of a tree except the root.
struct WidthProfile {
  DimensionTree tree;
  std::vector<NodeWidths> nodes;  // indexed by node id; the root entry is empty

  double delta(int node, std::size_t n) const { return nodes.at(static_cast<std::size_t>(node)).width(n); }
};

/// Requires orthonormal coefficients; the overload with bases applies the
/// Gram correction first.
WidthProfile width_profile(const FullTensor& a, const DimensionTree& tree);
WidthProfile width_profile(const FullTensor& a, const DimensionTree& tree, std::span<const UnivariateBasis> bases);

/// CSV rows `"{1,2}",n,sigma_n,delta_n` for n = 1..rank, after a header line.
void write_width_csv(const WidthProfile& profile, std::ostream& os);

/// Leaf spaces U_nu spanned by the first leaf_dims[nu] coordinate vectors.
struct LeafDiscretization {
  std::vector<std::size_t> dims;
  std::vector<double> errors;  // ||f - P_{U_nu} f|| per mode
};

LeafDiscretization leaf_discretization(const FullTensor& a, std::vector<std::size_t> dims);

struct ProjectionOptions {
  bool reverse_within_level = false;
  std::vector<std::size_t> leaf_dims;  // empty: no leaf-space projection
};

/// f_r = P_{L+1} P_L ... P_1 f with principal subspaces of the original
/// tensor. If leaf_dims equals the leaf ranks, U_nu replaces V_nu and
/// P_{L+1} is the identity.
FullTensor project_tensor(const FullTensor& a, const DimensionTree& tree, const RankMap& ranks,
                          const ProjectionOptions& options = {});

struct Projection {
  TreeTensorNetwork network;
  FullTensor approximation;  // f_r over the full coefficient shape
  RankMap ranks;             // ranks actually used after clamping
  std::vector<std::string> notices;
};

/// Projection followed by factorization into component tensors. With leaf
/// dims the network's leaf matrices are r_nu x leaf_dims[nu].
Projection project_to_tree(const FullTensor& a, const DimensionTree& tree, const RankMap& ranks,
                           const ProjectionOptions& options = {});

/// Exact factorization of a tensor whose alpha-ranks are at most `ranks`.
TreeTensorNetwork factorize(const FullTensor& a, const DimensionTree& tree, const RankMap& ranks);

enum class BoundMode { RanksOnly, WithLeaves };

/// sqrt(sum_{alpha in A minus D} delta_{r_alpha}^2), plus the leaf terms in
/// WithLeaves mode, where A = I(T) when every dims[nu] == r_nu and A = T
/// otherwise.
double error_bound_rhs(const WidthProfile& profile, const RankMap& ranks, BoundMode mode = BoundMode::RanksOnly,
                       const LeafDiscretization& leaves = {});

}  // namespace treetn
