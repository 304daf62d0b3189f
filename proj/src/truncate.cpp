#include "treetn/truncate.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <stdexcept>

namespace treetn {

NodeWidths width_of(const FullTensor& a, const Modes& modes) {
  NodeWidths w;
  w.modes = modes;
  w.sigma = singular_values(matricize(a, modes));
  w.delta.assign(w.sigma.size() + 1, 0.0);
  // accumulate from the smallest value up for accuracy in the tail
  double tail = 0.0;
  for (std::size_t k = w.sigma.size(); k-- > 0;) {
    tail += w.sigma[k] * w.sigma[k];
    w.delta[k] = std::sqrt(tail);
  }
  return w;
}

WidthProfile width_profile(const FullTensor& a, const DimensionTree& tree) {
  if (!a.orthonormal())
    throw std::invalid_argument("width_profile needs orthonormal coefficients; pass the bases for a Gram correction");
  if (a.order() != static_cast<std::size_t>(tree.dimension())) throw std::invalid_argument("tensor order does not match tree");
  WidthProfile p{tree, std::vector<NodeWidths>(tree.size())};
  p.nodes[0].modes = tree.node(0).modes;
  for (std::size_t id = 1; id < tree.size(); ++id) p.nodes[id] = width_of(a, tree.node(static_cast<int>(id)).modes);
  return p;
}

WidthProfile width_profile(const FullTensor& a, const DimensionTree& tree, std::span<const UnivariateBasis> bases) {
  return width_profile(a.orthonormal() ? a : orthonormalize(a, bases), tree);
}

void write_width_csv(const WidthProfile& profile, std::ostream& os) {
  os << "node,n,sigma,delta\n";
  const auto precision = os.precision(17);
  for (std::size_t id = 1; id < profile.nodes.size(); ++id) {
    const auto& w = profile.nodes[id];
    const std::string label = "\"" + modes_label(w.modes) + "\"";
    for (std::size_t n = 1; n <= w.sigma.size(); ++n) os << label << ',' << n << ',' << w.sigma[n - 1] << ',' << w.delta[n] << '\n';
  }
  os.precision(precision);
}

LeafDiscretization leaf_discretization(const FullTensor& a, std::vector<std::size_t> dims) {
  if (dims.size() != a.order()) throw std::invalid_argument("one leaf dimension per mode required");
  LeafDiscretization out{std::move(dims), {}};
  for (std::size_t nu = 0; nu < a.order(); ++nu) {
    const std::size_t m = out.dims[nu];
    if (m < 1 || m > a.shape()[nu]) throw std::invalid_argument("leaf dimension out of range in mode " + std::to_string(nu + 1));
    if (a.order() == 1) {
      double s = 0.0;
      for (std::size_t i = m; i < a.size(); ++i) s += a[i] * a[i];
      out.errors.push_back(std::sqrt(s));
      continue;
    }
    const auto mat = matricize(a, {static_cast<int>(nu)});
    const auto rows = static_cast<Eigen::Index>(m);
    out.errors.push_back(mat.matrix.bottomRows(mat.matrix.rows() - rows).norm());
  }
  return out;
}

namespace {

void check_inputs(const FullTensor& a, const DimensionTree& tree, const RankMap& ranks) {
  if (a.order() != static_cast<std::size_t>(tree.dimension())) throw std::invalid_argument("tensor order does not match tree");
  if (ranks.size() != tree.size()) throw std::invalid_argument("rank map size does not match tree");
  for (std::size_t id = 1; id < tree.size(); ++id)
    if (ranks[id] < 1) throw std::invalid_argument("ranks must be positive");
}

bool leaves_replace(const DimensionTree& tree, const RankMap& ranks, const std::vector<std::size_t>& leaf_dims) {
  if (leaf_dims.empty()) return false;
  for (int nu = 0; nu < tree.dimension(); ++nu)
    if (leaf_dims[static_cast<std::size_t>(nu)] != static_cast<std::size_t>(ranks[static_cast<std::size_t>(tree.leaf_of_mode(nu))]))
      return false;
  return true;
}

struct Subspaces {
  std::vector<Eigen::MatrixXd> v;  // per node id, empty at the root
  RankMap used;
  std::vector<std::string> notices;
};

Subspaces principal_subspaces(const FullTensor& a, const DimensionTree& tree, const RankMap& ranks,
                              const std::vector<std::size_t>& leaf_dims) {
  const bool replace = leaves_replace(tree, ranks, leaf_dims);
  Subspaces s{std::vector<Eigen::MatrixXd>(tree.size()), RankMap(tree.size(), 1), {}};
  for (std::size_t id = 1; id < tree.size(); ++id) {
    const auto& node = tree.node(static_cast<int>(id));
    if (replace && node.children.empty()) {
      const auto n = static_cast<Eigen::Index>(a.shape()[static_cast<std::size_t>(node.modes.front())]);
      const auto m = static_cast<Eigen::Index>(leaf_dims[static_cast<std::size_t>(node.modes.front())]);
      s.v[id] = Eigen::MatrixXd::Identity(n, m);
      s.used[id] = static_cast<int>(m);
      continue;
    }
    const auto mat = matricize(a, node.modes);
    const int rank = std::max(1, numerical_rank(singular_values(mat)));
    const int r = std::min(ranks[id], rank);
    if (r < ranks[id])
      s.notices.push_back("rank at " + tree.label(static_cast<int>(id)) + " clamped from " + std::to_string(ranks[id]) + " to " +
                          std::to_string(r));
    s.v[id] = principal_subspace(mat, r);
    s.used[id] = r;
  }
  return s;
}

void project_node(FullTensor& f, const Modes& modes, const Eigen::MatrixXd& v) {
  auto mat = matricize(f, modes);
  mat.matrix = v * (v.transpose() * mat.matrix);
  const bool ortho = f.orthonormal();
  f = unmatricize(mat);
  f.set_orthonormal(ortho);
}

FullTensor from_row_major(Shape shape, const Eigen::MatrixXd& m) {
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const RowMajor rm = m;
  return FullTensor(std::move(shape), std::vector<double>(rm.data(), rm.data() + rm.size()));
}

Eigen::MatrixXd range_basis(const FullTensor& a, const Modes& modes, int cap) {
  const auto mat = matricize(a, modes);
  const int rank = std::max(1, numerical_rank(singular_values(mat)));
  return principal_subspace(mat, std::min(cap, rank));
}

// Reorders `t` (axes: leading axes, then the sorted modes of `modes`) so the
// modes are grouped by child, and reshapes each group into one axis.
FullTensor group_by_children(const FullTensor& t, std::size_t leading, const Modes& modes, const std::vector<Modes>& groups,
                             const Shape& mode_dims) {
  std::vector<int> perm;
  for (std::size_t k = 0; k < leading; ++k) perm.push_back(static_cast<int>(k));
  Shape shape(t.shape().begin(), t.shape().begin() + static_cast<std::ptrdiff_t>(leading));
  for (const auto& g : groups) {
    std::size_t n = 1;
    for (int nu : g) {
      const auto pos = std::lower_bound(modes.begin(), modes.end(), nu) - modes.begin();
      perm.push_back(static_cast<int>(leading + static_cast<std::size_t>(pos)));
      n *= mode_dims[static_cast<std::size_t>(nu)];
    }
    shape.push_back(n);
  }
  const FullTensor p = permute(t, perm);
  return FullTensor(std::move(shape), std::vector<double>(p.data().begin(), p.data().end()));
}

}  // namespace

FullTensor project_tensor(const FullTensor& a, const DimensionTree& tree, const RankMap& ranks, const ProjectionOptions& options) {
  check_inputs(a, tree, ranks);
  if (!a.orthonormal()) throw std::invalid_argument("projection needs orthonormal coefficients");
  if (!options.leaf_dims.empty()) leaf_discretization(a, options.leaf_dims);  // validates
  const auto sub = principal_subspaces(a, tree, ranks, options.leaf_dims);
  FullTensor f = a;
  for (int level = 1; level <= tree.depth(); ++level) {
    auto ids = tree.level_nodes(level);
    if (options.reverse_within_level) std::reverse(ids.begin(), ids.end());
    for (int id : ids) project_node(f, tree.node(id).modes, sub.v[static_cast<std::size_t>(id)]);
  }
  if (!options.leaf_dims.empty() && !leaves_replace(tree, ranks, options.leaf_dims)) {
    for (std::size_t nu = 0; nu < a.order(); ++nu) {
      const auto n = static_cast<Eigen::Index>(a.shape()[nu]);
      project_node(f, {static_cast<int>(nu)}, Eigen::MatrixXd::Identity(n, static_cast<Eigen::Index>(options.leaf_dims[nu])));
    }
  }
  return f;
}

TreeTensorNetwork factorize(const FullTensor& a, const DimensionTree& tree, const RankMap& ranks) {
  check_inputs(a, tree, ranks);
  const Shape& dims = a.shape();
  std::vector<Eigen::MatrixXd> w(tree.size());
  for (std::size_t id = 1; id < tree.size(); ++id) w[id] = range_basis(a, tree.node(static_cast<int>(id)).modes, ranks[id]);

  std::vector<FullTensor> cores(tree.size());
  for (std::size_t id = 0; id < tree.size(); ++id) {
    const auto& node = tree.node(static_cast<int>(id));
    if (node.children.empty()) {
      cores[id] = from_row_major({static_cast<std::size_t>(w[id].cols()), dims[static_cast<std::size_t>(node.modes.front())]},
                                 w[id].transpose());
      continue;
    }
    std::vector<Modes> groups;
    for (int c : node.children) groups.push_back(tree.node(c).modes);
    FullTensor t;
    std::size_t leading = 0;
    if (id == 0) {
      t = group_by_children(a, 0, node.modes, groups, dims);
    } else {
      // W_alpha as a tensor (n_modes..., r) moved to (r, n_modes...)
      Shape shape;
      for (int nu : node.modes) shape.push_back(dims[static_cast<std::size_t>(nu)]);
      shape.push_back(static_cast<std::size_t>(w[id].cols()));
      const FullTensor wt = from_row_major(shape, w[id]);
      std::vector<int> perm{static_cast<int>(node.modes.size())};
      for (std::size_t k = 0; k < node.modes.size(); ++k) perm.push_back(static_cast<int>(k));
      t = group_by_children(permute(wt, perm), 1, node.modes, groups, dims);
      leading = 1;
    }
    for (std::size_t m = 0; m < node.children.size(); ++m)
      t = mode_product(t, static_cast<int>(leading + m), w[static_cast<std::size_t>(node.children[m])].transpose());
    cores[id] = std::move(t);
  }
  return TreeTensorNetwork(tree, std::move(cores));
}

Projection project_to_tree(const FullTensor& a, const DimensionTree& tree, const RankMap& ranks, const ProjectionOptions& options) {
  FullTensor f = project_tensor(a, tree, ranks, options);
  auto sub = principal_subspaces(a, tree, ranks, options.leaf_dims);
  TreeTensorNetwork net = factorize(f, tree, sub.used);
  if (!options.leaf_dims.empty()) {
    auto cores = net.cores();
    for (int nu = 0; nu < tree.dimension(); ++nu) {
      auto& core = cores[static_cast<std::size_t>(tree.leaf_of_mode(nu))];
      const std::size_t r = core.shape()[0], n = core.shape()[1], m = options.leaf_dims[static_cast<std::size_t>(nu)];
      std::vector<double> data(r * m);
      for (std::size_t j = 0; j < r; ++j)
        for (std::size_t i = 0; i < m; ++i) data[j * m + i] = core[j * n + i];
      core = FullTensor({r, m}, std::move(data));
    }
    net = TreeTensorNetwork(tree, std::move(cores));
  }
  return Projection{std::move(net), std::move(f), std::move(sub.used), std::move(sub.notices)};
}

double error_bound_rhs(const WidthProfile& profile, const RankMap& ranks, BoundMode mode, const LeafDiscretization& leaves) {
  const auto& tree = profile.tree;
  if (ranks.size() != tree.size()) throw std::invalid_argument("rank map size does not match tree");
  double sum = 0.0;
  bool skip_leaves = false;
  if (mode == BoundMode::WithLeaves) {
    if (leaves.dims.size() != static_cast<std::size_t>(tree.dimension()) || leaves.errors.size() != leaves.dims.size())
      throw std::invalid_argument("leaf discretization does not match tree");
    skip_leaves = leaves_replace(tree, ranks, leaves.dims);
    for (double e : leaves.errors) sum += e * e;
  }
  for (std::size_t id = 1; id < tree.size(); ++id) {
    if (skip_leaves && tree.is_leaf(static_cast<int>(id))) continue;
    if (ranks[id] < 0) throw std::invalid_argument("ranks must be nonnegative");
    const double d = profile.delta(static_cast<int>(id), static_cast<std::size_t>(ranks[id]));
    sum += d * d;
  }
  return std::sqrt(sum);
}

}  // namespace treetn
