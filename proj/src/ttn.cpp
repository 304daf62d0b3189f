#include "treetn/ttn.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace treetn {

RankMap uniform_ranks(const DimensionTree& tree, int r) {
  if (r < 1) throw std::invalid_argument("ranks must be positive");
  RankMap ranks(tree.size(), r);
  ranks[static_cast<std::size_t>(tree.root())] = 1;
  return ranks;
}

RankMap level_ranks(const DimensionTree& tree, const std::vector<int>& per_level) {
  if (per_level.empty()) throw std::invalid_argument("level ranks must be nonempty");
  RankMap ranks(tree.size(), 1);
  for (std::size_t id = 1; id < tree.size(); ++id) {
    const auto level = static_cast<std::size_t>(tree.node(static_cast<int>(id)).level);
    const int r = per_level[std::min(level, per_level.size()) - 1];
    if (r < 1) throw std::invalid_argument("ranks must be positive");
    ranks[id] = r;
  }
  return ranks;
}

std::vector<std::string> admissibility_warnings(const DimensionTree& tree, const RankMap& ranks,
                                                std::span<const std::size_t> leaf_dims) {
  std::vector<std::string> out;
  for (std::size_t id = 1; id < tree.size(); ++id) {
    const auto& node = tree.node(static_cast<int>(id));
    const auto r = static_cast<std::size_t>(ranks[id]);
    if (node.children.empty()) {
      const auto nu = static_cast<std::size_t>(node.modes.front());
      if (nu < leaf_dims.size() && r > leaf_dims[nu])
        out.push_back("leaf " + tree.label(static_cast<int>(id)) + ": rank " + std::to_string(r) +
                      " exceeds basis dimension " + std::to_string(leaf_dims[nu]));
      continue;
    }
    std::size_t prod = 1;
    for (int c : node.children) prod *= static_cast<std::size_t>(ranks[static_cast<std::size_t>(c)]);
    if (r > prod)
      out.push_back("node " + tree.label(static_cast<int>(id)) + ": rank " + std::to_string(r) +
                    " exceeds the product of its children's ranks " + std::to_string(prod));
  }
  return out;
}

TreeTensorNetwork::TreeTensorNetwork(DimensionTree tree, std::vector<FullTensor> cores,
                                     std::vector<UnivariateBasis> bases)
    : tree_(std::move(tree)), cores_(std::move(cores)), bases_(std::move(bases)) {
  if (cores_.size() != tree_.size()) throw std::invalid_argument("network needs one component tensor per node");
  ranks_.assign(tree_.size(), 1);
  for (std::size_t id = 1; id < tree_.size(); ++id) {
    const auto& shape = cores_[id].shape();
    if (shape.empty()) throw std::invalid_argument("component tensor without rank axis");
    ranks_[id] = static_cast<int>(shape[0]);
  }
  for (std::size_t id = 0; id < tree_.size(); ++id) {
    const auto& node = tree_.node(static_cast<int>(id));
    const auto& shape = cores_[id].shape();
    const std::size_t offset = id == 0 ? 0 : 1;
    if (node.children.empty()) {
      if (shape.size() != 2) throw std::invalid_argument("leaf " + tree_.label(static_cast<int>(id)) + " needs an r x n matrix");
      continue;
    }
    if (shape.size() != offset + node.children.size())
      throw std::invalid_argument("component tensor at " + tree_.label(static_cast<int>(id)) + " has wrong order");
    for (std::size_t m = 0; m < node.children.size(); ++m) {
      if (shape[offset + m] != static_cast<std::size_t>(ranks_[static_cast<std::size_t>(node.children[m])]))
        throw std::invalid_argument("edge dimension mismatch between " + tree_.label(static_cast<int>(id)) + " and " +
                                    tree_.label(node.children[m]));
    }
  }
  if (!bases_.empty()) {
    if (bases_.size() != static_cast<std::size_t>(tree_.dimension()))
      throw std::invalid_argument("network needs one leaf basis per mode");
    const auto dims = leaf_dims();
    for (std::size_t nu = 0; nu < dims.size(); ++nu)
      if (static_cast<std::size_t>(bases_[nu].size()) != dims[nu])
        throw std::invalid_argument("leaf basis size mismatch in mode " + std::to_string(nu + 1));
  }
  warnings_ = admissibility_warnings(tree_, ranks_, leaf_dims());
}

std::vector<std::size_t> TreeTensorNetwork::leaf_dims() const {
  std::vector<std::size_t> dims(static_cast<std::size_t>(tree_.dimension()));
  for (int nu = 0; nu < tree_.dimension(); ++nu)
    dims[static_cast<std::size_t>(nu)] = cores_[static_cast<std::size_t>(tree_.leaf_of_mode(nu))].shape()[1];
  return dims;
}

namespace {

struct SparseEntry {
  std::size_t index;
  double value;
};

// Per-thread scratch space so that point evaluation does not allocate once
// warmed up; grid sweeps call evaluate millions of times.
struct Workspace {
  std::vector<Eigen::VectorXd> z;
  std::vector<std::vector<SparseEntry>> nz;
  std::vector<std::size_t> pos;
  Eigen::VectorXd phi;
};

Workspace& workspace() {
  thread_local Workspace ws;
  return ws;
}

void nonzeros(const Eigen::VectorXd& z, std::vector<SparseEntry>& out) {
  out.clear();
  for (Eigen::Index i = 0; i < z.size(); ++i)
    if (z[i] != 0.0) out.push_back({static_cast<std::size_t>(i), z[i]});
}

// out = G^alpha((z_beta)_beta), skipping zero entries of the child vectors.
void contract_node(const FullTensor& core, bool has_parent_axis, const std::vector<int>& children, Workspace& ws,
                   Eigen::VectorXd& out) {
  const auto& shape = core.shape();
  const std::size_t offset = has_parent_axis ? 1 : 0;
  const std::size_t rows = has_parent_axis ? shape[0] : 1;
  const std::size_t m = children.size();
  out.setZero(static_cast<Eigen::Index>(rows));
  if (ws.nz.size() < m) ws.nz.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    nonzeros(ws.z[static_cast<std::size_t>(children[k])], ws.nz[k]);
    if (ws.nz[k].empty()) return;
  }
  // row-major strides of the child axes
  std::size_t strides[16];
  if (m > 16) throw std::length_error("node arity above 16 is not supported");
  std::size_t stride = 1;
  for (std::size_t k = m; k-- > 0;) {
    strides[k] = stride;
    stride *= shape[offset + k];
  }
  const std::size_t row_stride = stride;
  const double* data = core.data().data();
  ws.pos.assign(m, 0);
  for (;;) {
    double w = 1.0;
    std::size_t at = 0;
    for (std::size_t k = 0; k < m; ++k) {
      const auto& e = ws.nz[k][ws.pos[k]];
      w *= e.value;
      at += e.index * strides[k];
    }
    for (std::size_t j = 0; j < rows; ++j) out[static_cast<Eigen::Index>(j)] += w * data[at + j * row_stride];
    std::size_t k = m;
    while (k-- > 0) {
      if (++ws.pos[k] < ws.nz[k].size()) break;
      ws.pos[k] = 0;
    }
    if (k == static_cast<std::size_t>(-1)) break;
  }
}

void leaf_apply(const FullTensor& core, const Eigen::VectorXd& phi, Eigen::VectorXd& z) {
  const std::size_t r = core.shape()[0], n = core.shape()[1];
  if (static_cast<std::size_t>(phi.size()) != n) throw std::invalid_argument("leaf vector dimension mismatch");
  z.setZero(static_cast<Eigen::Index>(r));
  const double* data = core.data().data();
  for (std::size_t i = 0; i < n; ++i) {
    const double p = phi[static_cast<Eigen::Index>(i)];
    if (p == 0.0) continue;
    for (std::size_t j = 0; j < r; ++j) z[static_cast<Eigen::Index>(j)] += data[j * n + i] * p;
  }
}

// leaf_vector(nu, phi) fills phi with the leaf vector of mode nu.
template <typename LeafVector>
double evaluate_tree(const DimensionTree& tree, const std::vector<FullTensor>& cores, LeafVector leaf_vector) {
  Workspace& ws = workspace();
  if (ws.z.size() < tree.size()) ws.z.resize(tree.size());
  for (std::size_t id = tree.size(); id-- > 0;) {
    const auto& node = tree.node(static_cast<int>(id));
    if (node.children.empty()) {
      leaf_vector(node.modes.front(), ws.phi);
      leaf_apply(cores[id], ws.phi, ws.z[id]);
    } else {
      contract_node(cores[id], id != 0, node.children, ws, ws.z[id]);
    }
  }
  return ws.z[0][0];
}

}  // namespace

double TreeTensorNetwork::evaluate(std::span<const double> x) const {
  if (bases_.empty()) throw std::logic_error("network has no leaf bases to evaluate");
  if (x.size() != bases_.size()) throw std::invalid_argument("point dimension mismatch");
  return evaluate_tree(tree_, cores_, [&](int nu, Eigen::VectorXd& phi) {
    bases_[static_cast<std::size_t>(nu)].values(x[static_cast<std::size_t>(nu)], phi);
  });
}

double TreeTensorNetwork::entry(std::span<const std::size_t> index) const {
  const auto dims = leaf_dims();
  if (index.size() != dims.size()) throw std::invalid_argument("index dimension mismatch");
  return evaluate_tree(tree_, cores_, [&](int nu, Eigen::VectorXd& e) {
    const auto k = static_cast<std::size_t>(nu);
    if (index[k] >= dims[k]) throw std::out_of_range("network index out of range");
    e.setZero(static_cast<Eigen::Index>(dims[k]));
    e[static_cast<Eigen::Index>(index[k])] = 1.0;
  });
}

FunctionHandle TreeTensorNetwork::as_function(std::string name) const {
  if (bases_.empty()) throw std::logic_error("network has no leaf bases to evaluate");
  Box box;
  for (const auto& b : bases_) box.push_back(b.interval());
  return FunctionHandle{[self = *this](std::span<const double> x) { return self.evaluate(x); }, std::move(box), false,
                        std::move(name)};
}

namespace {

// Frame of a subtree: r x (prod of leaf dims), columns ordered by `modes`.
struct Frame {
  FullTensor tensor;  // shape (r, n_{modes[0]}, n_{modes[1]}, ...) or without r at the root
  Modes modes;
};

Eigen::MatrixXd frame_matrix(const Frame& f) {
  const auto rows = static_cast<Eigen::Index>(f.tensor.shape()[0]);
  const auto cols = static_cast<Eigen::Index>(f.tensor.size()) / rows;
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  return Eigen::Map<const RowMajor>(f.tensor.data().data(), rows, cols);
}

}  // namespace

FullTensor to_full_tensor(const TreeTensorNetwork& v, bool orthonormal) {
  const auto& tree = v.tree();
  const auto dims = v.leaf_dims();
  Shape full_shape(dims.begin(), dims.end());
  shape_size(full_shape);

  std::vector<Frame> frames(tree.size());
  for (std::size_t id = tree.size(); id-- > 0;) {
    const auto& node = tree.node(static_cast<int>(id));
    if (node.children.empty()) {
      frames[id] = Frame{v.core(static_cast<int>(id)), node.modes};
      continue;
    }
    const std::size_t offset = id == 0 ? 0 : 1;
    FullTensor t = v.core(static_cast<int>(id));
    Modes modes;
    Shape shape;
    if (offset) shape.push_back(t.shape()[0]);
    for (std::size_t m = 0; m < node.children.size(); ++m) {
      auto& child = frames[static_cast<std::size_t>(node.children[m])];
      const Eigen::MatrixXd f = frame_matrix(child);
      t = mode_product(t, static_cast<int>(offset + m), f.transpose());
      modes.insert(modes.end(), child.modes.begin(), child.modes.end());
      for (int nu : child.modes) shape.push_back(dims[static_cast<std::size_t>(nu)]);
      child.tensor = FullTensor();
    }
    frames[id] = Frame{FullTensor(shape, std::vector<double>(t.data().begin(), t.data().end())), modes};
  }
  const Frame& root = frames[0];
  std::vector<int> perm(root.modes.size());
  for (std::size_t k = 0; k < root.modes.size(); ++k) perm[static_cast<std::size_t>(root.modes[k])] = static_cast<int>(k);
  FullTensor out = permute(root.tensor, perm);
  out.set_orthonormal(orthonormal);
  return out;
}

std::size_t complexity_N(const DimensionTree& tree, const RankMap& ranks, std::span<const std::size_t> leaf_dims) {
  if (ranks.size() != tree.size()) throw std::invalid_argument("rank map size does not match tree");
  if (leaf_dims.size() != static_cast<std::size_t>(tree.dimension()))
    throw std::invalid_argument("leaf dimension count does not match tree");
  std::size_t total = 0;
  for (std::size_t id = 0; id < tree.size(); ++id) {
    const auto& node = tree.node(static_cast<int>(id));
    const std::size_t r = id == 0 ? 1 : static_cast<std::size_t>(ranks[id]);
    if (node.children.empty()) {
      total += r * leaf_dims[static_cast<std::size_t>(node.modes.front())];
      continue;
    }
    std::size_t prod = r;
    for (int c : node.children) prod *= static_cast<std::size_t>(ranks[static_cast<std::size_t>(c)]);
    total += prod;
  }
  return total;
}

RankMap measured_ranks(const FullTensor& a, const DimensionTree& tree) {
  if (a.order() != static_cast<std::size_t>(tree.dimension())) throw std::invalid_argument("tensor order does not match tree");
  RankMap ranks(tree.size(), 1);
  for (std::size_t id = 1; id < tree.size(); ++id) {
    const auto sigma = singular_values(matricize(a, tree.node(static_cast<int>(id)).modes));
    ranks[id] = numerical_rank(sigma);
  }
  return ranks;
}

void save_network(const TreeTensorNetwork& v, const std::string& directory) {
  namespace fs = std::filesystem;
  fs::create_directories(directory);
  nlohmann::json manifest;
  manifest["format"] = "treetn-network";
  manifest["version"] = 1;
  manifest["tree"] = nlohmann::json::parse(tree_to_json(v.tree()));
  nlohmann::json cores = nlohmann::json::array();
  for (std::size_t id = 0; id < v.tree().size(); ++id) {
    const std::string file = "core_" + std::to_string(id) + ".bin";
    write_tensor_binary(v.core(static_cast<int>(id)), (fs::path(directory) / file).string());
    nlohmann::json modes = nlohmann::json::array();
    for (int m : v.tree().node(static_cast<int>(id)).modes) modes.push_back(m + 1);
    cores.push_back({{"node", modes}, {"rank", v.ranks()[id]}, {"shape", v.core(static_cast<int>(id)).shape()}, {"file", file}});
  }
  manifest["cores"] = cores;
  nlohmann::json bases = nlohmann::json::array();
  for (const auto& b : v.bases())
    bases.push_back({{"kind", to_string(b.kind())},
                     {"n", b.size()},
                     {"interval", {b.interval().lo, b.interval().hi}},
                     {"normalized", b.normalized()}});
  manifest["bases"] = bases;
  std::ofstream os(fs::path(directory) / "manifest.json");
  if (!os) throw std::runtime_error("cannot write network manifest in " + directory);
  os << manifest.dump(2) << "\n";
}

TreeTensorNetwork load_network(const std::string& directory) {
  namespace fs = std::filesystem;
  std::ifstream is(fs::path(directory) / "manifest.json");
  if (!is) throw std::runtime_error("cannot read network manifest in " + directory);
  const auto manifest = nlohmann::json::parse(is);
  if (manifest.value("format", "") != "treetn-network") throw std::runtime_error("not a network manifest");
  DimensionTree tree = tree_from_json(manifest.at("tree").dump());
  std::vector<FullTensor> cores(tree.size());
  for (const auto& c : manifest.at("cores")) {
    Modes modes;
    for (int m : c.at("node")) modes.push_back(m - 1);
    const int id = tree.find(modes);
    if (id < 0) throw std::runtime_error("manifest core refers to unknown node");
    cores[static_cast<std::size_t>(id)] = read_tensor_binary((fs::path(directory) / c.at("file").get<std::string>()).string());
  }
  std::vector<UnivariateBasis> bases;
  for (const auto& b : manifest.at("bases")) {
    const auto iv = b.at("interval");
    bases.emplace_back(basis_kind_from_string(b.at("kind")), b.at("n").get<int>(), Interval{iv[0], iv[1]},
                       b.at("normalized").get<bool>());
  }
  return TreeTensorNetwork(std::move(tree), std::move(cores), std::move(bases));
}

}  // namespace treetn
