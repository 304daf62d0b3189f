#include "treetn/tensor.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

namespace treetn {

namespace {

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename T>
T to_little_endian(T value) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    std::reverse(bytes, bytes + sizeof(T));
    std::memcpy(&value, bytes, sizeof(T));
  }
  return value;
}

template <typename T>
void write_le(std::ostream& os, T value) {
  value = to_little_endian(value);
  os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_le(std::istream& is) {
  T value{};
  is.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!is) throw std::runtime_error("tensor binary: unexpected end of file");
  return to_little_endian(value);
}

void check_finite(const Eigen::MatrixXd& m) {
  if (!m.allFinite()) throw std::domain_error("matrix contains NaN or Inf");
}

}  // namespace

std::size_t shape_size(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t s : shape) {
    if (s == 0) throw std::invalid_argument("tensor dimensions must be positive");
    if (n > kMaxDenseEntries / s) throw std::length_error("dense tensor exceeds the entry budget");
    n *= s;
  }
  if (n > kMaxDenseEntries) throw std::length_error("dense tensor exceeds the entry budget");
  return n;
}

FullTensor::FullTensor(Shape shape, bool orthonormal)
    : shape_(std::move(shape)), data_(shape_size(shape_), 0.0), orthonormal_(orthonormal) {}

FullTensor::FullTensor(Shape shape, std::vector<double> data, bool orthonormal)
    : shape_(std::move(shape)), data_(std::move(data)), orthonormal_(orthonormal) {
  if (data_.size() != shape_size(shape_)) throw std::invalid_argument("tensor data length does not match shape");
}

std::vector<std::size_t> FullTensor::strides() const {
  std::vector<std::size_t> st(shape_.size(), 1);
  for (std::size_t k = shape_.size(); k-- > 1;) st[k - 1] = st[k] * shape_[k];
  return st;
}

std::size_t FullTensor::flat_index(std::span<const std::size_t> index) const {
  if (index.size() != shape_.size()) throw std::invalid_argument("index order does not match tensor order");
  std::size_t flat = 0;
  for (std::size_t k = 0; k < shape_.size(); ++k) {
    if (index[k] >= shape_[k]) throw std::out_of_range("tensor index out of range");
    flat = flat * shape_[k] + index[k];
  }
  return flat;
}

double FullTensor::norm() const {
  return Eigen::Map<const Eigen::VectorXd>(data_.data(), static_cast<Eigen::Index>(data_.size())).norm();
}

double distance(const FullTensor& a, const FullTensor& b) {
  if (a.shape() != b.shape()) throw std::invalid_argument("distance: shape mismatch");
  const auto n = static_cast<Eigen::Index>(a.size());
  return (Eigen::Map<const Eigen::VectorXd>(a.data().data(), n) - Eigen::Map<const Eigen::VectorXd>(b.data().data(), n))
      .norm();
}

FullTensor permute(const FullTensor& a, std::span<const int> perm) {
  const std::size_t d = a.order();
  if (perm.size() != d) throw std::invalid_argument("permutation length does not match tensor order");
  std::vector<bool> used(d, false);
  for (int p : perm) {
    if (p < 0 || static_cast<std::size_t>(p) >= d || used[static_cast<std::size_t>(p)])
      throw std::invalid_argument("invalid axis permutation");
    used[static_cast<std::size_t>(p)] = true;
  }
  Shape out_shape(d);
  const auto in_strides = a.strides();
  std::vector<std::size_t> src_stride(d);
  for (std::size_t k = 0; k < d; ++k) {
    out_shape[k] = a.shape()[static_cast<std::size_t>(perm[k])];
    src_stride[k] = in_strides[static_cast<std::size_t>(perm[k])];
  }
  FullTensor out(out_shape, a.orthonormal());
  if (d == 0) return out;
  std::vector<std::size_t> idx(d, 0);
  std::size_t src = 0;
  const auto in = a.data();
  auto dst = out.data();
  const std::size_t last = d - 1;
  for (std::size_t flat = 0; flat < out.size();) {
    // innermost axis handled as a strided run
    const std::size_t run = out_shape[last];
    const std::size_t stride = src_stride[last];
    for (std::size_t i = 0; i < run; ++i) dst[flat + i] = in[src + i * stride];
    flat += run;
    for (std::size_t k = last; k-- > 0;) {
      ++idx[k];
      src += src_stride[k];
      if (idx[k] < out_shape[k]) break;
      src -= src_stride[k] * out_shape[k];
      idx[k] = 0;
    }
  }
  return out;
}

FullTensor mode_product(const FullTensor& a, int axis, const Eigen::MatrixXd& m) {
  if (axis < 0 || static_cast<std::size_t>(axis) >= a.order()) throw std::invalid_argument("mode_product: bad axis");
  const auto ax = static_cast<std::size_t>(axis);
  if (static_cast<std::size_t>(m.cols()) != a.shape()[ax])
    throw std::invalid_argument("mode_product: matrix columns do not match axis dimension");
  std::size_t outer = 1, inner = 1;
  for (std::size_t k = 0; k < ax; ++k) outer *= a.shape()[k];
  for (std::size_t k = ax + 1; k < a.order(); ++k) inner *= a.shape()[k];
  Shape out_shape = a.shape();
  out_shape[ax] = static_cast<std::size_t>(m.rows());
  FullTensor out(out_shape, a.orthonormal());
  const auto old_dim = static_cast<Eigen::Index>(a.shape()[ax]);
  const auto new_dim = static_cast<Eigen::Index>(m.rows());
  const auto q = static_cast<Eigen::Index>(inner);
  for (std::size_t p = 0; p < outer; ++p) {
    Eigen::Map<const RowMajorMatrix> src(a.data().data() + p * a.shape()[ax] * inner, old_dim, q);
    Eigen::Map<RowMajorMatrix> dst(out.data().data() + p * out_shape[ax] * inner, new_dim, q);
    dst.noalias() = m * src;
  }
  return out;
}

Matricization matricize(const FullTensor& a, const Modes& row_modes) {
  const int d = static_cast<int>(a.order());
  Modes rows = row_modes;
  std::sort(rows.begin(), rows.end());
  if (rows.empty() || static_cast<int>(rows.size()) >= d)
    throw std::invalid_argument("matricize: row modes must be a nonempty strict subset");
  if (std::adjacent_find(rows.begin(), rows.end()) != rows.end() || rows.front() < 0 || rows.back() >= d)
    throw std::invalid_argument("matricize: invalid row modes");
  Modes cols;
  for (int nu = 0; nu < d; ++nu)
    if (!std::binary_search(rows.begin(), rows.end(), nu)) cols.push_back(nu);

  std::vector<int> perm(rows.begin(), rows.end());
  perm.insert(perm.end(), cols.begin(), cols.end());
  const FullTensor p = permute(a, perm);
  std::size_t nrows = 1;
  for (int nu : rows) nrows *= a.shape()[static_cast<std::size_t>(nu)];
  const std::size_t ncols = a.size() / nrows;

  Matricization m;
  m.row_modes = rows;
  m.col_modes = cols;
  m.tensor_shape = a.shape();
  m.orthonormal = a.orthonormal();
  m.matrix = Eigen::Map<const RowMajorMatrix>(p.data().data(), static_cast<Eigen::Index>(nrows),
                                               static_cast<Eigen::Index>(ncols));
  return m;
}

FullTensor unmatricize(const Matricization& m) {
  const std::size_t d = m.tensor_shape.size();
  std::vector<int> perm(m.row_modes.begin(), m.row_modes.end());
  perm.insert(perm.end(), m.col_modes.begin(), m.col_modes.end());
  Shape permuted_shape(d);
  for (std::size_t k = 0; k < d; ++k) permuted_shape[k] = m.tensor_shape[static_cast<std::size_t>(perm[k])];
  std::vector<double> buf(static_cast<std::size_t>(m.matrix.size()));
  Eigen::Map<RowMajorMatrix>(buf.data(), m.matrix.rows(), m.matrix.cols()) = m.matrix;
  FullTensor permuted(permuted_shape, std::move(buf), m.orthonormal);
  std::vector<int> inverse(d);
  for (std::size_t k = 0; k < d; ++k) inverse[static_cast<std::size_t>(perm[k])] = static_cast<int>(k);
  return permute(permuted, inverse);
}

std::vector<double> singular_values(const Eigen::MatrixXd& m) {
  check_finite(m);
  if (m.size() == 0) return {};
  Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  std::vector<double> out(s.data(), s.data() + s.size());
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

int numerical_rank(std::span<const double> sigma) {
  if (sigma.empty() || sigma.front() <= 0.0) return 0;
  const double cut = kRankThreshold * sigma.front();
  return static_cast<int>(std::count_if(sigma.begin(), sigma.end(), [&](double s) { return s > cut; }));
}

Eigen::MatrixXd principal_subspace(const Eigen::MatrixXd& m, int n) {
  check_finite(m);
  if (n < 1 || n > m.rows()) throw std::invalid_argument("principal_subspace: n out of range");
  const bool need_full = n > std::min(m.rows(), m.cols());
  Eigen::BDCSVD<Eigen::MatrixXd> svd(m, need_full ? Eigen::ComputeFullU : Eigen::ComputeThinU);
  Eigen::MatrixXd u = svd.matrixU().leftCols(n);
  for (Eigen::Index j = 0; j < u.cols(); ++j) {
    Eigen::Index arg = 0;
    u.col(j).cwiseAbs().maxCoeff(&arg);
    if (u(arg, j) < 0) u.col(j) = -u.col(j);
  }
  return u;
}

void write_tensor_binary(const FullTensor& a, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  write_le<std::uint64_t>(os, a.order());
  for (std::size_t s : a.shape()) write_le<std::uint64_t>(os, s);
  for (double v : a.data()) write_le<double>(os, v);
  if (!os) throw std::runtime_error("failed writing " + path);
}

FullTensor read_tensor_binary(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  const auto order = read_le<std::uint64_t>(is);
  if (order > 64) throw std::runtime_error("tensor binary: implausible order");
  Shape shape(order);
  for (auto& s : shape) s = read_le<std::uint64_t>(is);
  std::vector<double> data(shape_size(shape));
  for (auto& v : data) v = read_le<double>(is);
  return FullTensor(std::move(shape), std::move(data));
}

void save_tensor(const FullTensor& a, const std::string& stem) {
  write_tensor_binary(a, stem + ".bin");
  nlohmann::json side = {{"shape", a.shape()},
                         {"orthonormal", a.orthonormal()},
                         {"layout", "row-major"},
                         {"dtype", "float64-le"}};
  std::ofstream os(stem + ".json");
  if (!os) throw std::runtime_error("cannot open " + stem + ".json for writing");
  os << side.dump(2) << "\n";
}

FullTensor load_tensor(const std::string& stem) {
  FullTensor a = read_tensor_binary(stem + ".bin");
  std::ifstream is(stem + ".json");
  if (!is) throw std::runtime_error("cannot open " + stem + ".json");
  const auto side = nlohmann::json::parse(is);
  if (side.at("shape").get<Shape>() != a.shape()) throw std::runtime_error("tensor sidecar shape mismatch");
  a.set_orthonormal(side.at("orthonormal").get<bool>());
  return a;
}

}  // namespace treetn
