#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "treetn/tree.hpp"

namespace treetn {

using Shape = std::vector<std::size_t>;

/// Dense tensors above this many entries are rejected.
inline constexpr std::size_t kMaxDenseEntries = 100'000'000;

/// Relative threshold for counting a singular value as nonzero.
inline constexpr double kRankThreshold = 1e-12;

std::size_t shape_size(const Shape& shape);

/// Dense d-way array in row-major layout (last mode fastest).
///
/// `orthonormal` records whether the coefficients refer to an L2-orthonormal
/// product basis, in which case the Euclidean norm of `data` is the L2 norm
/// of the represented function.
class FullTensor {
 public:
  FullTensor() = default;
  explicit FullTensor(Shape shape, bool orthonormal = true);
  FullTensor(Shape shape, std::vector<double> data, bool orthonormal = true);

  const Shape& shape() const { return shape_; }
  std::size_t order() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  bool orthonormal() const { return orthonormal_; }
  void set_orthonormal(bool value) { orthonormal_ = value; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  double& operator[](std::size_t flat) { return data_[flat]; }
  double operator[](std::size_t flat) const { return data_[flat]; }
  double& at(std::span<const std::size_t> index) { return data_[flat_index(index)]; }
  double at(std::span<const std::size_t> index) const { return data_[flat_index(index)]; }

  std::size_t flat_index(std::span<const std::size_t> index) const;
  std::vector<std::size_t> strides() const;

  double norm() const;

 private:
  Shape shape_;
  std::vector<double> data_;
  bool orthonormal_ = true;
};

double distance(const FullTensor& a, const FullTensor& b);

/// Reorders the axes so that output axis k is input axis perm[k].
FullTensor permute(const FullTensor& a, std::span<const int> perm);

/// Applies `m` (new_dim x old_dim) along `axis`.
FullTensor mode_product(const FullTensor& a, int axis, const Eigen::MatrixXd& m);

/// alpha-unfolding: rows indexed by the modes of `row_modes`, columns by the
/// complement, both lexicographic in increasing mode order.
struct Matricization {
  Modes row_modes;
  Modes col_modes;
  Shape tensor_shape;
  bool orthonormal = true;
  Eigen::MatrixXd matrix;
};

Matricization matricize(const FullTensor& a, const Modes& row_modes);
FullTensor unmatricize(const Matricization& m);

/// Nonincreasing singular values. Throws on non-finite entries.
std::vector<double> singular_values(const Eigen::MatrixXd& m);
inline std::vector<double> singular_values(const Matricization& m) { return singular_values(m.matrix); }

/// Count of singular values above kRankThreshold * sigma_1.
int numerical_rank(std::span<const double> sigma);

/// Orthonormal left singular vectors for the n largest singular values
/// (rows x n). Each column has its largest-magnitude entry made nonnegative.
Eigen::MatrixXd principal_subspace(const Eigen::MatrixXd& m, int n);
inline Eigen::MatrixXd principal_subspace(const Matricization& m, int n) { return principal_subspace(m.matrix, n); }

// Binary layout (little-endian): uint64 order, uint64 dims[order],
// float64 data[prod(dims)] in row-major order. The JSON sidecar carries
// {"shape": [...], "orthonormal": bool, "layout": "row-major", "dtype": "float64-le"}.
void write_tensor_binary(const FullTensor& a, const std::string& path);
FullTensor read_tensor_binary(const std::string& path);
void save_tensor(const FullTensor& a, const std::string& stem);  // stem.bin + stem.json
FullTensor load_tensor(const std::string& stem);

}  // namespace treetn
