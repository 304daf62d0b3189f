#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "treetn/tensor.hpp"

namespace treetn {

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
  double width() const { return hi - lo; }
  bool contains(double x) const { return x >= lo && x <= hi; }
};

using Box = std::vector<Interval>;

enum class BasisKind { PiecewiseConstant, PiecewiseLinear };

std::string to_string(BasisKind kind);
BasisKind basis_kind_from_string(const std::string& name);

/// Highest smoothness order served by the interpolation scheme (1 or 2).
int scheme_order(BasisKind kind);

/// Univariate approximation space on a uniform partition of an interval.
///
/// Piecewise-constant: n indicator cells, interpolation at cell midpoints.
/// Piecewise-linear: n hat functions on a uniform grid including both
/// endpoints (n = 1 degenerates to the constant function with its node at
/// the midpoint). With `normalized` set, values() returns the L2-orthonormal
/// basis obtained from the Gram matrix under the uniform probability measure.
class UnivariateBasis {
 public:
  UnivariateBasis(BasisKind kind, int n, Interval interval, bool normalized = false);

  BasisKind kind() const { return kind_; }
  int size() const { return n_; }
  const Interval& interval() const { return interval_; }
  bool normalized() const { return normalized_; }
  int order() const { return scheme_order(kind_); }

  /// Interpolation nodes (cell midpoints or grid points).
  const std::vector<double>& nodes() const { return nodes_; }

  /// Dense vector (phi_1(x), ..., phi_n(x)); x is clamped to the interval.
  Eigen::VectorXd values(double x) const;
  void values(double x, Eigen::VectorXd& out) const;

  /// Gram matrix under the uniform probability measure on the interval.
  Eigen::MatrixXd gram() const;

  UnivariateBasis as_normalized() const { return UnivariateBasis(kind_, n_, interval_, true); }

  bool operator==(const UnivariateBasis& o) const {
    return kind_ == o.kind_ && n_ == o.n_ && interval_.lo == o.interval_.lo && interval_.hi == o.interval_.hi &&
           normalized_ == o.normalized_;
  }

 private:
  void raw_values(double x, Eigen::VectorXd& v) const;

  BasisKind kind_;
  int n_;
  Interval interval_;
  bool normalized_;
  std::vector<double> nodes_;
  Eigen::MatrixXd gram_factor_;  // lower Cholesky factor, used when normalized_
};

UnivariateBasis make_basis(BasisKind kind, int n, Interval interval);

/// Black-box function on a product box. `serial` marks evaluators that must
/// not be called concurrently.
struct FunctionHandle {
  std::function<double(std::span<const double>)> eval;
  Box domain;
  bool serial = false;
  std::string name;

  std::size_t dimension() const { return domain.size(); }
  double operator()(std::span<const double> x) const { return eval(x); }
};

/// Nodal coefficients: f at the tensor grid of interpolation nodes. The
/// result is flagged non-orthonormal; see orthonormalize().
FullTensor sample_coefficients(const FunctionHandle& f, std::span<const UnivariateBasis> bases);

/// Value of sum_i A[i] prod_nu phi^nu_{i_nu}(x_nu).
double expand(const FullTensor& coefficients, std::span<const UnivariateBasis> bases, std::span<const double> x);

/// Coefficients with respect to the orthonormalized bases (Gram-corrected),
/// flagged orthonormal. Their Euclidean norm equals the L2 norm of the
/// expansion under the uniform probability measure.
FullTensor orthonormalize(const FullTensor& coefficients, std::span<const UnivariateBasis> bases);

enum class Norm { L2, Linf };

std::string to_string(Norm norm);
Norm norm_from_string(const std::string& name);

/// Fine evaluation grid: q * base[nu] cell midpoints along mode nu.
struct MeasureGrid {
  int oversample = 4;
  std::vector<int> base;  // empty means 1 per mode
};

inline constexpr std::size_t kMaxMeasurePoints = 10'000'000;

/// L2 (uniform probability measure, midpoint rule) or Linf (grid maximum)
/// distance between f and g over f's domain.
double measure_error(const FunctionHandle& f, const FunctionHandle& g, Norm norm, const MeasureGrid& grid);

/// Grid maximum of |f|.
double measure_sup(const FunctionHandle& f, const MeasureGrid& grid);

/// Constant Q in ||g - Q_N g||_inf <= Q (min N)^{-s} ||g||_{W^{s,inf}} for
/// tensorized interpolation of `arity` variables on intervals no wider than
/// `max_width`, valid for every N >= 1 and 1 <= s <= scheme order.
double interpolation_constant(BasisKind kind, int arity, int s, double max_width = 1.0);

/// Default for the unquantified constant M in E(u, U_n) <= M n^{-s} ||u||.
inline constexpr double kDefaultApproximationConstant = 1.0;

}  // namespace treetn
