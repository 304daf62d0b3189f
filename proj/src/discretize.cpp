#include "treetn/discretize.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "treetn/parallel.hpp"

namespace treetn {

std::string to_string(BasisKind kind) {
  return kind == BasisKind::PiecewiseConstant ? "piecewise-constant" : "piecewise-linear";
}

BasisKind basis_kind_from_string(const std::string& name) {
  if (name == "piecewise-constant" || name == "constant") return BasisKind::PiecewiseConstant;
  if (name == "piecewise-linear" || name == "linear") return BasisKind::PiecewiseLinear;
  throw std::invalid_argument("unknown basis kind '" + name + "'");
}

int scheme_order(BasisKind kind) { return kind == BasisKind::PiecewiseConstant ? 1 : 2; }

std::string to_string(Norm norm) { return norm == Norm::L2 ? "L2" : "Linf"; }

Norm norm_from_string(const std::string& name) {
  if (name == "L2" || name == "l2") return Norm::L2;
  if (name == "Linf" || name == "linf") return Norm::Linf;
  throw std::invalid_argument("unknown norm '" + name + "'");
}

UnivariateBasis::UnivariateBasis(BasisKind kind, int n, Interval interval, bool normalized)
    : kind_(kind), n_(n), interval_(interval), normalized_(normalized) {
  if (n < 1) throw std::invalid_argument("basis dimension must be positive");
  if (!(interval.hi > interval.lo) || !std::isfinite(interval.lo) || !std::isfinite(interval.hi))
    throw std::invalid_argument("degenerate basis interval");
  const double w = interval.width();
  nodes_.resize(static_cast<std::size_t>(n));
  if (kind == BasisKind::PiecewiseConstant || n == 1) {
    for (int i = 0; i < n; ++i) nodes_[static_cast<std::size_t>(i)] = interval.lo + (i + 0.5) * w / n;
  } else {
    for (int i = 0; i < n; ++i) nodes_[static_cast<std::size_t>(i)] = interval.lo + i * w / (n - 1);
    nodes_.back() = interval.hi;
  }
  if (normalized_) gram_factor_ = Eigen::LLT<Eigen::MatrixXd>(gram()).matrixL();
}

void UnivariateBasis::raw_values(double x, Eigen::VectorXd& v) const {
  v.setZero(n_);
  const double t = std::clamp((x - interval_.lo) / interval_.width(), 0.0, 1.0);
  if (kind_ == BasisKind::PiecewiseConstant || n_ == 1) {
    const int cell = std::min(n_ - 1, static_cast<int>(std::floor(t * n_)));
    v[cell] = 1.0;
    return;
  }
  const double s = t * (n_ - 1);
  const int left = std::min(n_ - 2, static_cast<int>(std::floor(s)));
  const double frac = s - left;
  v[left] = 1.0 - frac;
  v[left + 1] = frac;
}

void UnivariateBasis::values(double x, Eigen::VectorXd& out) const {
  raw_values(x, out);
  if (normalized_) gram_factor_.triangularView<Eigen::Lower>().solveInPlace(out);
}

Eigen::VectorXd UnivariateBasis::values(double x) const {
  Eigen::VectorXd v;
  values(x, v);
  return v;
}

Eigen::MatrixXd UnivariateBasis::gram() const {
  if (kind_ == BasisKind::PiecewiseConstant || n_ == 1)
    return Eigen::MatrixXd::Identity(n_, n_) / static_cast<double>(n_);
  const double h = 1.0 / (n_ - 1);
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n_, n_);
  for (int i = 0; i < n_; ++i) {
    g(i, i) = (i == 0 || i == n_ - 1) ? h / 3.0 : 2.0 * h / 3.0;
    if (i + 1 < n_) g(i, i + 1) = g(i + 1, i) = h / 6.0;
  }
  return g;
}

UnivariateBasis make_basis(BasisKind kind, int n, Interval interval) { return UnivariateBasis(kind, n, interval); }

namespace {

void check_bases(const FunctionHandle& f, std::span<const UnivariateBasis> bases) {
  if (bases.size() != f.dimension()) throw std::invalid_argument("number of bases does not match function dimension");
  for (std::size_t nu = 0; nu < bases.size(); ++nu) {
    const auto& a = bases[nu].interval();
    const auto& b = f.domain[nu];
    if (std::abs(a.lo - b.lo) > 1e-14 * (1 + std::abs(b.lo)) || std::abs(a.hi - b.hi) > 1e-14 * (1 + std::abs(b.hi)))
      throw std::invalid_argument("basis interval does not match the function domain in mode " + std::to_string(nu + 1));
  }
}

double checked_eval(const FunctionHandle& f, std::span<const double> x) {
  const double v = f(x);
  if (!std::isfinite(v)) throw std::domain_error("function '" + f.name + "' returned a non-finite value");
  return v;
}

}  // namespace

FullTensor sample_coefficients(const FunctionHandle& f, std::span<const UnivariateBasis> bases) {
  check_bases(f, bases);
  Shape shape;
  for (const auto& b : bases) shape.push_back(static_cast<std::size_t>(b.size()));
  FullTensor out(shape, false);
  const std::size_t d = shape.size();
  std::vector<std::size_t> idx(d, 0);
  std::vector<double> x(d);
  for (std::size_t flat = 0; flat < out.size(); ++flat) {
    for (std::size_t nu = 0; nu < d; ++nu) x[nu] = bases[nu].nodes()[idx[nu]];
    out[flat] = checked_eval(f, x);
    for (std::size_t k = d; k-- > 0;) {
      if (++idx[k] < shape[k]) break;
      idx[k] = 0;
    }
  }
  return out;
}

double expand(const FullTensor& coefficients, std::span<const UnivariateBasis> bases, std::span<const double> x) {
  if (bases.size() != coefficients.order() || x.size() != bases.size())
    throw std::invalid_argument("expand: order mismatch");
  // contract the last mode first; each step shrinks the working tensor
  std::vector<double> work(coefficients.data().begin(), coefficients.data().end());
  std::size_t remaining = work.size();
  for (std::size_t nu = bases.size(); nu-- > 0;) {
    const Eigen::VectorXd phi = bases[nu].values(x[nu]);
    const auto n = static_cast<std::size_t>(phi.size());
    if (n != coefficients.shape()[nu]) throw std::invalid_argument("expand: basis size mismatch");
    const std::size_t outer = remaining / n;
    for (std::size_t p = 0; p < outer; ++p) {
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) acc += work[p * n + i] * phi[static_cast<Eigen::Index>(i)];
      work[p] = acc;
    }
    remaining = outer;
  }
  return work[0];
}

FullTensor orthonormalize(const FullTensor& coefficients, std::span<const UnivariateBasis> bases) {
  if (bases.size() != coefficients.order()) throw std::invalid_argument("orthonormalize: order mismatch");
  FullTensor out = coefficients;
  for (std::size_t nu = 0; nu < bases.size(); ++nu) {
    if (bases[nu].normalized()) continue;
    const Eigen::MatrixXd factor = Eigen::LLT<Eigen::MatrixXd>(bases[nu].gram()).matrixL();
    out = mode_product(out, static_cast<int>(nu), factor.transpose());
  }
  out.set_orthonormal(true);
  return out;
}

namespace {

struct GridPlan {
  std::vector<std::size_t> points;
  std::size_t total = 1;
};

GridPlan plan_grid(const Box& domain, const MeasureGrid& grid) {
  if (grid.oversample < 1) throw std::invalid_argument("oversample factor must be positive");
  if (!grid.base.empty() && grid.base.size() != domain.size())
    throw std::invalid_argument("measure grid base does not match dimension");
  GridPlan plan;
  for (std::size_t nu = 0; nu < domain.size(); ++nu) {
    const int base = grid.base.empty() ? 1 : grid.base[nu];
    if (base < 1) throw std::invalid_argument("measure grid base must be positive");
    const auto n = static_cast<std::size_t>(grid.oversample) * static_cast<std::size_t>(base);
    plan.points.push_back(n);
    if (plan.total > kMaxMeasurePoints / n) throw std::length_error("measurement grid exceeds the point budget");
    plan.total *= n;
  }
  return plan;
}

// Visits every fine-grid midpoint; reduce(a, b) combines per-chunk results.
template <typename PointFn, typename Reduce>
double sweep_grid(const Box& domain, const GridPlan& plan, bool serial, PointFn point_fn, Reduce reduce) {
  constexpr std::size_t kChunk = 1 << 14;
  const std::size_t d = domain.size();
  std::vector<double> partial(chunk_count(plan.total, kChunk), 0.0);
  parallel_chunks(
      plan.total, kChunk,
      [&](std::size_t begin, std::size_t end, std::size_t c) {
        std::vector<std::size_t> idx(d);
        std::size_t rest = begin;
        for (std::size_t k = d; k-- > 0;) {
          idx[k] = rest % plan.points[k];
          rest /= plan.points[k];
        }
        std::vector<double> x(d);
        double acc = 0.0;
        for (std::size_t flat = begin; flat < end; ++flat) {
          for (std::size_t nu = 0; nu < d; ++nu) {
            const auto& iv = domain[nu];
            x[nu] = iv.lo + (static_cast<double>(idx[nu]) + 0.5) * iv.width() / static_cast<double>(plan.points[nu]);
          }
          acc = reduce(acc, point_fn(x));
          for (std::size_t k = d; k-- > 0;) {
            if (++idx[k] < plan.points[k]) break;
            idx[k] = 0;
          }
        }
        partial[c] = acc;
      },
      serial);
  double total = 0.0;
  for (double p : partial) total = reduce(total, p);
  return total;
}

}  // namespace

double measure_error(const FunctionHandle& f, const FunctionHandle& g, Norm norm, const MeasureGrid& grid) {
  if (f.dimension() != g.dimension()) throw std::invalid_argument("measure_error: dimension mismatch");
  const GridPlan plan = plan_grid(f.domain, grid);
  const bool serial = f.serial || g.serial;
  if (norm == Norm::Linf) {
    return sweep_grid(
        f.domain, plan, serial, [&](std::span<const double> x) { return std::abs(checked_eval(f, x) - checked_eval(g, x)); },
        [](double a, double b) { return std::max(a, b); });
  }
  const double sum = sweep_grid(
      f.domain, plan, serial,
      [&](std::span<const double> x) {
        const double e = checked_eval(f, x) - checked_eval(g, x);
        return e * e;
      },
      [](double a, double b) { return a + b; });
  return std::sqrt(sum / static_cast<double>(plan.total));
}

double measure_sup(const FunctionHandle& f, const MeasureGrid& grid) {
  const GridPlan plan = plan_grid(f.domain, grid);
  return sweep_grid(
      f.domain, plan, f.serial, [&](std::span<const double> x) { return std::abs(checked_eval(f, x)); },
      [](double a, double b) { return std::max(a, b); });
}

double interpolation_constant(BasisKind kind, int arity, int s, double max_width) {
  if (arity < 1) throw std::invalid_argument("arity must be positive");
  if (s < 1 || s > scheme_order(kind)) throw std::invalid_argument("smoothness order not served by the scheme");
  const double scale = std::max(1.0, max_width);
  if (kind == BasisKind::PiecewiseConstant) return 0.5 * arity * scale;
  // hat spacing is w/(N-1): per variable w/(2(N-1)) <= w/N and
  // w^2/(8(N-1)^2) <= w^2/(2N^2) for N >= 2
  return s == 1 ? arity * scale : 0.5 * arity * scale * scale;
}

}  // namespace treetn
