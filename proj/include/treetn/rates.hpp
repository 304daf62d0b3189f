#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "treetn/tree.hpp"

namespace treetn {

/// Number of (level, translate) pairs with |l|_1 <= L in d variables, with
/// 2^{l_nu} translates per level: sum_{j=0}^{L} C(j+d-1, d-1) 2^j.
/// Throws std::overflow_error when the count does not fit in 64 bits.
std::uint64_t hc_cardinality(int d, int L);

/// Rank bound for the alpha-split of a hyperbolic-cross expansion: the
/// alpha-part count with |l_alpha|_1 <= L/2 plus the complement count with
/// |l_{alpha^c}|_1 < L/2.
std::uint64_t hc_alpha_rank_bound(int d, int L, const Modes& alpha);

enum class RateModel { Sobolev, MixedTrivial, MixedBinary, CompositionalTrivial, CompositionalBoundedArity };

std::string to_string(RateModel model);
RateModel rate_model_from_string(const std::string& name);

struct PredictorInputs {
  double eps = 0.1;
  int d = 2;
  int s = 1;
  int arity = 2;  // bounded-arity model
  int depth = 1;  // bounded-arity model
  double B1 = 1.0;
  double B_star = 1.0;
  double prefactor = 1.0;  // stands in for the unquantified constant
};

/// Leading-order complexity N(eps):
///   sobolev                      eps^(-d/s)
///   mixed-trivial                eps^(-d/(2s)) lg^(d(d-2))
///   mixed-binary                 eps^(-3/(2s)) lg^(3(d-2))
///   compositional-trivial        eps^(-d/s)
///   compositional-bounded-arity  L^(a+1) eps^(-(a+1)/s) B_1^((a+1)L) B_*^(a+1)
/// each times the prefactor, with lg = max(1, ln(1/eps)).
struct Prediction {
  RateModel model;
  PredictorInputs inputs;
  double value = 0.0;
  std::vector<std::string> caveats;

  /// {"model", "inputs", "value", "caveats"}
  std::string to_json() const;
};

Prediction predict_complexity(RateModel model, const PredictorInputs& inputs);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // root mean square of the log-residuals
  std::size_t points = 0;
};

/// Least-squares fit of log(error) against log(complexity).
RateFit fit_rate(const std::vector<std::pair<double, double>>& points);

}  // namespace treetn
