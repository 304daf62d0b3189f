#include "treetn/rates.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

namespace treetn {

namespace {

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t out = 0;
  if (__builtin_mul_overflow(a, b, &out)) throw std::overflow_error("hyperbolic cross count overflows 64 bits");
  return out;
}

std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
  std::uint64_t out = 0;
  if (__builtin_add_overflow(a, b, &out)) throw std::overflow_error("hyperbolic cross count overflows 64 bits");
  return out;
}

// C(n, k) by the multiplicative formula; each partial product is an integer.
std::uint64_t binomial(int n, int k) {
  k = std::min(k, n - k);
  std::uint64_t c = 1;
  for (int i = 1; i <= k; ++i) {
    const auto g = std::gcd(c, static_cast<std::uint64_t>(i));
    c = checked_mul(c / g, static_cast<std::uint64_t>(n - k + i) / (static_cast<std::uint64_t>(i) / g));
  }
  return c;
}

}  // namespace

std::uint64_t hc_cardinality(int d, int L) {
  if (d < 1) throw std::invalid_argument("hc_cardinality needs d >= 1");
  if (L < 0) throw std::invalid_argument("hc_cardinality needs L >= 0");
  std::uint64_t total = 0;
  for (int j = 0; j <= L; ++j) {
    if (j >= 64) throw std::overflow_error("hyperbolic cross count overflows 64 bits");
    total = checked_add(total, checked_mul(binomial(j + d - 1, d - 1), std::uint64_t{1} << j));
  }
  return total;
}

std::uint64_t hc_alpha_rank_bound(int d, int L, const Modes& alpha) {
  if (d < 2) throw std::invalid_argument("alpha splits need d >= 2");
  if (L < 0) throw std::invalid_argument("level budget must be nonnegative");
  Modes a = alpha;
  std::sort(a.begin(), a.end());
  if (a.empty() || static_cast<int>(a.size()) >= d || std::adjacent_find(a.begin(), a.end()) != a.end() || a.front() < 0 ||
      a.back() >= d)
    throw std::invalid_argument("alpha must be a nonempty strict subset of the modes");
  const int k = static_cast<int>(a.size());
  // |l_alpha| <= L/2  <=>  |l_alpha| <= floor(L/2);  |l_c| < L/2  <=>  |l_c| <= ceil(L/2) - 1
  const std::uint64_t low = hc_cardinality(k, L / 2);
  const int high_budget = (L + 1) / 2 - 1;
  const std::uint64_t high = high_budget >= 0 ? hc_cardinality(d - k, high_budget) : 0;
  return checked_add(low, high);
}

std::string to_string(RateModel model) {
  switch (model) {
    case RateModel::Sobolev: return "sobolev";
    case RateModel::MixedTrivial: return "mixed-trivial";
    case RateModel::MixedBinary: return "mixed-binary";
    case RateModel::CompositionalTrivial: return "compositional-trivial";
    case RateModel::CompositionalBoundedArity: return "compositional-bounded-arity";
  }
  return "unknown";
}

RateModel rate_model_from_string(const std::string& name) {
  for (auto m : {RateModel::Sobolev, RateModel::MixedTrivial, RateModel::MixedBinary, RateModel::CompositionalTrivial,
                 RateModel::CompositionalBoundedArity})
    if (to_string(m) == name) return m;
  throw std::invalid_argument("unknown complexity model '" + name + "'");
}

Prediction predict_complexity(RateModel model, const PredictorInputs& in) {
  if (!(in.eps > 0.0 && in.eps < 1.0)) throw std::invalid_argument("eps must lie in (0, 1)");
  if (in.d < 1 || in.s < 1) throw std::invalid_argument("d and s must be positive");
  if (!(in.prefactor > 0.0)) throw std::invalid_argument("prefactor must be positive");
  Prediction p{model, in, 0.0, {"leading-order term only", "constant prefactor is a placeholder (default 1)"}};
  const double d = in.d, s = in.s, eps = in.eps;
  const double lg = std::max(1.0, std::log(1.0 / eps));
  switch (model) {
    case RateModel::Sobolev:
    case RateModel::CompositionalTrivial:
      p.value = std::pow(eps, -d / s);
      break;
    case RateModel::MixedTrivial:
      p.value = std::pow(eps, -d / (2 * s)) * std::pow(lg, d * (d - 2));
      p.caveats.push_back("log factor clamped below at 1");
      break;
    case RateModel::MixedBinary:
      p.value = std::pow(eps, -3 / (2 * s)) * std::pow(lg, 3 * (d - 2));
      p.caveats.push_back("log factor clamped below at 1");
      break;
    case RateModel::CompositionalBoundedArity: {
      if (in.arity < 1 || in.depth < 1) throw std::invalid_argument("arity and depth must be positive");
      if (!(in.B1 >= 1.0 && in.B_star >= 1.0)) throw std::invalid_argument("derivative bounds must be >= 1");
      const double a1 = in.arity + 1.0, L = in.depth;
      p.value = std::pow(L, a1) * std::pow(eps, -a1 / s) * std::pow(in.B1, a1 * L) * std::pow(in.B_star, a1);
      break;
    }
  }
  p.value *= in.prefactor;
  if (!std::isfinite(p.value)) throw std::overflow_error("prediction overflows double precision");
  return p;
}

std::string Prediction::to_json() const {
  nlohmann::json j;
  j["model"] = to_string(model);
  j["inputs"] = {{"eps", inputs.eps},     {"d", inputs.d},   {"s", inputs.s},           {"arity", inputs.arity},
                 {"depth", inputs.depth}, {"B1", inputs.B1}, {"B_star", inputs.B_star}, {"prefactor", inputs.prefactor}};
  j["value"] = value;
  j["caveats"] = caveats;
  return j.dump(2);
}

RateFit fit_rate(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3) throw std::invalid_argument("rate fit needs at least 3 points");
  double sx = 0, sy = 0;
  std::vector<double> xs, ys;
  for (const auto& [n, e] : points) {
    if (!(n > 0.0) || !(e > 0.0) || !std::isfinite(n) || !std::isfinite(e))
      throw std::invalid_argument("rate fit needs positive finite complexities and errors");
    xs.push_back(std::log(n));
    ys.push_back(std::log(e));
    sx += xs.back();
    sy += ys.back();
  }
  const double m = static_cast<double>(points.size());
  const double mx = sx / m, my = sy / m;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx <= 1e-24 * std::max(1.0, mx * mx)) throw std::invalid_argument("rate fit abscissae are degenerate");
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / m);
  fit.points = points.size();
  return fit;
}

}  // namespace treetn
