#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

#include "treetn/rates.hpp"
#include "treetn/tensor.hpp"

using namespace treetn;

namespace {

// Enumerates level tuples l in N^k with |l|_1 <= budget and sums 2^{|l|_1}.
std::uint64_t brute_count(int k, int budget) {
  if (budget < 0) return 0;
  std::uint64_t total = 0;
  std::vector<int> l(static_cast<std::size_t>(k), 0);
  std::function<void(int, int)> rec = [&](int pos, int used) {
    if (pos == k) {
      total += std::uint64_t{1} << used;
      return;
    }
    for (int v = 0; used + v <= budget; ++v) rec(pos + 1, used + v);
  };
  rec(0, 0);
  return total;
}

// Univariate wavelet-style index (level, translate) flattened level by level.
int level_of(int index) {
  int l = 0;
  while (index >= (1 << (l + 1)) - 1) ++l;
  return l;
}

}  // namespace

TEST_CASE("hyperbolic cross cardinality") {
  CHECK(hc_cardinality(1, 3) == 15);
  CHECK(hc_cardinality(2, 2) == 17);
  CHECK(hc_cardinality(3, 0) == 1);
  for (int d = 1; d <= 5; ++d)
    for (int L = 0; L <= 10; ++L) CHECK(hc_cardinality(d, L) == brute_count(d, L));
  CHECK_THROWS_AS(hc_cardinality(0, 2), std::invalid_argument);
  CHECK_THROWS_AS(hc_cardinality(40, 60), std::overflow_error);
}

TEST_CASE("hyperbolic cross asymptotics") {
  double lo = 1e300, hi = 0;
  for (int L = 6; L <= 14; ++L) {
    const double ratio = static_cast<double>(hc_cardinality(3, L)) / (L * L * std::pow(2.0, L));
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  CHECK(hi / lo < 4.0);
  CHECK(hi < 10.0);
}

TEST_CASE("alpha rank bound") {
  CHECK(hc_alpha_rank_bound(2, 2, {0}) == 4);
  for (int d = 2; d <= 5; ++d)
    for (int L = 0; L <= 10; ++L) {
      CHECK(hc_alpha_rank_bound(d, L, {0}) <= hc_cardinality(d, L));
      // brute-force oracle for the two counts
      const int k = d / 2;
      Modes alpha;
      for (int m = 0; m < k; ++m) alpha.push_back(m);
      const std::uint64_t expect = brute_count(k, L / 2) + brute_count(d - k, (L + 1) / 2 - 1);
      CHECK(hc_alpha_rank_bound(d, L, alpha) == expect);
    }
  CHECK_THROWS_AS(hc_alpha_rank_bound(3, 2, {0, 1, 2}), std::invalid_argument);
  CHECK_THROWS_AS(hc_alpha_rank_bound(3, 2, {}), std::invalid_argument);
}

TEST_CASE("alpha rank bound envelope") {
  const Modes alpha{0, 1};
  for (int L = 4; L <= 16; ++L) {
    const double envelope = std::pow(2.0, L / 2.0) * (L / 2.0);
    const double ratio = static_cast<double>(hc_alpha_rank_bound(4, L, alpha)) / envelope;
    CHECK(ratio <= 4.0);
    CHECK(ratio >= 0.25);
  }
}

TEST_CASE("alpha rank bound dominates the rank of synthetic hyperbolic-cross tensors") {
  std::mt19937_64 rng(10);
  std::normal_distribution<double> normal;
  for (auto [d, L] : std::vector<std::pair<int, int>>{{2, 4}, {3, 3}, {3, 4}, {4, 3}}) {
    const std::size_t n = (std::size_t{1} << (L + 1)) - 1;
    FullTensor a(Shape(static_cast<std::size_t>(d), n));
    for (std::size_t i = 0; i < a.size(); ++i) {
      std::size_t rem = i;
      int total = 0;
      for (int k = 0; k < d; ++k) {
        total += level_of(static_cast<int>(rem % n));
        rem /= n;
      }
      if (total <= L) a[i] = normal(rng);
    }
    std::vector<Modes> splits;
    for (int mask = 1; mask < (1 << d) - 1; ++mask) {
      Modes alpha;
      for (int m = 0; m < d; ++m)
        if (mask & (1 << m)) alpha.push_back(m);
      splits.push_back(alpha);
    }
    for (const auto& alpha : splits) {
      const int rank = numerical_rank(singular_values(matricize(a, alpha)));
      CHECK(static_cast<std::uint64_t>(rank) <= hc_alpha_rank_bound(d, L, alpha));
    }
  }
}

TEST_CASE("complexity predictors") {
  PredictorInputs in;
  in.eps = 0.1;
  in.d = 4;
  in.s = 2;
  CHECK(predict_complexity(RateModel::Sobolev, in).value == doctest::Approx(100));
  PredictorInputs c;
  c.eps = 0.1;
  c.arity = 2;
  c.depth = 2;
  c.s = 1;
  CHECK(predict_complexity(RateModel::CompositionalBoundedArity, c).value == doctest::Approx(8000));

  PredictorInputs m;
  m.d = 5;
  m.s = 1;
  m.eps = 0.01;
  auto half = m;
  half.eps = 0.005;
  const double ratio = predict_complexity(RateModel::MixedBinary, half).value / predict_complexity(RateModel::MixedBinary, m).value;
  const double logs = std::pow(std::log(200.0) / std::log(100.0), 9);
  CHECK(ratio == doctest::Approx(std::pow(2.0, 1.5) * logs));

  for (auto model : {RateModel::Sobolev, RateModel::MixedTrivial, RateModel::MixedBinary, RateModel::CompositionalTrivial,
                     RateModel::CompositionalBoundedArity}) {
    PredictorInputs p;
    p.d = 4;
    p.depth = 2;
    p.B1 = 1.5;
    double prev = 0;
    for (double eps : {0.5, 0.2, 0.1, 0.01}) {
      p.eps = eps;
      const double v = predict_complexity(model, p).value;
      CHECK(v >= prev);
      prev = v;
    }
    p.eps = 0.05;
    auto more = p;
    more.d = 5;
    CHECK(predict_complexity(model, more).value >= predict_complexity(model, p).value);
    more = p;
    more.depth = 3;
    CHECK(predict_complexity(model, more).value >= predict_complexity(model, p).value);
    more = p;
    more.B1 = 2;
    CHECK(predict_complexity(model, more).value >= predict_complexity(model, p).value);
    CHECK(rate_model_from_string(to_string(model)) == model);
  }
  CHECK(predict_complexity(RateModel::Sobolev, in).to_json().find("\"model\": \"sobolev\"") != std::string::npos);
  CHECK_THROWS_AS(rate_model_from_string("besov"), std::invalid_argument);
  in.eps = 1.5;
  CHECK_THROWS_AS(predict_complexity(RateModel::Sobolev, in), std::invalid_argument);
}

TEST_CASE("rate fits") {
  std::vector<std::pair<double, double>> exact, scaled;
  for (double n : {10.0, 100.0, 1000.0, 5000.0}) {
    exact.emplace_back(n, 1.0 / (n * n));
    scaled.emplace_back(n, 5.0 / n);
  }
  const auto f = fit_rate(exact);
  CHECK(std::abs(f.slope + 2.0) <= 1e-12);
  CHECK(f.residual <= 1e-12);
  CHECK(f.points == 4);
  const auto g = fit_rate(scaled);
  CHECK(g.slope == doctest::Approx(-1.0));
  CHECK(g.intercept == doctest::Approx(std::log(5.0)));
  CHECK_THROWS_AS(fit_rate({{1, 1}, {2, 2}}), std::invalid_argument);
  CHECK_THROWS_AS(fit_rate({{3, 1}, {3, 2}, {3, 4}}), std::invalid_argument);
  CHECK_THROWS_AS(fit_rate({{1, 1}, {2, 0}, {3, 4}}), std::invalid_argument);
}
