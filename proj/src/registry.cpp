#include "treetn/registry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace treetn {

namespace {

using Eval = std::function<double(std::span<const double>)>;

double mean_of(std::span<const double> x) { return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size()); }

}  // namespace

ComponentFunction component_function(const std::string& name, int arity) {
  if (arity < 1) throw std::invalid_argument("component arity must be positive");
  auto binary_only = [&] {
    if (arity != 2) throw std::invalid_argument("component '" + name + "' takes exactly two arguments");
  };
  Eval f;
  if (name == "sum") {
    f = [](std::span<const double> x) { return std::accumulate(x.begin(), x.end(), 0.0); };
  } else if (name == "mean") {
    f = mean_of;
  } else if (name == "product") {
    f = [](std::span<const double> x) { return std::accumulate(x.begin(), x.end(), 1.0, std::multiplies<>()); };
  } else if (name == "max") {
    f = [](std::span<const double> x) { return *std::max_element(x.begin(), x.end()); };
  } else if (name == "min") {
    f = [](std::span<const double> x) { return *std::min_element(x.begin(), x.end()); };
  } else if (name == "absdiff") {
    binary_only();
    f = [](std::span<const double> x) { return std::abs(x[0] - x[1]); };
  } else if (name == "sine-ridge") {
    binary_only();
    f = [](std::span<const double> x) { return 0.5 + 0.5 * std::sin(3.0 * (x[0] - x[1])); };
  } else if (name == "constant") {
    f = [](std::span<const double>) { return 0.5; };
  } else {
    throw std::invalid_argument("unknown component function '" + name + "'");
  }
  return ComponentFunction{std::move(f), name, {}};
}

std::vector<std::string> component_function_names() {
  return {"sum", "mean", "product", "max", "min", "absdiff", "sine-ridge", "constant"};
}

TestFunction test_function(const std::string& name, int d) {
  if (d < 1) throw std::invalid_argument("dimension must be positive");
  const Box box(static_cast<std::size_t>(d), Interval{0.0, 1.0});
  const double dd = d;
  auto make = [&](Eval f, int s, double b1, double bstar, bool rank_one = false) {
    return TestFunction{FunctionHandle{std::move(f), box, false, name}, s, b1, bstar, rank_one};
  };
  if (name == "product" || name == "rank-one") {
    return make([](std::span<const double> x) { return std::accumulate(x.begin(), x.end(), 1.0, std::multiplies<>()); }, 2, 1.0,
                1.0, true);
  }
  if (name == "sum") return make([](std::span<const double> x) { return std::accumulate(x.begin(), x.end(), 0.0); }, 2, 1.0, 1.0);
  if (name == "sum-power") {
    return make(
        [](std::span<const double> x) {
          const double m = mean_of(x);
          return m * m * m;
        },
        2, 3.0 / dd, std::max(3.0 / dd, 6.0 / (dd * dd)));
  }
  if (name == "runge-multiplicative") {
    return make(
        [](std::span<const double> x) {
          double p = 1.0;
          for (double t : x) p /= 1.0 + 25.0 * (t - 0.5) * (t - 0.5);
          return p;
        },
        2, 3.25, 50.0, true);
  }
  if (name == "max-affine") {
    return make(
        [](std::span<const double> x) {
          const double m = mean_of(x);
          return std::max({m, 1.0 - m, 0.25 + 0.5 * (x.front() - x.back())});
        },
        1, 0.5, 0.5);
  }
  if (name == "mixed-smooth") {
    return make([](std::span<const double> x) { return 1.0 / (1.0 + std::accumulate(x.begin(), x.end(), 0.0)); }, 2, 1.0, 2.0);
  }
  throw std::invalid_argument("unknown test function '" + name + "'");
}

std::vector<std::string> test_function_names() {
  return {"product", "rank-one", "sum", "sum-power", "runge-multiplicative", "max-affine", "mixed-smooth"};
}

CompositionalSpec compositional_spec(const std::string& name) {
  const auto dash = name.rfind("-d");
  if (dash == std::string::npos || dash + 2 >= name.size())
    throw std::invalid_argument("compositional spec name must look like <family>-d<d>: '" + name + "'");
  const std::string family = name.substr(0, dash);
  int d = 0;
  try {
    std::size_t used = 0;
    d = std::stoi(name.substr(dash + 2), &used);
    if (used != name.size() - dash - 2) throw std::invalid_argument("trailing characters");
  } catch (const std::exception&) {
    throw std::invalid_argument("bad dimension in compositional spec name '" + name + "'");
  }
  if (d < 2 || d > 64) throw std::invalid_argument("compositional spec dimension must lie in [2, 64]");

  DimensionTree tree = DimensionTree::balanced_binary(d);
  CompositionalSpec spec{name, tree, std::vector<ComponentFunction>(tree.size()),
                         std::vector<Interval>(tree.size(), Interval{0.0, 1.0}), 1, {1.0}, 1.0};
  std::string root, below;
  if (family == "mean") {
    root = below = "mean";
    spec.s = 2;
    spec.B = {1.0, 1.0};
  } else if (family == "lipschitz") {
    root = "mean";
  } else if (family == "product") {
    root = below = "product";
    spec.s = 2;
    spec.B = {1.0, 1.0};
  } else if (family == "sine-ridge") {
    root = "mean";
    below = "sine-ridge";
    spec.B = {1.5};
  } else if (family == "sine-product") {
    root = "product";
    below = "sine-ridge";
    spec.s = 2;
    spec.B = {1.5, 4.5};
  } else if (family == "constant") {
    root = below = "constant";
    spec.s = 2;
    spec.B = {1.0, 1.0};
  } else {
    throw std::invalid_argument("unknown compositional family '" + family + "'");
  }
  const char* cycle[] = {"max", "absdiff", "min"};
  int interior = 0;
  for (std::size_t id = 0; id < tree.size(); ++id) {
    const auto& node = tree.node(static_cast<int>(id));
    if (node.children.empty()) continue;
    const int arity = static_cast<int>(node.children.size());
    std::string fn = id == 0 ? root : below;
    if (id != 0 && family == "lipschitz") fn = cycle[interior++ % 3];
    spec.functions[id] = component_function(fn, arity);
  }
  return spec;
}

std::vector<std::string> compositional_families() {
  return {"mean", "lipschitz", "product", "sine-ridge", "sine-product", "constant"};
}

}  // namespace treetn
