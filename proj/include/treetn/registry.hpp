#pragma once

#include <string>
#include <vector>

#include "treetn/compose.hpp"
#include "treetn/discretize.hpp"

namespace treetn {

/// Component functions by name: sum, mean, product, max, min (any arity);
/// absdiff |u - v|, sine-ridge 0.5 + 0.5 sin(3(u - v)) (arity 2);
/// constant 0.5 (any arity).
ComponentFunction component_function(const std::string& name, int arity);
std::vector<std::string> component_function_names();

/// Black-box test function on [0,1]^d with its declared smoothness order s
/// and derivative bounds B_1, B_* (sup of first, resp. up to s-th, partials).
struct TestFunction {
  FunctionHandle f;
  int s = 1;
  double B1 = 1.0;
  double B_star = 1.0;
  bool rank_one = false;
};

/// Names: product (alias rank-one), sum, sum-power, runge-multiplicative,
/// max-affine, mixed-smooth.
TestFunction test_function(const std::string& name, int d);
std::vector<std::string> test_function_names();

/// Compositional specs on balanced binary trees over [0,1]^d, addressed as
/// "<family>-d<d>". Families:
///   mean          every node averages its arguments; s = 2, B = (1, 1)
///   lipschitz     max / absdiff / min cycling over non-root nodes, mean at
///                 the root; s = 1, B_1 = 1
///   product       uv everywhere; s = 2, B = (1, 1)
///   sine-ridge    0.5 + 0.5 sin(3(u - v)) below the root, mean at the root;
///                 s = 1, B_1 = 1.5
///   sine-product  sine-ridge below the root, uv at the root; s = 2,
///                 B = (1.5, 4.5)
///   constant      every node returns 0.5; s = 2, B = (1, 1)
CompositionalSpec compositional_spec(const std::string& name);
std::vector<std::string> compositional_families();

}  // namespace treetn
