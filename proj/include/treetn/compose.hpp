#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "treetn/discretize.hpp"
#include "treetn/tree.hpp"
#include "treetn/ttn.hpp"

namespace treetn {

/// Real function of the children's values at an interior node; arguments
/// come in sorted-child order.
struct ComponentFunction {
  std::function<double(std::span<const double>)> eval;
  std::string name;        // registry name, or a display name
  std::string expression;  // source text when parsed from an expression
};

/// Tree-structured composition f = f_D((g_alpha)_{alpha in S(D)}) with
/// g_alpha = f_alpha((g_beta)_{beta in S(alpha)}) and g_nu(x) = x_nu.
struct CompositionalSpec {
  std::string name;
  DimensionTree tree;
  std::vector<ComponentFunction> functions;  // per node id; empty at leaves
  std::vector<Interval> ranges;              // per node id: I^alpha, X_nu at leaves; unused at the root
  int s = 1;
  std::vector<double> B{1.0};  // B_1..B_s, each >= 1
  double C = 1.0;              // general-s constant, used when s > 2

  Box domain() const;
  int arity() const { return tree.arity(); }
};

/// Structural checks: function present exactly at interior nodes, ranges
/// nondegenerate, s >= 1, B has s entries all >= 1, C >= 1.
void check_spec(const CompositionalSpec& spec);

struct RangeReport {
  std::size_t violations = 0;
  std::vector<std::string> messages;
};

/// Exact composition at x. Range violations are appended to `report` when
/// given; the value is returned either way.
double evaluate_composition(const CompositionalSpec& spec, std::span<const double> x, RangeReport* report = nullptr);

FunctionHandle composition_function(const CompositionalSpec& spec);

/// Probes every interior f_alpha (alpha != D) on a grid of up to 33 points
/// per argument over its children's ranges and reports values outside I^alpha
/// inflated by `margin` times its width.
RangeReport validate_ranges(const CompositionalSpec& spec, double margin = 0.05);

/// C(B, s, level): B_1^(l-1) for s = 1, l B_1^(2l-2) B_2 for s = 2 and
/// (C l)^(s-1) B_1^(s(l-1)) B_*^s beyond, B_* = max_j B_j.
double smoothness_constant(std::span<const double> B, int s, int level, double C = 1.0);

/// Piecewise interpolation encoder: leaf bases of size r_nu on X_nu with
/// identity leaf matrices, interior tensors
/// A^alpha[j, i...] = phi^alpha_j(f_alpha(children's nodes i)) with phi^alpha
/// on I^alpha of size r_alpha, and A^D[i...] = f_D(children's nodes i).
/// Component values outside I^alpha are clamped; values beyond the 5% margin
/// raise std::domain_error.
TreeTensorNetwork encode_network(const CompositionalSpec& spec, const RankMap& ranks, BasisKind scheme);

/// sqrt(sum_{alpha != D} (M C(B,s,level alpha))^2 r_alpha^(-2s)).
double l2_error_bound(const CompositionalSpec& spec, const RankMap& ranks, double M = kDefaultApproximationConstant);

/// sum_{alpha != D} Q_a C(B,s,level alpha) r_alpha^(-s).
double linf_error_bound(const CompositionalSpec& spec, const RankMap& ranks, double Q_a);

/// Smoothness order the scheme certifies for the spec: min(s, scheme order).
int effective_order(const CompositionalSpec& spec, BasisKind scheme);

/// Interpolation constant Q_a of the scheme for the spec's arity, order
/// effective_order and widest interval.
double scheme_constant(const CompositionalSpec& spec, BasisKind scheme);

/// linf_error_bound at the effective order with Q_a = scheme_constant; this
/// is the bound the encoder output satisfies.
double certified_linf_bound(const CompositionalSpec& spec, const RankMap& ranks, BasisKind scheme);

/// Smallest integer ranks with r_alpha >= (eps^-1 (#T-1) M C(B,s,level))^(1/s),
/// so that sum_{alpha != D} M C r_alpha^(-s) <= eps. Throws unless 0 < eps < 1.
RankMap rank_schedule(const CompositionalSpec& spec, double eps, double M = kDefaultApproximationConstant);

/// JSON layout: {"name", "tree", "s", "B", "C", "domain": [[lo,hi],...],
/// "nodes": [{"node": [1,2], "function": registry name or "expr": text,
/// "range": [lo,hi]}, ...]}.
CompositionalSpec spec_from_json(const std::string& text);
std::string spec_to_json(const CompositionalSpec& spec);

}  // namespace treetn
