#include "treetn/compose.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "treetn/expression.hpp"
#include "treetn/parallel.hpp"
#include "treetn/registry.hpp"

namespace treetn {

Box CompositionalSpec::domain() const {
  Box box(static_cast<std::size_t>(tree.dimension()));
  for (int nu = 0; nu < tree.dimension(); ++nu)
    box[static_cast<std::size_t>(nu)] = ranges.at(static_cast<std::size_t>(tree.leaf_of_mode(nu)));
  return box;
}

void check_spec(const CompositionalSpec& spec) {
  const auto& tree = spec.tree;
  if (spec.functions.size() != tree.size() || spec.ranges.size() != tree.size())
    throw std::invalid_argument("spec needs one function slot and one range per node");
  for (std::size_t id = 0; id < tree.size(); ++id) {
    const bool leaf = tree.is_leaf(static_cast<int>(id));
    if (leaf == static_cast<bool>(spec.functions[id].eval))
      throw std::invalid_argument(leaf ? "leaf " + tree.label(static_cast<int>(id)) + " carries a component function"
                                       : "interior node " + tree.label(static_cast<int>(id)) + " has no component function");
    if (id != 0) {
      const auto& iv = spec.ranges[id];
      if (!(iv.hi > iv.lo) || !std::isfinite(iv.lo) || !std::isfinite(iv.hi))
        throw std::invalid_argument("degenerate range at " + tree.label(static_cast<int>(id)));
    }
  }
  if (spec.s < 1) throw std::invalid_argument("smoothness order must be at least 1");
  if (spec.B.size() < static_cast<std::size_t>(spec.s)) throw std::invalid_argument("need one derivative bound per order");
  for (double b : spec.B)
    if (!(b >= 1.0)) throw std::invalid_argument("derivative bounds must be >= 1");
  if (!(spec.C >= 1.0)) throw std::invalid_argument("constant C must be >= 1");
}

namespace {

struct EvalBuffers {
  std::vector<double> g;
  std::vector<double> args;
};

EvalBuffers& eval_buffers() {
  thread_local EvalBuffers b;
  return b;
}

bool outside(const Interval& iv, double y, double margin) {
  const double pad = margin * iv.width();
  return y < iv.lo - pad || y > iv.hi + pad;
}

}  // namespace

double evaluate_composition(const CompositionalSpec& spec, std::span<const double> x, RangeReport* report) {
  const auto& tree = spec.tree;
  if (x.size() != static_cast<std::size_t>(tree.dimension())) throw std::invalid_argument("point dimension mismatch");
  auto& buf = eval_buffers();
  buf.g.resize(tree.size());
  for (std::size_t id = tree.size(); id-- > 0;) {
    const auto& node = tree.node(static_cast<int>(id));
    if (node.children.empty()) {
      buf.g[id] = x[static_cast<std::size_t>(node.modes.front())];
      continue;
    }
    buf.args.clear();
    for (int c : node.children) buf.args.push_back(buf.g[static_cast<std::size_t>(c)]);
    const double y = spec.functions[id].eval(buf.args);
    if (!std::isfinite(y)) throw std::domain_error("component at " + tree.label(static_cast<int>(id)) + " returned a non-finite value");
    if (report && id != 0 && outside(spec.ranges[id], y, 0.0)) {
      ++report->violations;
      if (report->messages.size() < 8)
        report->messages.push_back("value " + std::to_string(y) + " outside the range of " + tree.label(static_cast<int>(id)));
    }
    buf.g[id] = y;
  }
  return buf.g[0];
}

FunctionHandle composition_function(const CompositionalSpec& spec) {
  check_spec(spec);
  return FunctionHandle{[spec](std::span<const double> x) { return evaluate_composition(spec, x); }, spec.domain(), false,
                        spec.name};
}

RangeReport validate_ranges(const CompositionalSpec& spec, double margin) {
  check_spec(spec);
  const auto& tree = spec.tree;
  RangeReport report;
  for (std::size_t id = 1; id < tree.size(); ++id) {
    const auto& node = tree.node(static_cast<int>(id));
    if (node.children.empty()) continue;
    const std::size_t a = node.children.size();
    // 33 points per argument, fewer when 33^a would exceed a million probes
    std::size_t p = 33;
    while (p > 2 && std::pow(static_cast<double>(p), static_cast<double>(a)) > 1e6) --p;
    std::vector<std::size_t> idx(a, 0);
    std::vector<double> args(a);
    const auto& target = spec.ranges[id];
    double lo = INFINITY, hi = -INFINITY;
    for (;;) {
      for (std::size_t k = 0; k < a; ++k) {
        const auto& iv = spec.ranges[static_cast<std::size_t>(node.children[k])];
        args[k] = iv.lo + static_cast<double>(idx[k]) * iv.width() / static_cast<double>(p - 1);
      }
      const double y = spec.functions[id].eval(args);
      if (!std::isfinite(y)) throw std::domain_error("component at " + tree.label(static_cast<int>(id)) + " returned a non-finite value");
      lo = std::min(lo, y);
      hi = std::max(hi, y);
      std::size_t k = a;
      while (k-- > 0) {
        if (++idx[k] < p) break;
        idx[k] = 0;
      }
      if (k == static_cast<std::size_t>(-1)) break;
    }
    if (outside(target, lo, margin) || outside(target, hi, margin)) {
      ++report.violations;
      report.messages.push_back("component at " + tree.label(static_cast<int>(id)) + " takes values in [" + std::to_string(lo) +
                                ", " + std::to_string(hi) + "], outside its declared range [" + std::to_string(target.lo) + ", " +
                                std::to_string(target.hi) + "]");
    }
  }
  return report;
}

double smoothness_constant(std::span<const double> B, int s, int level, double C) {
  if (s < 1 || level < 1) throw std::invalid_argument("smoothness_constant needs s >= 1 and level >= 1");
  if (B.size() < static_cast<std::size_t>(s)) throw std::invalid_argument("need one derivative bound per order");
  const double b1 = B[0];
  const double l = level;
  if (s == 1) return std::pow(b1, l - 1);
  if (s == 2) return l * std::pow(b1, 2 * l - 2) * B[1];
  const double bstar = *std::max_element(B.begin(), B.begin() + s);
  return std::pow(C * l, s - 1) * std::pow(b1, s * (l - 1)) * std::pow(bstar, s);
}

TreeTensorNetwork encode_network(const CompositionalSpec& spec, const RankMap& ranks, BasisKind scheme) {
  check_spec(spec);
  const auto& tree = spec.tree;
  if (ranks.size() != tree.size()) throw std::invalid_argument("rank map size does not match tree");
  std::vector<UnivariateBasis> node_basis;
  node_basis.reserve(tree.size());
  node_basis.emplace_back(scheme, 1, Interval{0.0, 1.0});  // placeholder for the root
  for (std::size_t id = 1; id < tree.size(); ++id) {
    if (ranks[id] < 1) throw std::invalid_argument("ranks must be positive");
    node_basis.emplace_back(scheme, ranks[id], spec.ranges[id]);
  }

  std::vector<FullTensor> cores(tree.size());
  for (std::size_t id = 0; id < tree.size(); ++id) {
    const auto& node = tree.node(static_cast<int>(id));
    if (node.children.empty()) {
      const auto r = static_cast<std::size_t>(ranks[id]);
      FullTensor eye({r, r}, false);
      for (std::size_t i = 0; i < r; ++i) eye[i * r + i] = 1.0;
      cores[id] = std::move(eye);
      continue;
    }
    const std::size_t a = node.children.size();
    Shape shape;
    const bool root = id == 0;
    const std::size_t rows = root ? 1 : static_cast<std::size_t>(ranks[id]);
    if (!root) shape.push_back(rows);
    std::size_t cols = 1;
    for (int c : node.children) {
      shape.push_back(static_cast<std::size_t>(ranks[static_cast<std::size_t>(c)]));
      cols *= shape.back();
    }
    FullTensor core(shape, false);
    const auto& f = spec.functions[id];
    const auto& target = spec.ranges[id];
    const std::string label = tree.label(static_cast<int>(id));
    parallel_chunks(cols, 4096, [&](std::size_t begin, std::size_t end, std::size_t) {
      std::vector<std::size_t> idx(a);
      std::size_t rest = begin;
      for (std::size_t k = a; k-- > 0;) {
        const std::size_t n = shape[(root ? 0 : 1) + k];
        idx[k] = rest % n;
        rest /= n;
      }
      std::vector<double> args(a);
      Eigen::VectorXd phi;
      for (std::size_t flat = begin; flat < end; ++flat) {
        for (std::size_t k = 0; k < a; ++k) args[k] = node_basis[static_cast<std::size_t>(node.children[k])].nodes()[idx[k]];
        const double y = f.eval(args);
        if (!std::isfinite(y)) throw std::domain_error("component at " + label + " returned a non-finite value");
        if (root) {
          core[flat] = y;
        } else {
          if (outside(target, y, 0.05))
            throw std::domain_error("component at " + label + " leaves its declared range: " + std::to_string(y));
          node_basis[id].values(std::clamp(y, target.lo, target.hi), phi);
          for (std::size_t j = 0; j < rows; ++j) core[j * cols + flat] = phi[static_cast<Eigen::Index>(j)];
        }
        for (std::size_t k = a; k-- > 0;) {
          if (++idx[k] < shape[(root ? 0 : 1) + k]) break;
          idx[k] = 0;
        }
      }
    });
    cores[id] = std::move(core);
  }
  std::vector<UnivariateBasis> leaf_bases;
  for (int nu = 0; nu < tree.dimension(); ++nu) leaf_bases.push_back(node_basis[static_cast<std::size_t>(tree.leaf_of_mode(nu))]);
  return TreeTensorNetwork(tree, std::move(cores), std::move(leaf_bases));
}

namespace {

void check_ranks(const CompositionalSpec& spec, const RankMap& ranks) {
  if (ranks.size() != spec.tree.size()) throw std::invalid_argument("rank map size does not match tree");
  for (std::size_t id = 1; id < ranks.size(); ++id)
    if (ranks[id] < 1) throw std::invalid_argument("ranks must be positive");
}

double linf_sum(const CompositionalSpec& spec, const RankMap& ranks, double Q, int s) {
  check_ranks(spec, ranks);
  double sum = 0.0;
  for (std::size_t id = 1; id < ranks.size(); ++id) {
    const int level = spec.tree.node(static_cast<int>(id)).level;
    sum += Q * smoothness_constant(spec.B, s, level, spec.C) * std::pow(static_cast<double>(ranks[id]), -s);
  }
  return sum;
}

}  // namespace

double l2_error_bound(const CompositionalSpec& spec, const RankMap& ranks, double M) {
  check_spec(spec);
  check_ranks(spec, ranks);
  double sum = 0.0;
  for (std::size_t id = 1; id < ranks.size(); ++id) {
    const int level = spec.tree.node(static_cast<int>(id)).level;
    const double t = M * smoothness_constant(spec.B, spec.s, level, spec.C) * std::pow(static_cast<double>(ranks[id]), -spec.s);
    sum += t * t;
  }
  return std::sqrt(sum);
}

double linf_error_bound(const CompositionalSpec& spec, const RankMap& ranks, double Q_a) {
  check_spec(spec);
  return linf_sum(spec, ranks, Q_a, spec.s);
}

int effective_order(const CompositionalSpec& spec, BasisKind scheme) { return std::min(spec.s, scheme_order(scheme)); }

double scheme_constant(const CompositionalSpec& spec, BasisKind scheme) {
  check_spec(spec);
  double width = 0.0;
  for (std::size_t id = 1; id < spec.ranges.size(); ++id) width = std::max(width, spec.ranges[id].width());
  return interpolation_constant(scheme, spec.arity(), effective_order(spec, scheme), width);
}

double certified_linf_bound(const CompositionalSpec& spec, const RankMap& ranks, BasisKind scheme) {
  return linf_sum(spec, ranks, scheme_constant(spec, scheme), effective_order(spec, scheme));
}

RankMap rank_schedule(const CompositionalSpec& spec, double eps, double M) {
  check_spec(spec);
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("target error must lie in (0, 1)");
  if (!(M > 0.0)) throw std::invalid_argument("approximation constant must be positive");
  const auto& tree = spec.tree;
  const double count = static_cast<double>(tree.size() - 1);
  RankMap ranks(tree.size(), 1);
  double achieved = 0.0;
  for (std::size_t id = 1; id < tree.size(); ++id) {
    const double c = smoothness_constant(spec.B, spec.s, tree.node(static_cast<int>(id)).level, spec.C);
    const double x = std::pow(count * M * c / eps, 1.0 / spec.s);
    // shave rounding noise so exact integers are not bumped up by the ceiling
    ranks[id] = std::max(1, static_cast<int>(std::ceil(x * (1.0 - 1e-12))));
    achieved += M * c * std::pow(static_cast<double>(ranks[id]), -spec.s);
  }
  if (achieved > eps * (1.0 + 1e-9)) throw std::logic_error("rank schedule does not reach the target error");
  return ranks;
}

namespace {

Interval interval_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2) throw std::invalid_argument("interval must be [lo, hi]");
  return Interval{j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

CompositionalSpec spec_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed spec JSON: ") + e.what());
  }
  try {
    DimensionTree tree = tree_from_json(j.at("tree").dump());
    const std::size_t d = static_cast<std::size_t>(tree.dimension());
    CompositionalSpec spec{j.value("name", std::string("custom")), tree, std::vector<ComponentFunction>(tree.size()),
                           std::vector<Interval>(tree.size(), Interval{0.0, 1.0}), j.value("s", 1),
                           j.value("B", std::vector<double>{1.0}), j.value("C", 1.0)};
    if (j.contains("domain")) {
      if (j["domain"].size() != d) throw std::invalid_argument("domain needs one interval per mode");
      for (std::size_t nu = 0; nu < d; ++nu)
        spec.ranges[static_cast<std::size_t>(tree.leaf_of_mode(static_cast<int>(nu)))] = interval_from_json(j["domain"][nu]);
    }
    for (const auto& entry : j.at("nodes")) {
      Modes modes;
      for (int m : entry.at("node")) modes.push_back(m - 1);
      std::sort(modes.begin(), modes.end());
      const int id = tree.find(modes);
      if (id < 0) throw std::invalid_argument("spec refers to unknown node " + modes_label(modes));
      if (tree.is_leaf(id)) throw std::invalid_argument("leaf " + modes_label(modes) + " cannot carry a function");
      const auto arity = static_cast<int>(tree.node(id).children.size());
      auto& slot = spec.functions[static_cast<std::size_t>(id)];
      if (slot.eval) throw std::invalid_argument("node " + modes_label(modes) + " listed twice");
      if (entry.contains("expr")) {
        const Expression expr(entry["expr"].get<std::string>());
        if (expr.arity() > arity)
          throw std::invalid_argument("expression at " + modes_label(modes) + " uses more variables than the node has children");
        slot = ComponentFunction{[expr](std::span<const double> x) { return expr(x); }, expr.text(), expr.text()};
      } else {
        slot = component_function(entry.at("function").get<std::string>(), arity);
      }
      if (id != 0) {
        if (!entry.contains("range")) throw std::invalid_argument("node " + modes_label(modes) + " needs a range");
        spec.ranges[static_cast<std::size_t>(id)] = interval_from_json(entry["range"]);
      }
    }
    check_spec(spec);
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("invalid spec: ") + e.what());
  }
}

std::string spec_to_json(const CompositionalSpec& spec) {
  check_spec(spec);
  const auto& tree = spec.tree;
  nlohmann::json j;
  j["name"] = spec.name;
  j["tree"] = nlohmann::json::parse(tree_to_json(tree));
  j["s"] = spec.s;
  j["B"] = spec.B;
  j["C"] = spec.C;
  nlohmann::json domain = nlohmann::json::array();
  for (const auto& iv : spec.domain()) domain.push_back({iv.lo, iv.hi});
  j["domain"] = domain;
  nlohmann::json nodes = nlohmann::json::array();
  for (std::size_t id = 0; id < tree.size(); ++id) {
    if (tree.is_leaf(static_cast<int>(id))) continue;
    nlohmann::json n;
    nlohmann::json modes = nlohmann::json::array();
    for (int m : tree.node(static_cast<int>(id)).modes) modes.push_back(m + 1);
    n["node"] = modes;
    const auto& f = spec.functions[id];
    if (!f.expression.empty())
      n["expr"] = f.expression;
    else
      n["function"] = f.name;
    if (id != 0) n["range"] = {spec.ranges[id].lo, spec.ranges[id].hi};
    nodes.push_back(n);
  }
  j["nodes"] = nodes;
  return j.dump(2);
}

}  // namespace treetn
