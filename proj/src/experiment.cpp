#include "treetn/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "treetn/compose.hpp"
#include "treetn/rates.hpp"
#include "treetn/registry.hpp"
#include "treetn/truncate.hpp"
#include "treetn/ttn.hpp"

namespace treetn {

using nlohmann::json;

namespace {

template <typename T>
std::vector<T> one_or_many(const json& j) {
  if (j.is_array()) return j.get<std::vector<T>>();
  return {j.get<T>()};
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::vector<std::string> known{"command", "name",       "function",  "d",           "basis",   "n",
                                              "trees",   "tree",       "ranks",     "leaf_dim",    "spec",    "scheme",
                                              "epsilons", "M",         "oversample", "grid_base",  "models",  "predict_eps",
                                              "arity",   "depth",      "s",         "B1",          "B_star",  "seed"};
  for (const auto& [key, value] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end()) throw ConfigError("unknown config key '" + key + "'");
  ExperimentConfig c;
  try {
    c.command = j.at("command").get<std::string>();
    c.name = j.value("name", c.command);
    c.function = j.value("function", std::string());
    c.d = j.value("d", c.d);
    c.basis = j.value("basis", c.basis);
    c.n = j.value("n", c.n);
    if (j.contains("trees")) c.trees = one_or_many<std::string>(j["trees"]);
    if (j.contains("tree")) c.trees = one_or_many<std::string>(j["tree"]);
    if (j.contains("ranks")) c.ranks = one_or_many<int>(j["ranks"]);
    c.leaf_dim = j.value("leaf_dim", 0);
    if (j.contains("spec")) c.spec_json = j["spec"].dump();
    c.scheme = j.value("scheme", c.scheme);
    if (j.contains("epsilons")) c.epsilons = one_or_many<double>(j["epsilons"]);
    c.M = j.value("M", c.M);
    c.oversample = j.value("oversample", c.oversample);
    c.grid_base = j.value("grid_base", 0);
    if (j.contains("models")) c.models = one_or_many<std::string>(j["models"]);
    if (j.contains("predict_eps")) c.predict_eps = one_or_many<double>(j["predict_eps"]);
    c.arity = j.value("arity", c.arity);
    c.depth = j.value("depth", c.depth);
    c.s = j.value("s", c.s);
    c.B1 = j.value("B1", c.B1);
    c.B_star = j.value("B_star", c.B_star);
    c.seed = j.value("seed", std::uint64_t{0});
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config field has the wrong type: ") + e.what());
  }
  c.source = j.dump();

  const std::vector<std::string> commands{"widths", "approx", "compose", "predict"};
  if (std::find(commands.begin(), commands.end(), c.command) == commands.end())
    throw ConfigError("unknown command '" + c.command + "'");
  if (c.name.empty() || c.name.find('/') != std::string::npos) throw ConfigError("name must be a plain file stem");
  if ((c.command == "widths" || c.command == "approx") && c.function.empty()) throw ConfigError("'function' is required");
  if (c.command == "compose" && c.spec_json.empty()) throw ConfigError("'spec' is required");
  if (c.command == "predict" && (c.models.empty() || c.predict_eps.empty()))
    throw ConfigError("'models' and 'predict_eps' must be nonempty");
  if (c.trees.empty() || c.ranks.empty()) throw ConfigError("sweeps must be nonempty");
  for (int r : c.ranks)
    if (r < 1) throw ConfigError("ranks must be positive");
  if (c.d < 2 || c.n < 1 || c.oversample < 1 || c.grid_base < 0 || c.leaf_dim < 0)
    throw ConfigError("d >= 2, n >= 1, oversample >= 1 and nonnegative grid_base, leaf_dim required");
  return c;
}

namespace {

// the seed can be overridden on the command line, so it is hashed too
std::string config_hash(const ExperimentConfig& c) { return fnv1a_hex(c.source + "|seed=" + std::to_string(c.seed)); }

std::string header(const ExperimentConfig& c) {
  std::ostringstream os;
  os << "# treetn " << kLibraryVersion << "\n"
     << "# command: " << c.command << "\n"
     << "# config-hash: " << config_hash(c) << "\n"
     << "# seed: " << c.seed << "\n";
  return os.str();
}

json summary_base(const ExperimentConfig& c) {
  return json{{"command", c.command},
              {"name", c.name},
              {"version", kLibraryVersion},
              {"config_hash", config_hash(c)},
              {"seed", c.seed}};
}

template <typename F>
auto as_config_error(F f) {
  try {
    return f();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

// Orthonormal coefficient tensor of the configured function.
FullTensor coefficient_tensor(const ExperimentConfig& c) {
  const Shape shape(static_cast<std::size_t>(c.d), static_cast<std::size_t>(c.n));
  if (c.function == "random") {
    FullTensor a(shape);
    std::mt19937_64 rng(c.seed);
    std::normal_distribution<double> normal;
    for (auto& v : a.data()) v = normal(rng);
    return a;
  }
  const auto tf = as_config_error([&] { return test_function(c.function, c.d); });
  const auto kind = as_config_error([&] { return basis_kind_from_string(c.basis); });
  std::vector<UnivariateBasis> bases;
  for (int nu = 0; nu < c.d; ++nu) bases.emplace_back(kind, c.n, tf.f.domain[static_cast<std::size_t>(nu)]);
  return orthonormalize(sample_coefficients(tf.f, bases), bases);
}

std::string level_ranks_label(const DimensionTree& tree, const RankMap& ranks) {
  std::string out;
  for (int level = 1; level <= tree.depth(); ++level) {
    int lo = INT32_MAX, hi = 0;
    for (int id : tree.level_nodes(level)) {
      lo = std::min(lo, ranks[static_cast<std::size_t>(id)]);
      hi = std::max(hi, ranks[static_cast<std::size_t>(id)]);
    }
    if (!out.empty()) out += ';';
    out += lo == hi ? std::to_string(lo) : std::to_string(lo) + "-" + std::to_string(hi);
  }
  return out;
}

}  // namespace

ExperimentResult run_widths(const ExperimentConfig& c) {
  const FullTensor a = coefficient_tensor(c);
  const DimensionTree tree = as_config_error([&] { return make_tree(c.trees.front(), c.d); });
  const WidthProfile profile = width_profile(a, tree);
  std::ostringstream csv;
  csv << header(c);
  write_width_csv(profile, csv);
  json s = summary_base(c);
  s["tree"] = json::parse(tree_to_json(tree));
  s["norm"] = a.norm();
  json delta0 = json::object();
  std::size_t rows = 0;
  for (std::size_t id = 1; id < tree.size(); ++id) {
    delta0[tree.label(static_cast<int>(id))] = profile.nodes[id].width(0);
    rows += profile.nodes[id].sigma.size();
  }
  s["delta0"] = delta0;
  s["rows"] = rows;
  s["violations"] = 0;
  return ExperimentResult{csv.str(), s.dump(2), rows, 0};
}

ExperimentResult run_approx(const ExperimentConfig& c) {
  const FullTensor a = coefficient_tensor(c);
  std::ostringstream csv;
  csv << header(c) << "tree,rank,N,error,bound,ok\n";
  json s = summary_base(c);
  json finals = json::object();
  std::size_t rows = 0, violations = 0;
  const double slack = 1e-9 + 1e-12 * a.norm();
  for (const auto& kind : c.trees) {
    const DimensionTree tree = as_config_error([&] { return make_tree(kind, c.d); });
    const WidthProfile profile = width_profile(a, tree);
    ProjectionOptions options;
    LeafDiscretization leaves;
    if (c.leaf_dim > 0) {
      if (c.leaf_dim > c.n) throw ConfigError("leaf_dim exceeds n");
      options.leaf_dims.assign(static_cast<std::size_t>(c.d), static_cast<std::size_t>(c.leaf_dim));
      leaves = leaf_discretization(a, options.leaf_dims);
    }
    for (int r : c.ranks) {
      const RankMap ranks = uniform_ranks(tree, r);
      const Projection p = project_to_tree(a, tree, ranks, options);
      const double error = distance(a, p.approximation);
      const double bound = c.leaf_dim > 0 ? error_bound_rhs(profile, ranks, BoundMode::WithLeaves, leaves)
                                          : error_bound_rhs(profile, ranks);
      const std::size_t N = complexity_N(p.network);
      const bool ok = error <= bound + slack;
      violations += ok ? 0 : 1;
      ++rows;
      csv << kind << ',' << r << ',' << N << ',' << num(error) << ',' << num(bound) << ',' << (ok ? 1 : 0) << '\n';
      finals[kind] = json{{"rank", r}, {"N", N}, {"error", error}, {"bound", bound}};
    }
  }
  s["norm"] = a.norm();
  s["final"] = finals;
  s["rows"] = rows;
  s["violations"] = violations;
  return ExperimentResult{csv.str(), s.dump(2), rows, violations};
}

namespace {

CompositionalSpec load_spec(const std::string& spec_json) {
  return as_config_error([&] {
    const json j = json::parse(spec_json);
    if (j.is_string()) return compositional_spec(j.get<std::string>());
    return spec_from_json(spec_json);
  });
}

MeasureGrid grid_for(const ExperimentConfig& c, int dims, int max_rank) {
  MeasureGrid g;
  g.oversample = c.oversample;
  int base = c.grid_base;
  if (base == 0) {
    base = static_cast<int>(std::floor(std::pow(static_cast<double>(kMaxMeasurePoints), 1.0 / dims) / c.oversample + 1e-9));
    base = std::clamp(base, 1, std::max(1, max_rank));
  }
  g.base.assign(static_cast<std::size_t>(dims), base);
  return g;
}

}  // namespace

ExperimentResult run_compose(const ExperimentConfig& c) {
  const CompositionalSpec spec = load_spec(c.spec_json);
  const BasisKind scheme = as_config_error([&] { return basis_kind_from_string(c.scheme); });
  const RangeReport probe = validate_ranges(spec);
  if (probe.violations > 0) throw ConfigError("spec ranges are inconsistent: " + probe.messages.front());
  const auto& tree = spec.tree;
  const FunctionHandle f = composition_function(spec);
  const int max_rank = *std::max_element(c.ranks.begin(), c.ranks.end());
  const MeasureGrid grid = grid_for(c, tree.dimension(), max_rank);
  const double tol = 1e-12;

  std::ostringstream csv;
  csv << header(c) << "kind,eps,ranks,N,linf_error,linf_bound,l2_error,l2_bound,ok\n";
  std::size_t rows = 0, violations = 0;
  std::vector<std::pair<double, double>> sweep;

  auto row = [&](const std::string& kind, const std::string& eps_cell, const RankMap& ranks, double target) {
    const TreeTensorNetwork net = encode_network(spec, ranks, scheme);
    const FunctionHandle g = net.as_function("encoded");
    const double linf = measure_error(f, g, Norm::Linf, grid);
    const double l2 = measure_error(f, g, Norm::L2, grid);
    const double linf_bound = certified_linf_bound(spec, ranks, scheme);
    const double l2_bound = l2_error_bound(spec, ranks, c.M);
    const std::size_t N = complexity_N(net);
    const bool ok = linf <= linf_bound + tol && linf <= target + tol;
    violations += ok ? 0 : 1;
    ++rows;
    csv << kind << ',' << eps_cell << ',' << level_ranks_label(tree, ranks) << ',' << N << ',' << num(linf) << ','
        << num(linf_bound) << ',' << num(l2) << ',' << num(l2_bound) << ',' << (ok ? 1 : 0) << '\n';
    return std::make_pair(static_cast<double>(N), linf);
  };

  for (int r : c.ranks) sweep.push_back(row("sweep", "", uniform_ranks(tree, r), INFINITY));

  // schedule at the order the scheme certifies, with M = Q_a so that the
  // target is an L-infinity guarantee
  CompositionalSpec certified = spec;
  certified.s = effective_order(spec, scheme);
  const double q = scheme_constant(spec, scheme);
  for (double eps : c.epsilons) {
    const RankMap ranks = as_config_error([&] { return rank_schedule(certified, eps, q); });
    row("schedule", num(eps), ranks, eps);
  }

  json s = summary_base(c);
  s["spec"] = spec.name;
  s["scheme"] = to_string(scheme);
  s["grid"] = {{"oversample", grid.oversample}, {"base", grid.base.front()}};
  s["Q_a"] = q;
  s["effective_order"] = certified.s;
  s["predicted_slope"] = -static_cast<double>(certified.s) / (spec.arity() + 1);
  const bool fittable = sweep.size() >= 3 && std::all_of(sweep.begin(), sweep.end(), [](const auto& p) { return p.second > 0; });
  if (fittable) {
    try {
      const RateFit fit = fit_rate(sweep);
      s["fit"] = {{"slope", fit.slope}, {"intercept", fit.intercept}, {"residual", fit.residual}};
    } catch (const std::invalid_argument& e) {
      s["fit"] = {{"error", e.what()}};
    }
  } else {
    s["fit"] = nullptr;
  }
  s["rows"] = rows;
  s["violations"] = violations;
  return ExperimentResult{csv.str(), s.dump(2), rows, violations};
}

ExperimentResult run_predict(const ExperimentConfig& c) {
  std::ostringstream csv;
  csv << header(c) << "model,eps,value\n";
  json records = json::array();
  std::size_t rows = 0;
  for (const auto& name : c.models) {
    const RateModel model = as_config_error([&] { return rate_model_from_string(name); });
    for (double eps : c.predict_eps) {
      PredictorInputs in{eps, c.d, c.s, c.arity, c.depth, c.B1, c.B_star, 1.0};
      const Prediction p = as_config_error([&] { return predict_complexity(model, in); });
      csv << name << ',' << num(eps) << ',' << num(p.value) << '\n';
      records.push_back(json::parse(p.to_json()));
      ++rows;
    }
  }
  json s = summary_base(c);
  s["predictions"] = records;
  s["rows"] = rows;
  s["violations"] = 0;
  return ExperimentResult{csv.str(), s.dump(2), rows, 0};
}

ExperimentResult run_experiment(const ExperimentConfig& c) {
  if (c.command == "widths") return run_widths(c);
  if (c.command == "approx") return run_approx(c);
  if (c.command == "compose") return run_compose(c);
  if (c.command == "predict") return run_predict(c);
  throw ConfigError("unknown command '" + c.command + "'");
}

void write_result(const ExperimentResult& result, const ExperimentConfig& c, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  for (const auto& [ext, text] : {std::pair<std::string, const std::string*>{".csv", &result.csv}, {".json", &result.summary}}) {
    const fs::path path = fs::path(out_dir) / (c.name + ext);
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    os << *text;
    if (ext == ".json") os << '\n';
  }
}

}  // namespace treetn
