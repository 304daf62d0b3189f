#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "treetn/discretize.hpp"

namespace treetn {

inline constexpr const char* kLibraryVersion = "0.1.0";

/// Raised for malformed or inconsistent experiment configurations.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parsed experiment description. JSON keys match the field names; see the
/// README for the full layout.
struct ExperimentConfig {
  std::string command;   // widths | approx | compose | predict
  std::string name;      // output stem; defaults to the command
  std::string function;  // registry test function, or "random" (widths, approx)
  int d = 4;
  std::string basis = "piecewise-linear";  // discretization for widths/approx
  int n = 8;                               // basis size per mode
  std::vector<std::string> trees{"balanced"};
  std::vector<int> ranks{1, 2, 3, 4};
  int leaf_dim = 0;        // approx: leaf-space dimension, 0 for none
  std::string spec_json;   // compose: inline spec or registry reference, as JSON text
  std::string scheme = "piecewise-constant";
  std::vector<double> epsilons;  // compose: rank-schedule targets
  double M = kDefaultApproximationConstant;
  int oversample = 4;
  int grid_base = 0;  // 0 picks the largest base within the point budget
  std::vector<std::string> models;  // predict
  std::vector<double> predict_eps;  // predict
  int arity = 2;
  int depth = 2;
  int s = 1;
  double B1 = 1.0;
  double B_star = 1.0;
  std::uint64_t seed = 0;
  std::string source;  // canonical JSON text used for the config hash

  static ExperimentConfig from_json(const std::string& text);
};

/// FNV-1a 64-bit hash rendered as 16 hex digits.
std::string fnv1a_hex(const std::string& text);

struct ExperimentResult {
  std::string csv;      // including the '#' metadata header
  std::string summary;  // JSON
  std::size_t rows = 0;
  std::size_t violations = 0;
};

ExperimentResult run_widths(const ExperimentConfig& config);
ExperimentResult run_approx(const ExperimentConfig& config);
ExperimentResult run_compose(const ExperimentConfig& config);
ExperimentResult run_predict(const ExperimentConfig& config);

/// Dispatches on config.command.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Writes <out>/<name>.csv and <out>/<name>.json.
void write_result(const ExperimentResult& result, const ExperimentConfig& config, const std::string& out_dir);

}  // namespace treetn
