#pragma once

#include <Eigen/Dense>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "chaoskit/error.hpp"
#include "chaoskit/sequences.hpp"

namespace chaoskit {

/// Malformed or inconsistent experiment configuration (CLI exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

enum class Experiment { ChaosCheck, FmtVerify, JointVerify, BoundCheck, Thm33Check, ProductFormulaCheck };

std::string experiment_name(Experiment e);
Experiment experiment_from_name(const std::string& name);

struct Tolerances {
  double abs = 1e-9;       // closed-form comparisons
  double chaos = 1e-8;     // relative mass in chaos checks
  double thm33 = 1e-8;     // spectral inequality, relative to scale
  double product = 1e-10;  // product-formula identity, relative to 1+|lhs|
  double sigma = 3.0;      // Monte Carlo standard errors allowed in bound-check
};

struct SequenceEntry {
  SequenceSpec spec;
  std::optional<Eigen::MatrixXd> target;  // defaults to the sequence's limit covariance
  std::optional<std::vector<int>> n_grid;  // overrides the config-wide grid
};

struct ExperimentConfig {
  Experiment experiment = Experiment::FmtVerify;
  std::vector<SequenceEntry> sequences;
  std::vector<int> n_grid;
  std::uint64_t seed = 0;
  std::size_t n_samples = 100000;
  Tolerances tolerances;
  std::filesystem::path out = ".";

  bool expect_chaotic = true;                // chaos-check
  std::optional<double> final_threshold;     // joint-verify
  int instances = 500;                       // thm33-check, product-formula-check
  std::vector<BasisKind> families;           // thm33-check
  int max_order = 3;                         // product-formula-check
  int max_dim = 4;                           // product-formula-check
  std::vector<double> t_grid{0.25, 0.5, 1.0, 2.0};  // bound-check
  double t_max_norm = 3.0;                   // bound-check
};

/// Parses a JSON config. The experiment tag comes from the command line; a
/// "experiment" field in the document, if present, must agree with it.
ExperimentConfig parse_config(const nlohmann::json& doc, Experiment experiment);
ExperimentConfig load_config(const std::filesystem::path& path, Experiment experiment);

/// Limit covariance of a sequence: [[scale²]] for spread, [[1, ρδ],[ρδ, 1]] for pair_mixed.
Eigen::MatrixXd default_target(const SequenceSpec& spec);

struct RunResult {
  int exit_code = 0;  // 0 all gated checks pass, 1 otherwise
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  nlohmann::json report;
  std::vector<std::string> failures;  // one line per failing row / check

  std::string csv() const;
};

RunResult run_experiment(const ExperimentConfig& config);

/// Writes report.json and report.csv into config.out (created if missing).
void write_outputs(const RunResult& result, const std::filesystem::path& out_dir);

/// 17 significant digits, enough to round-trip any double.
std::string format_double(double v);

}  // namespace chaoskit
