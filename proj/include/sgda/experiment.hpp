#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "sgda/serialization.hpp"

namespace sgda {

/// Parsed experiment document. See README for the JSON layout.
struct ExperimentConfig {
  json problem;
  Algorithm algorithm = Algorithm::smoothed_gda;
  std::optional<double> safety;               ///< params.auto
  std::optional<SolverParams> explicit_params;  ///< params.explicit
  StopCriteria horizon;
  std::optional<long> theorem1_T;
  RecordOptions record;
  std::uint64_t seed = 0;
  std::string output;
  /// Rate mode only: r_t = scale * t^exponent replaces the solver run.
  struct Synthetic {
    double exponent = -0.5;
    double scale = 1.0;
    long length = 100000;
  };
  std::optional<Synthetic> synthetic;
};

ExperimentConfig parse_config(const json& doc);
ExperimentConfig load_config(const std::string& path);

/// Instance for the config; the config seed fills in a missing generator seed.
Instance build_instance(const ExperimentConfig& config);

/// Parameters the config asks for on this instance. N is the block count for
/// the block scheme and 1 otherwise.
SolverParams resolve_params(const ExperimentConfig& config, const MinMaxProblem& problem);

struct Experiment {
  Instance instance;
  SolverParams params;
  RunResult result;
};

Experiment run_experiment(const ExperimentConfig& config);

json summary_json(const Experiment& experiment);

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitNumerical = 2 };

/// The three commands write into `out_dir` and report progress on `log`.
int cmd_run(const std::string& config_path, const std::string& out_dir, bool svg, std::ostream& log);
int cmd_compare(const std::string& config_a, const std::string& config_b,
                const std::string& out_dir, std::ostream& log);
int cmd_rate(const std::string& config_path, const std::vector<std::uint64_t>& seeds,
             double t_lo, double t_hi, const std::string& out_dir, std::ostream& log,
             unsigned jobs = 0);

/// Iteration counts at which the best-so-far residual first reaches 10^k,
/// keyed "1e<k>"; null where never reached.
json first_decades(const std::vector<std::pair<double, double>>& best, int k_hi = 2, int k_lo = -12);

/// Parses "0-9" or "0,1,5".
std::vector<std::uint64_t> parse_seed_list(const std::string& text);

}  // namespace sgda
