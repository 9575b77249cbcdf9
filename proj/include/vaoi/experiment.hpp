#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "vaoi/estimation.hpp"
#include "vaoi/export.hpp"
#include "vaoi/mdp_solver.hpp"
#include "vaoi/qlearning.hpp"
#include "vaoi/simulator.hpp"

namespace vaoi {

inline constexpr const char* kVersion = "0.1.0";

/// Invalid configuration; `field()` names the offending key path.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

/// Everything a subcommand needs. Defaults reproduce the reference setup:
/// p_g=0.3, p_s=0.8, beta=0.1, B=10, delta_max=10, 1000 x 10000 Monte Carlo,
/// 2000-slot episodes, eps_k = max(1/sqrt(k+1), 0.1), alpha = N^-0.55, gamma = N^-0.6.
struct ExperimentConfig {
  SystemParams system;
  RviaOptions solver;

  struct Learning {
    std::size_t episodes = 2000;
    std::size_t horizon = 2000;
    LearningSchedule alpha = LearningSchedule::visit_power(0.55);
    LearningSchedule gamma = LearningSchedule::visit_power(0.6);
    ExplorationSchedule exploration{};
    LambdaUpdate lambda_update = LambdaUpdate::EveryStep;
    State ref_state{0, 0};
  } learning;

  struct Estimation {
    std::size_t episodes = 100;
    std::size_t horizon = 2000;
    EstimatorMode mode = EstimatorMode::AttemptConditioned;
  } estimation;

  struct Evaluation {
    std::size_t runs = 1000;
    std::size_t horizon = 10000;
    /// Monte Carlo check of each learned/estimated policy; 0 disables.
    std::size_t episode_runs = 20;
    std::size_t episode_horizon = 2000;
    /// Slots discarded from (0, 0) before each Monte Carlo run is averaged.
    std::size_t burn_in = 2000;
  } evaluation;

  struct Sweep {
    std::vector<double> betas{0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5};
    std::vector<int> capacities{1, 2, 5, 10, 15};
    std::vector<int> delta_maxes{1, 2, 3, 4, 5, 10, 15, 20, 25};
    std::vector<Evaluator> evaluators{Evaluator::Exact, Evaluator::MonteCarlo};
  } sweep;

  std::uint64_t seed = 1;
  std::string output_dir = "out";
  unsigned threads = 0;

  /// Throws ConfigError naming the first invalid field.
  void validate() const;
};

/// Strict parse: unknown keys and wrong types are ConfigErrors.
ExperimentConfig parse_config(const json& j);
ExperimentConfig load_config(const std::filesystem::path& path);
json to_json(const ExperimentConfig& config);

/// Run manifest embedded in or written next to every output.
json make_manifest(const std::string& command, const ExperimentConfig& config,
                   double wall_seconds);

struct CommandResult {
  std::vector<std::filesystem::path> files;
  json summary;  ///< printed to stdout by the CLI
};

CommandResult cmd_solve(const ExperimentConfig& config);
CommandResult cmd_table_dmax(const ExperimentConfig& config);
CommandResult cmd_sweep_beta(const ExperimentConfig& config);
CommandResult cmd_estimate(const ExperimentConfig& config);
CommandResult cmd_qlearn(const ExperimentConfig& config);
CommandResult cmd_compare(const ExperimentConfig& config);

}  // namespace vaoi
