#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vaoi/core_model.hpp"
#include "vaoi/mdp_solver.hpp"
#include "vaoi/policy.hpp"
#include "vaoi/simulator.hpp"

namespace vaoi {

/// How the channel outcome h_t becomes observable.
enum class EstimatorMode {
  /// h_t is seen only through ACK feedback on slots with a transmission.
  AttemptConditioned,
  /// h_t is seen every slot, whether or not a transmission happened.
  EverySlotOracle,
};

std::string to_string(EstimatorMode mode);
EstimatorMode parse_estimator_mode(const std::string& text);

/// Running sufficient statistics for the Bernoulli MLEs of p_g and p_s.
///
/// In oracle mode `tx_attempts` counts every observed slot, not only slots
/// with a transmission.
struct EstimatorState {
  std::uint64_t gen_observations = 0;
  std::uint64_t gen_successes = 0;
  std::uint64_t tx_attempts = 0;
  std::uint64_t tx_successes = 0;
  std::uint64_t slot_count = 0;
  EstimatorMode mode = EstimatorMode::AttemptConditioned;

  /// Sample mean of g; 0.5 before the first observation.
  double p_g_hat() const;
  /// Sample mean of the observed h; 0.5 before the first observation.
  double p_s_hat() const;

  friend bool operator==(const EstimatorState&, const EstimatorState&) = default;
};

/// Records one generation observation; also advances the slot counter.
EstimatorState update_generation_estimate(EstimatorState est, int g);

/// Records a channel outcome if this slot reveals one under `est.mode`.
EstimatorState update_channel_estimate(EstimatorState est, bool attempted, int h);

struct Estimates {
  double p_g = 0.5;
  double p_s = 0.5;
};

/// Add-one smoothed estimates (k + 1) / (n + 2); always strictly inside (0, 1).
Estimates smoothed_estimates(const EstimatorState& est);
Estimates raw_estimates(const EstimatorState& est);

struct EstimationConfig {
  std::size_t episodes = 100;
  std::size_t horizon = 2000;
  EstimatorMode mode = EstimatorMode::AttemptConditioned;
  std::uint64_t seed = 1;
  RviaOptions solver;
  /// Model used before any data; defaults to (0.5, 0.5).
  std::optional<Estimates> initial_estimates;
  /// Keep solving with the initial estimates; observations are still counted.
  bool freeze_estimates = false;
  /// Monte Carlo check of each episode's policy; runs = 0 disables it.
  MonteCarloOptions evaluation{.runs = 0, .horizon = 2000, .threads = 1};
};

struct EstimationEpisode {
  std::size_t episode = 0;  ///< number of data episodes seen so far
  Estimates raw;            ///< reported MLEs
  Estimates model;          ///< estimates the policy was solved with
  double exact_avg_vaoi = 0.0;
  double mc_avg_vaoi = 0.0;  ///< NaN when Monte Carlo is disabled
  std::size_t solver_iterations = 0;
  Policy policy;
};

struct EstimationReport {
  std::vector<EstimationEpisode> episodes;  ///< row 0 is the pre-data policy
  EstimatorState estimator;
};

/// Act, observe, re-estimate, re-solve; one row per episode boundary.
///
/// Only p_g and p_s are estimated. beta, B and delta_max are taken from
/// `true_params`. The system state carries over from one episode to the next.
EstimationReport run_estimation_based_mdp(const SystemParams& true_params,
                                          const EstimationConfig& config);

}  // namespace vaoi
