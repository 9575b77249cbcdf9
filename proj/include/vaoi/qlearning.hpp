#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "vaoi/core_model.hpp"
#include "vaoi/policy.hpp"
#include "vaoi/random.hpp"
#include "vaoi/simulator.hpp"

namespace vaoi {

/// Step size as a function of the visit count N (>= 1) or the global step t (>= 0).
struct LearningSchedule {
  enum class Kind { Harmonic, VisitPower };
  Kind kind = Kind::VisitPower;
  double omega = 0.55;

  static LearningSchedule harmonic() { return {Kind::Harmonic, 1.0}; }
  static LearningSchedule visit_power(double omega) { return {Kind::VisitPower, omega}; }

  /// Harmonic: 1 / (t + 1). VisitPower: 1 / N^omega.
  double rate(std::uint64_t visits, std::uint64_t step) const;
  /// Sum of rates diverges and sum of squared rates converges. Harmonic: sum 1/t
  /// diverges, sum 1/t^2 converges. VisitPower: p-series, needs 2*omega > 1 >= omega.
  bool admissible() const {
    return kind == Kind::Harmonic || (omega > 0.5 && omega <= 1.0);
  }
  /// omega must lie in (0.5, 1] for the visit-power variant.
  void validate() const;
  std::string describe() const;
};

/// Episode-indexed exploration probability, clamped to [floor, 1].
struct ExplorationSchedule {
  enum class Kind { Polynomial, Exponential, InverseSqrt };
  Kind kind = Kind::InverseSqrt;
  double epsilon0 = 1.0;
  double mu = 0.0;
  double floor = 0.1;

  double epsilon(std::uint64_t episode) const;
  void validate() const;
  std::string describe() const;
};

enum class LambdaUpdate { EveryStep, RefGated };

std::string to_string(LambdaUpdate mode);
LambdaUpdate parse_lambda_update(const std::string& text);

/// Tabular action values, visit counts and the running average-cost estimate.
///
/// Only the grid shape is stored; the learner never sees p_g, p_s or beta.
struct QTable {
  int delta_max = 0;
  int B = 0;
  Eigen::Matrix<double, Eigen::Dynamic, 2> q;
  Eigen::Matrix<std::uint64_t, Eigen::Dynamic, 2> visits;
  double lambda_hat = 0.0;
  State ref_state{0, 0};

  QTable() = default;
  QTable(int delta_max, int B, State ref_state = {0, 0});

  std::size_t num_states() const { return static_cast<std::size_t>(q.rows()); }
  Eigen::Index index(const State& s) const {
    return static_cast<Eigen::Index>(s.delta) * (B + 1) + s.b;
  }
  State state(Eigen::Index i) const {
    return {static_cast<int>(i / (B + 1)), static_cast<int>(i % (B + 1))};
  }
  /// min over feasible actions of Q(s, .).
  double min_q(const State& s) const;
  /// Feasible argmin, ties to Idle.
  Action greedy_action(const State& s) const;
  std::uint64_t total_visits() const;
};

Action select_action(const QTable& qt, const State& state, double epsilon, Rng& rng);

/// cost - lambda_hat + min_a' Q(s', a') - Q(s, a), min over actions feasible at s'.
double td_error(const QTable& qt, const State& s, Action a, double cost, const State& s_next);

/// Q(s,a) += alpha * delta and N(s,a) += 1.
void q_update(QTable& qt, const State& s, Action a, double delta, double alpha);

void avg_cost_update(QTable& qt, double delta, double gamma, bool at_ref,
                     LambdaUpdate mode = LambdaUpdate::EveryStep);

Policy extract_policy(const QTable& qt);

struct QLearningConfig {
  std::size_t episodes = 2000;
  std::size_t horizon = 2000;
  LearningSchedule alpha = LearningSchedule::visit_power(0.55);
  LearningSchedule gamma = LearningSchedule::visit_power(0.6);
  ExplorationSchedule exploration{};
  LambdaUpdate lambda_update = LambdaUpdate::EveryStep;
  State ref_state{0, 0};
  std::uint64_t seed = 1;
  /// Exact long-run evaluation of the extracted policy after each episode.
  bool exact_evaluation = true;
  /// Monte Carlo check after each episode; runs = 0 disables it.
  MonteCarloOptions evaluation{.runs = 0, .horizon = 2000, .threads = 1};
  /// Called after every learning step with the updated table.
  std::function<void(const QTable&, const StepOutcome&)> on_step;
};

struct LearningRecord {
  std::size_t episode = 0;  ///< 1-based: row k follows k finished episodes
  double epsilon = 0.0;     ///< exploration used during the episode
  double lambda_hat = 0.0;
  double behaviour_avg_vaoi = 0.0;  ///< mean cost while learning
  double exact_avg_vaoi = 0.0;      ///< NaN when exact evaluation is off
  double mc_avg_vaoi = 0.0;         ///< NaN when Monte Carlo is off
};

struct QLearningReport {
  std::vector<LearningRecord> curve;
  QTable table;
  Policy policy;
  std::uint64_t steps = 0;
};

/// Average-cost tabular Q-learning against a simulated environment.
///
/// The learner only exchanges (state, action, cost, next state) with the
/// environment. Each episode starts from a state drawn uniformly over the grid;
/// Q, visit counts and lambda_hat persist across episodes.
QLearningReport run_q_learning(const SystemParams& true_params, const QLearningConfig& config);

}  // namespace vaoi
