#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "vaoi/core_model.hpp"
#include "vaoi/mdp_solver.hpp"
#include "vaoi/policy.hpp"
#include "vaoi/random.hpp"

namespace vaoi {

struct StepOutcome {
  int g = 0;
  int h = 0;
  int e = 0;
  State next_state;
  double cost = 0.0;  ///< VAoI after the action
};

/// Ground-truth Bernoulli world. Draw order within a slot is (g, h, e);
/// h is drawn even when idling.
class Environment {
 public:
  Environment(const SystemParams& params, std::uint64_t seed, std::uint64_t stream_id = 0);

  StepOutcome step(const State& state, Action action);

  const SystemParams& params() const { return params_; }
  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

 private:
  SystemParams params_;
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  Rng rng_;
};

inline StepOutcome env_step(Environment& env, const State& state, Action action) {
  return env.step(state, action);
}

struct EpisodeSummary {
  double mean_vaoi = 0.0;
  std::size_t horizon = 0;
  std::size_t transmissions = 0;
  std::size_t successes = 0;
  std::size_t arrivals = 0;
  std::size_t generations = 0;
  int max_battery = 0;
  int max_vaoi = 0;
  State final_state;
};

using StepObserver = std::function<void(const State&, Action, const StepOutcome&)>;

/// Runs `horizon` slots from `s0` and averages the VAoI after each step.
EpisodeSummary run_episode(Environment& env, const Policy& policy, std::size_t horizon, State s0,
                           const StepObserver& observer = {});

struct EvalReport {
  double mean_vaoi = 0.0;
  double std_error = 0.0;
  std::size_t runs = 0;
  std::size_t horizon = 0;
  double ci99_lo = 0.0;
  double ci99_hi = 0.0;
};

/// Two-sided 99% normal quantile.
inline constexpr double kZ99 = 2.5758293035489004;

struct MonteCarloOptions {
  std::size_t runs = 1000;
  std::size_t horizon = 10000;
  std::uint64_t seed = 1;
  State start{0, 0};
  /// Slots simulated from `start` and discarded before averaging.
  std::size_t burn_in = 2000;
  /// 0 picks std::thread::hardware_concurrency().
  unsigned threads = 0;
};

/// Run r uses Environment(params, seed, r); results are reduced in run order.
EvalReport monte_carlo_eval(const SystemParams& params, const Policy& policy,
                            const MonteCarloOptions& options = {});

enum class PolicySource { Optimal, Greedy };
enum class Evaluator { Exact, MonteCarlo };

std::string to_string(PolicySource s);
std::string to_string(Evaluator e);

struct SweepRow {
  SystemParams params;
  PolicySource source = PolicySource::Optimal;
  Evaluator evaluator = Evaluator::Exact;
  double avg_vaoi = 0.0;
  double std_error = 0.0;  ///< zero for the exact evaluator
  std::size_t solver_iterations = 0;
  bool ok = true;
  std::string error;
};

struct SweepOptions {
  RviaOptions solver;
  MonteCarloOptions monte_carlo;
};

/// Evaluates every (point, source, evaluator) combination. A failing point is
/// marked and the sweep continues.
std::vector<SweepRow> sweep(const std::vector<SystemParams>& grid,
                            const std::vector<PolicySource>& sources,
                            const std::vector<Evaluator>& evaluators,
                            const SweepOptions& options = {});

}  // namespace vaoi
