#include "vaoi/estimation.hpp"

#include <cmath>
#include <stdexcept>

namespace vaoi {

std::string to_string(EstimatorMode mode) {
  return mode == EstimatorMode::AttemptConditioned ? "attempt" : "oracle";
}

EstimatorMode parse_estimator_mode(const std::string& text) {
  if (text == "attempt" || text == "attempt-conditioned") return EstimatorMode::AttemptConditioned;
  if (text == "oracle" || text == "every-slot-oracle") return EstimatorMode::EverySlotOracle;
  throw std::invalid_argument("estimator mode must be 'attempt' or 'oracle', got '" + text + "'");
}

namespace {

double mean_or_half(std::uint64_t successes, std::uint64_t n) {
  return n == 0 ? 0.5 : static_cast<double>(successes) / static_cast<double>(n);
}

double add_one(std::uint64_t successes, std::uint64_t n) {
  return (static_cast<double>(successes) + 1.0) / (static_cast<double>(n) + 2.0);
}

}  // namespace

double EstimatorState::p_g_hat() const { return mean_or_half(gen_successes, gen_observations); }

double EstimatorState::p_s_hat() const { return mean_or_half(tx_successes, tx_attempts); }

EstimatorState update_generation_estimate(EstimatorState est, int g) {
  ++est.gen_observations;
  est.gen_successes += g ? 1 : 0;
  ++est.slot_count;
  return est;
}

EstimatorState update_channel_estimate(EstimatorState est, bool attempted, int h) {
  if (est.mode == EstimatorMode::EverySlotOracle || attempted) {
    ++est.tx_attempts;
    est.tx_successes += h ? 1 : 0;
  }
  return est;
}

Estimates smoothed_estimates(const EstimatorState& est) {
  return {add_one(est.gen_successes, est.gen_observations),
          add_one(est.tx_successes, est.tx_attempts)};
}

Estimates raw_estimates(const EstimatorState& est) { return {est.p_g_hat(), est.p_s_hat()}; }

EstimationReport run_estimation_based_mdp(const SystemParams& true_params,
                                          const EstimationConfig& config) {
  true_params.validate();
  if (config.horizon < 1) throw std::invalid_argument("estimation: horizon must be >= 1");

  EstimationReport report;
  report.estimator.mode = config.mode;

  const Estimates initial = config.initial_estimates.value_or(Estimates{});
  std::optional<ValueFunction<double>> warm;

  auto solve_and_record = [&](std::size_t episode, const Estimates& model_estimates) {
    SystemParams model_params = true_params;
    model_params.p_g = model_estimates.p_g;
    model_params.p_s = model_estimates.p_s;
    auto solved = rvia_solve(build_model<double>(model_params), config.solver, warm);
    warm = solved.value;

    EstimationEpisode row;
    row.episode = episode;
    row.raw = raw_estimates(report.estimator);
    row.model = model_estimates;
    row.solver_iterations = solved.iterations;
    row.exact_avg_vaoi = exact_average_vaoi(true_params, solved.policy);
    row.mc_avg_vaoi = std::nan("");
    if (config.evaluation.runs >= 2) {
      MonteCarloOptions mc = config.evaluation;
      mc.seed = substream_seed(config.seed, 1000 + episode);
      row.mc_avg_vaoi = monte_carlo_eval(true_params, solved.policy, mc).mean_vaoi;
    }
    row.policy = std::move(solved.policy);
    report.episodes.push_back(std::move(row));
  };

  solve_and_record(0, initial);

  Environment env(true_params, config.seed, 0);
  State state{0, 0};
  for (std::size_t k = 1; k <= config.episodes; ++k) {
    const Policy& policy = report.episodes.back().policy;
    auto observe = [&](const State&, Action a, const StepOutcome& out) {
      report.estimator = update_generation_estimate(report.estimator, out.g);
      report.estimator = update_channel_estimate(report.estimator, a == Action::Transmit, out.h);
    };
    state = run_episode(env, policy, config.horizon, state, observe).final_state;
    const Estimates next =
        config.freeze_estimates ? initial : smoothed_estimates(report.estimator);
    solve_and_record(k, next);
  }
  return report;
}

}  // namespace vaoi
