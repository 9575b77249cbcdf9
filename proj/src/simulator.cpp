#include "vaoi/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace vaoi {

Environment::Environment(const SystemParams& params, std::uint64_t seed, std::uint64_t stream_id)
    : params_(params), seed_(seed), stream_id_(stream_id), rng_(seed, stream_id) {
  params_.validate();
}

StepOutcome Environment::step(const State& state, Action action) {
  if (!is_valid(params_, state)) throw std::out_of_range("env_step: invalid state");
  if (!is_feasible(state, action)) {
    throw InfeasibleAction("transmit is infeasible at " + to_string(state));
  }
  StepOutcome out;
  out.g = rng_.bernoulli(params_.p_g);
  out.h = rng_.bernoulli(params_.p_s);
  out.e = rng_.bernoulli(params_.beta);
  out.next_state = {vaoi_step(state.delta, out.g, action, out.h, params_.delta_max),
                    battery_step(state.b, out.e, action, params_.B)};
  out.cost = out.next_state.delta;
  return out;
}

EpisodeSummary run_episode(Environment& env, const Policy& policy, std::size_t horizon, State s0,
                           const StepObserver& observer) {
  if (horizon < 1) throw std::invalid_argument("run_episode: horizon must be >= 1");
  const auto& params = env.params();
  if (policy.size() != params.num_states()) {
    throw std::invalid_argument("run_episode: policy does not cover the grid");
  }
  EpisodeSummary summary;
  summary.horizon = horizon;
  summary.max_battery = s0.b;
  summary.max_vaoi = s0.delta;
  State s = s0;
  double total = 0.0;
  for (std::size_t t = 0; t < horizon; ++t) {
    const Action a = policy[state_index(params, s)];
    const StepOutcome out = env.step(s, a);
    if (observer) observer(s, a, out);
    total += out.cost;
    if (a == Action::Transmit) {
      ++summary.transmissions;
      summary.successes += static_cast<std::size_t>(out.h);
    }
    summary.arrivals += static_cast<std::size_t>(out.e);
    summary.generations += static_cast<std::size_t>(out.g);
    s = out.next_state;
    summary.max_battery = std::max(summary.max_battery, s.b);
    summary.max_vaoi = std::max(summary.max_vaoi, s.delta);
  }
  summary.mean_vaoi = total / static_cast<double>(horizon);
  summary.final_state = s;
  return summary;
}

EvalReport monte_carlo_eval(const SystemParams& params, const Policy& policy,
                            const MonteCarloOptions& options) {
  if (options.runs < 2) throw std::invalid_argument("monte_carlo_eval: runs must be >= 2");
  if (!policy.is_feasible(params)) throw InfeasibleAction("monte_carlo_eval: infeasible policy");

  std::vector<double> means(options.runs, 0.0);
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      Environment env(params, options.seed, r);
      State s0 = options.start;
      if (options.burn_in > 0) s0 = run_episode(env, policy, options.burn_in, s0).final_state;
      means[r] = run_episode(env, policy, options.horizon, s0).mean_vaoi;
    }
  };

  unsigned threads = options.threads ? options.threads : std::thread::hardware_concurrency();
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(options.runs)));
  if (threads == 1) {
    work(0, options.runs);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (options.runs + threads - 1) / threads;
    for (std::size_t begin = 0; begin < options.runs; begin += chunk) {
      pool.emplace_back(work, begin, std::min(options.runs, begin + chunk));
    }
  }

  double sum = 0.0;
  for (double m : means) sum += m;
  const double n = static_cast<double>(options.runs);
  const double mean = sum / n;
  double ss = 0.0;
  for (double m : means) ss += (m - mean) * (m - mean);
  const double se = std::sqrt(ss / (n - 1.0) / n);

  EvalReport report;
  report.mean_vaoi = mean;
  report.std_error = se;
  report.runs = options.runs;
  report.horizon = options.horizon;
  report.ci99_lo = mean - kZ99 * se;
  report.ci99_hi = mean + kZ99 * se;
  return report;
}

std::string to_string(PolicySource s) { return s == PolicySource::Optimal ? "optimal" : "greedy"; }

std::string to_string(Evaluator e) { return e == Evaluator::Exact ? "exact" : "monte-carlo"; }

std::vector<SweepRow> sweep(const std::vector<SystemParams>& grid,
                            const std::vector<PolicySource>& sources,
                            const std::vector<Evaluator>& evaluators, const SweepOptions& options) {
  if (grid.empty()) throw std::invalid_argument("sweep: empty grid");
  std::vector<SweepRow> rows;
  for (const auto& point : grid) {
    for (PolicySource source : sources) {
      Policy policy;
      std::size_t iterations = 0;
      std::string failure;
      try {
        if (source == PolicySource::Optimal) {
          auto solved = rvia_solve<double>(point, options.solver);
          policy = std::move(solved.policy);
          iterations = solved.iterations;
        } else {
          point.validate();
          policy = greedy_policy(point);
        }
      } catch (const std::exception& ex) {
        failure = ex.what();
      }
      for (Evaluator evaluator : evaluators) {
        SweepRow row;
        row.params = point;
        row.source = source;
        row.evaluator = evaluator;
        row.solver_iterations = iterations;
        if (!failure.empty()) {
          row.ok = false;
          row.error = failure;
          row.avg_vaoi = std::nan("");
          rows.push_back(std::move(row));
          continue;
        }
        try {
          if (evaluator == Evaluator::Exact) {
            row.avg_vaoi = exact_average_vaoi(point, policy);
          } else {
            const auto report = monte_carlo_eval(point, policy, options.monte_carlo);
            row.avg_vaoi = report.mean_vaoi;
            row.std_error = report.std_error;
          }
        } catch (const std::exception& ex) {
          row.ok = false;
          row.error = ex.what();
          row.avg_vaoi = std::nan("");
        }
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

}  // namespace vaoi
