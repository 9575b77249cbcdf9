#include "vaoi/qlearning.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "vaoi/mdp_solver.hpp"

namespace vaoi {

double LearningSchedule::rate(std::uint64_t visits, std::uint64_t step) const {
  if (kind == Kind::Harmonic) return 1.0 / (static_cast<double>(step) + 1.0);
  if (visits == 0) throw std::invalid_argument("visit-power rate needs a visit count >= 1");
  return 1.0 / std::pow(static_cast<double>(visits), omega);
}

void LearningSchedule::validate() const {
  if (!admissible()) {
    throw std::invalid_argument("visit-power omega must lie in (0.5, 1], got " +
                                std::to_string(omega));
  }
}

std::string LearningSchedule::describe() const {
  if (kind == Kind::Harmonic) return "harmonic";
  std::ostringstream os;
  os << "visit-power(" << omega << ")";
  return os.str();
}

double ExplorationSchedule::epsilon(std::uint64_t episode) const {
  const double k = static_cast<double>(episode);
  double raw = 0.0;
  switch (kind) {
    case Kind::Polynomial:
      raw = epsilon0 / (1.0 + mu * k);
      break;
    case Kind::Exponential:
      raw = epsilon0 * std::exp(-mu * k);
      break;
    case Kind::InverseSqrt:
      raw = epsilon0 / std::sqrt(k + 1.0);
      break;
  }
  return std::clamp(raw, floor, 1.0);
}

void ExplorationSchedule::validate() const {
  if (!(epsilon0 > 0.0 && epsilon0 <= 1.0)) {
    throw std::invalid_argument("epsilon0 must lie in (0, 1]");
  }
  if (kind != Kind::InverseSqrt && !(mu > 0.0)) {
    throw std::invalid_argument("exploration decay mu must be positive");
  }
  if (!(floor >= 0.0 && floor <= 1.0)) {
    throw std::invalid_argument("exploration floor must lie in [0, 1]");
  }
}

std::string ExplorationSchedule::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::Polynomial:
      os << "polynomial(eps0=" << epsilon0 << ", mu=" << mu << ")";
      break;
    case Kind::Exponential:
      os << "exponential(eps0=" << epsilon0 << ", mu=" << mu << ")";
      break;
    case Kind::InverseSqrt:
      os << "inverse-sqrt(eps0=" << epsilon0 << ")";
      break;
  }
  os << " floor=" << floor;
  return os.str();
}

std::string to_string(LambdaUpdate mode) {
  return mode == LambdaUpdate::EveryStep ? "every-step" : "ref-gated";
}

LambdaUpdate parse_lambda_update(const std::string& text) {
  if (text == "every-step") return LambdaUpdate::EveryStep;
  if (text == "ref-gated") return LambdaUpdate::RefGated;
  throw std::invalid_argument("lambda update must be 'every-step' or 'ref-gated', got '" + text +
                              "'");
}

QTable::QTable(int delta_max_, int B_, State ref)
    : delta_max(delta_max_), B(B_), ref_state(ref) {
  if (delta_max < 1 || B < 1) throw std::invalid_argument("QTable: grid must be at least 2x2");
  const Eigen::Index n = static_cast<Eigen::Index>(delta_max + 1) * (B + 1);
  q = Eigen::Matrix<double, Eigen::Dynamic, 2>::Zero(n, 2);
  visits = Eigen::Matrix<std::uint64_t, Eigen::Dynamic, 2>::Zero(n, 2);
}

double QTable::min_q(const State& s) const {
  const auto i = index(s);
  if (s.b <= 0) return q(i, 0);
  return std::min(q(i, 0), q(i, 1));
}

Action QTable::greedy_action(const State& s) const {
  const auto i = index(s);
  if (s.b >= 1 && q(i, 1) < q(i, 0)) return Action::Transmit;
  return Action::Idle;
}

std::uint64_t QTable::total_visits() const { return visits.sum(); }

Action select_action(const QTable& qt, const State& state, double epsilon, Rng& rng) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw std::invalid_argument("select_action: epsilon must lie in [0, 1]");
  }
  if (rng.uniform() < epsilon) {
    if (state.b <= 0) return Action::Idle;
    return rng.below(2) == 0 ? Action::Idle : Action::Transmit;
  }
  return qt.greedy_action(state);
}

double td_error(const QTable& qt, const State& s, Action a, double cost, const State& s_next) {
  if (!is_feasible(s, a)) throw InfeasibleAction("td_error: infeasible action");
  return cost - qt.lambda_hat + qt.min_q(s_next) - qt.q(qt.index(s), to_int(a));
}

void q_update(QTable& qt, const State& s, Action a, double delta, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::invalid_argument("q_update: alpha outside (0, 1]");
  if (!is_feasible(s, a)) throw InfeasibleAction("q_update: infeasible action");
  const auto i = qt.index(s);
  qt.q(i, to_int(a)) += alpha * delta;
  ++qt.visits(i, to_int(a));
}

void avg_cost_update(QTable& qt, double delta, double gamma, bool at_ref, LambdaUpdate mode) {
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw std::invalid_argument("avg_cost_update: gamma outside (0, 1]");
  }
  if (mode == LambdaUpdate::RefGated && !at_ref) return;
  qt.lambda_hat += gamma * delta;
}

Policy extract_policy(const QTable& qt) {
  Policy policy(qt.num_states());
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(qt.num_states()); ++i) {
    policy[static_cast<std::size_t>(i)] = qt.greedy_action(qt.state(i));
  }
  return policy;
}

QLearningReport run_q_learning(const SystemParams& true_params, const QLearningConfig& config) {
  true_params.validate();
  config.alpha.validate();
  config.gamma.validate();
  config.exploration.validate();
  if (config.horizon < 1) throw std::invalid_argument("qlearn: horizon must be >= 1");

  QLearningReport report;
  report.table = QTable(true_params.delta_max, true_params.B, config.ref_state);
  QTable& qt = report.table;
  const auto n = static_cast<std::uint64_t>(qt.num_states());

  Environment env(true_params, config.seed, 0);
  Rng rng(config.seed, 1);

  Policy last_policy;
  double last_exact = std::nan("");
  std::uint64_t step = 0;
  for (std::size_t k = 0; k < config.episodes; ++k) {
    const double eps = config.exploration.epsilon(k);
    State s = qt.state(static_cast<Eigen::Index>(rng.below(n)));
    double total_cost = 0.0;
    for (std::size_t t = 0; t < config.horizon; ++t, ++step) {
      const Action a = select_action(qt, s, eps, rng);
      const StepOutcome out = env.step(s, a);
      const double delta = td_error(qt, s, a, out.cost, out.next_state);
      const std::uint64_t visits = qt.visits(qt.index(s), to_int(a)) + 1;
      q_update(qt, s, a, delta, config.alpha.rate(visits, step));
      avg_cost_update(qt, delta, config.gamma.rate(visits, step), s == qt.ref_state,
                      config.lambda_update);
      total_cost += out.cost;
      if (config.on_step) config.on_step(qt, out);
      s = out.next_state;
    }

    LearningRecord rec;
    rec.episode = k + 1;
    rec.epsilon = eps;
    rec.lambda_hat = qt.lambda_hat;
    rec.behaviour_avg_vaoi = total_cost / static_cast<double>(config.horizon);
    rec.exact_avg_vaoi = std::nan("");
    rec.mc_avg_vaoi = std::nan("");
    if (config.exact_evaluation || config.evaluation.runs >= 2) {
      Policy policy = extract_policy(qt);
      if (config.exact_evaluation) {
        if (!(policy == last_policy)) {
          last_exact = exact_average_vaoi(true_params, policy);
          last_policy = policy;
        }
        rec.exact_avg_vaoi = last_exact;
      }
      if (config.evaluation.runs >= 2) {
        MonteCarloOptions mc = config.evaluation;
        mc.seed = substream_seed(config.seed, 1000 + k);
        rec.mc_avg_vaoi = monte_carlo_eval(true_params, policy, mc).mean_vaoi;
      }
    }
    report.curve.push_back(rec);
  }
  report.steps = step;
  report.policy = extract_policy(qt);
  return report;
}

}  // namespace vaoi
