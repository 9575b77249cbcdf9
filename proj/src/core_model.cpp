#include "vaoi/core_model.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace vaoi {

namespace {

void require_probability(double p, const char* field) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument(std::string(field) + " must lie in [0, 1], got " +
                                std::to_string(p));
  }
}

double bernoulli_weight(double p, int outcome) { return outcome ? p : 1.0 - p; }

}  // namespace

void SystemParams::validate() const {
  require_probability(p_g, "p_g");
  require_probability(p_s, "p_s");
  require_probability(beta, "beta");
  if (B < 1) throw std::invalid_argument("B must be >= 1, got " + std::to_string(B));
  if (delta_max < 1) {
    throw std::invalid_argument("delta_max must be >= 1, got " + std::to_string(delta_max));
  }
}

double TransitionDist::total_probability() const {
  double sum = 0.0;
  for (const auto& e : entries) sum += e.probability;
  return sum;
}

double TransitionDist::probability_of(const State& s) const {
  for (const auto& e : entries) {
    if (e.state == s) return e.probability;
  }
  return 0.0;
}

bool is_valid(const SystemParams& params, const State& s) {
  return s.delta >= 0 && s.delta <= params.delta_max && s.b >= 0 && s.b <= params.B;
}

std::vector<Action> feasible_actions(const State& state) {
  if (state.b <= 0) return {Action::Idle};
  return {Action::Idle, Action::Transmit};
}

int battery_step(int b, int e, Action a, int capacity) {
  if (a == Action::Transmit && b < 1) {
    throw InfeasibleAction("transmit requested with empty battery");
  }
  if (b < 0 || b > capacity || (e != 0 && e != 1)) {
    throw std::out_of_range("battery_step: input out of range");
  }
  return std::min(b + e - to_int(a), capacity);
}

int vaoi_step(int delta, int g, Action a, int h, int delta_max) {
  if (delta < 0 || delta > delta_max || (g != 0 && g != 1) || (h != 0 && h != 1)) {
    throw std::out_of_range("vaoi_step: input out of range");
  }
  if (to_int(a) * h == 1) return std::min(g, delta_max);
  return std::min(delta + g, delta_max);
}

TransitionDist transition_dist(const SystemParams& params, const State& state, Action action) {
  if (!is_valid(params, state)) throw std::out_of_range("transition_dist: invalid state");
  if (!is_feasible(state, action)) {
    throw InfeasibleAction("transmit is infeasible at " + to_string(state));
  }

  TransitionDist dist;
  dist.entries.reserve(8);
  for (int g = 0; g <= 1; ++g) {
    for (int h = 0; h <= 1; ++h) {
      for (int e = 0; e <= 1; ++e) {
        const double p = bernoulli_weight(params.p_g, g) * bernoulli_weight(params.p_s, h) *
                         bernoulli_weight(params.beta, e);
        const State next{vaoi_step(state.delta, g, action, h, params.delta_max),
                         battery_step(state.b, e, action, params.B)};
        auto it = std::find_if(dist.entries.begin(), dist.entries.end(),
                               [&](const Successor& s) { return s.state == next; });
        if (it == dist.entries.end()) {
          dist.entries.push_back({next, p});
        } else {
          it->probability += p;
        }
      }
    }
  }
  return dist;
}

double expected_cost(const SystemParams& params, const State& state, Action action) {
  const auto dist = transition_dist(params, state, action);
  double cost = 0.0;
  for (const auto& e : dist.entries) cost += e.probability * e.state.delta;
  return cost;
}

std::vector<State> enumerate_states(const SystemParams& params) {
  std::vector<State> states;
  states.reserve(params.num_states());
  for (int d = 0; d <= params.delta_max; ++d) {
    for (int b = 0; b <= params.B; ++b) states.push_back({d, b});
  }
  return states;
}

std::string to_string(const State& s) {
  return "(" + std::to_string(s.delta) + ", " + std::to_string(s.b) + ")";
}

std::string to_string(Action a) { return a == Action::Idle ? "idle" : "transmit"; }

}  // namespace vaoi
