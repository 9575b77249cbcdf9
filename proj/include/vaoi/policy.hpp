#pragma once

#include <cstddef>
#include <vector>

#include "vaoi/core_model.hpp"

namespace vaoi {

/// Deterministic stationary policy stored in canonical state order.
struct Policy {
  std::vector<Action> actions;

  Policy() = default;
  explicit Policy(std::size_t n, Action fill = Action::Idle) : actions(n, fill) {}

  std::size_t size() const { return actions.size(); }
  Action operator[](std::size_t i) const { return actions[i]; }
  Action& operator[](std::size_t i) { return actions[i]; }

  Action at(const SystemParams& params, const State& s) const {
    return actions.at(state_index(params, s));
  }

  /// True when the table covers the grid and stores Idle at every b = 0.
  bool is_feasible(const SystemParams& params) const {
    if (actions.size() != params.num_states()) return false;
    for (std::size_t i = 0; i < actions.size(); ++i) {
      if (!vaoi::is_feasible(state_at(params, i), actions[i])) return false;
    }
    return true;
  }

  friend bool operator==(const Policy&, const Policy&) = default;
};

/// Transmit whenever there is energy.
inline Policy greedy_policy(const SystemParams& params) {
  Policy p(params.num_states());
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = state_at(params, i).b >= 1 ? Action::Transmit : Action::Idle;
  }
  return p;
}

inline Policy all_idle_policy(const SystemParams& params) { return Policy(params.num_states()); }

}  // namespace vaoi
