#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace vaoi {

/// Parameters of the sensor/channel/harvester system.
struct SystemParams {
  double p_g = 0.3;   ///< per-slot probability a new version is generated
  double p_s = 0.8;   ///< per-slot probability a transmission is delivered
  double beta = 0.1;  ///< per-slot probability one energy unit is harvested
  int B = 10;         ///< battery capacity in energy units
  int delta_max = 10; ///< VAoI truncation ceiling

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;

  std::size_t num_states() const {
    return static_cast<std::size_t>(delta_max + 1) * static_cast<std::size_t>(B + 1);
  }

  friend bool operator==(const SystemParams&, const SystemParams&) = default;
};

struct State {
  int delta = 0;
  int b = 0;

  friend bool operator==(const State&, const State&) = default;
};

enum class Action : int { Idle = 0, Transmit = 1 };

inline constexpr int to_int(Action a) { return static_cast<int>(a); }

/// Raised when Transmit is requested with an empty battery.
class InfeasibleAction : public std::domain_error {
 public:
  explicit InfeasibleAction(const std::string& what) : std::domain_error(what) {}
};

struct Successor {
  State state;
  double probability = 0.0;
};

/// Successor states of one (state, action) pair with merged duplicates.
struct TransitionDist {
  std::vector<Successor> entries;

  double total_probability() const;
  /// Probability mass placed on `s` (0 if absent).
  double probability_of(const State& s) const;
};

bool is_valid(const SystemParams& params, const State& s);

/// {Idle} when the battery is empty, {Idle, Transmit} otherwise.
std::vector<Action> feasible_actions(const State& state);

inline bool is_feasible(const State& state, Action a) {
  return a == Action::Idle || state.b >= 1;
}

/// b' = min(b + e - a, B).
int battery_step(int b, int e, Action a, int capacity);

/// A delivered update resets the age to g, otherwise it grows by g.
/// Both branches are truncated at delta_max.
int vaoi_step(int delta, int g, Action a, int h, int delta_max);

TransitionDist transition_dist(const SystemParams& params, const State& state, Action action);

/// E[Δ' | s, a]; the per-transition cost is the VAoI after the action.
double expected_cost(const SystemParams& params, const State& state, Action action);

/// Canonical ordering: Δ major, b minor.
std::vector<State> enumerate_states(const SystemParams& params);

inline std::size_t state_index(const SystemParams& params, const State& s) {
  return static_cast<std::size_t>(s.delta) * static_cast<std::size_t>(params.B + 1) +
         static_cast<std::size_t>(s.b);
}

inline State state_at(const SystemParams& params, std::size_t index) {
  const auto width = static_cast<std::size_t>(params.B + 1);
  return State{static_cast<int>(index / width), static_cast<int>(index % width)};
}

std::string to_string(const State& s);
std::string to_string(Action a);

}  // namespace vaoi
