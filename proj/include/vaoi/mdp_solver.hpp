#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vaoi/core_model.hpp"
#include "vaoi/policy.hpp"

namespace vaoi {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Relative values indexed by canonical state order.
template <typename Scalar = double>
using ValueFunction = Vector<Scalar>;

/// Dense per-action kernel and expected one-step cost over the full grid.
///
/// Row i of transition[a] is P(. | state i, a). Rows of transition[Transmit]
/// at b = 0 are left zero and masked out through `can_transmit`.
template <typename Scalar = double>
struct MdpModel {
  SystemParams params;
  std::array<Matrix<Scalar>, 2> transition;
  std::array<Vector<Scalar>, 2> cost;
  std::vector<bool> can_transmit;

  std::size_t num_states() const { return can_transmit.size(); }
};

template <typename Scalar = double>
MdpModel<Scalar> build_model(const SystemParams& params) {
  params.validate();
  const auto n = static_cast<Eigen::Index>(params.num_states());
  MdpModel<Scalar> model;
  model.params = params;
  model.can_transmit.assign(static_cast<std::size_t>(n), false);
  for (int a = 0; a < 2; ++a) {
    model.transition[a] = Matrix<Scalar>::Zero(n, n);
    model.cost[a] = Vector<Scalar>::Zero(n);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const State s = state_at(params, static_cast<std::size_t>(i));
    model.can_transmit[static_cast<std::size_t>(i)] = s.b >= 1;
    for (Action a : feasible_actions(s)) {
      const int ai = to_int(a);
      for (const auto& succ : transition_dist(params, s, a).entries) {
        const auto j = static_cast<Eigen::Index>(state_index(params, succ.state));
        model.transition[ai](i, j) += static_cast<Scalar>(succ.probability);
        model.cost[ai](i) += static_cast<Scalar>(succ.probability * succ.state.delta);
      }
    }
  }
  return model;
}

template <typename Scalar = double>
struct BackupResult {
  ValueFunction<Scalar> values;
  Policy policy;
  /// Q(s, a) per state; the Transmit column holds +inf where infeasible.
  Matrix<Scalar> q;
};

/// One Bellman backup T(v): Q(s,a) = C(s,a) + sum_s' P(s'|s,a) v(s').
/// Ties go to Idle.
template <typename Scalar>
BackupResult<Scalar> bellman_backup(const MdpModel<Scalar>& model, const ValueFunction<Scalar>& v) {
  const auto n = static_cast<Eigen::Index>(model.num_states());
  if (v.size() != n) throw std::invalid_argument("bellman_backup: value size mismatch");
  if (!v.allFinite()) throw std::invalid_argument("bellman_backup: non-finite value function");

  BackupResult<Scalar> out;
  out.q.resize(n, 2);
  out.q.col(0).noalias() = model.cost[0] + model.transition[0] * v;
  out.q.col(1).noalias() = model.cost[1] + model.transition[1] * v;
  out.values.resize(n);
  out.policy = Policy(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!model.can_transmit[static_cast<std::size_t>(i)]) {
      out.q(i, 1) = std::numeric_limits<Scalar>::infinity();
    }
    if (out.q(i, 1) < out.q(i, 0)) {
      out.values(i) = out.q(i, 1);
      out.policy[static_cast<std::size_t>(i)] = Action::Transmit;
    } else {
      out.values(i) = out.q(i, 0);
    }
  }
  return out;
}

template <typename Scalar = double>
BackupResult<Scalar> bellman_backup(const SystemParams& params, const ValueFunction<Scalar>& v) {
  return bellman_backup(build_model<Scalar>(params), v);
}

struct RviaOptions {
  double tol = 1e-9;
  std::size_t max_iter = 100000;
  State ref_state{0, 0};
};

template <typename Scalar = double>
struct SolveResult {
  Policy policy;
  Scalar avg_cost{};  ///< optimal long-run average VAoI
  ValueFunction<Scalar> value;
  std::size_t iterations = 0;
  Scalar span_residual{};
};

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, std::size_t iterations, double span_residual)
      : std::runtime_error(what), iterations_(iterations), span_residual_(span_residual) {}
  std::size_t iterations() const { return iterations_; }
  double span_residual() const { return span_residual_; }

 private:
  std::size_t iterations_;
  double span_residual_;
};

template <typename Derived>
typename Derived::Scalar span(const Eigen::MatrixBase<Derived>& v) {
  return v.maxCoeff() - v.minCoeff();
}

/// Relative value iteration: h <- T(h) - T(h)(ref) until span(h_{k+1} - h_k) < tol.
///
/// The average cost is the offset subtracted at the reference state on the
/// last iteration. `initial` warm-starts the relative values.
template <typename Scalar>
SolveResult<Scalar> rvia_solve(const MdpModel<Scalar>& model, const RviaOptions& options = {},
                               const std::optional<ValueFunction<Scalar>>& initial = std::nullopt) {
  if (!(options.tol > 0.0)) throw std::invalid_argument("rvia_solve: tol must be positive");
  if (!is_valid(model.params, options.ref_state)) {
    throw std::invalid_argument("rvia_solve: reference state outside the grid");
  }
  const auto n = static_cast<Eigen::Index>(model.num_states());
  const auto ref = static_cast<Eigen::Index>(state_index(model.params, options.ref_state));
  const auto tol = static_cast<Scalar>(options.tol);

  ValueFunction<Scalar> h = initial ? *initial : ValueFunction<Scalar>::Zero(n);
  if (h.size() != n) throw std::invalid_argument("rvia_solve: warm start size mismatch");

  Scalar residual = std::numeric_limits<Scalar>::infinity();
  for (std::size_t k = 1; k <= options.max_iter; ++k) {
    auto backup = bellman_backup(model, h);
    const Scalar offset = backup.values(ref);
    ValueFunction<Scalar> next = backup.values.array() - offset;
    residual = span(next - h);
    h = std::move(next);
    if (residual < tol) {
      return SolveResult<Scalar>{std::move(backup.policy), offset, std::move(h), k, residual};
    }
  }
  throw ConvergenceError("rvia_solve: no convergence after " + std::to_string(options.max_iter) +
                             " iterations (span residual " +
                             std::to_string(static_cast<double>(residual)) + ")",
                         options.max_iter, static_cast<double>(residual));
}

template <typename Scalar = double>
SolveResult<Scalar> rvia_solve(const SystemParams& params, const RviaOptions& options = {}) {
  return rvia_solve(build_model<Scalar>(params), options);
}

/// Per-battery-level transmit threshold of a policy.
struct ThresholdProfile {
  /// Smallest Δ with Transmit at each b, or nullopt when the policy never transmits.
  std::vector<std::optional<int>> threshold;
  /// Whether the transmit set at each b is an up-set in Δ.
  std::vector<bool> is_threshold;

  bool holds() const {
    for (bool ok : is_threshold) {
      if (!ok) return false;
    }
    return true;
  }
  std::size_t violations() const {
    std::size_t count = 0;
    for (bool ok : is_threshold) count += ok ? 0 : 1;
    return count;
  }
};

inline ThresholdProfile threshold_profile(const Policy& policy, const SystemParams& params) {
  if (policy.size() != params.num_states()) {
    throw std::invalid_argument("threshold_profile: policy does not cover the grid");
  }
  ThresholdProfile profile;
  for (int b = 0; b <= params.B; ++b) {
    std::optional<int> first;
    bool upset = true;
    for (int d = 0; d <= params.delta_max; ++d) {
      const bool tx = policy.at(params, {d, b}) == Action::Transmit;
      if (tx && !first) first = d;
      if (!tx && first) upset = false;
    }
    profile.threshold.push_back(first);
    profile.is_threshold.push_back(upset);
  }
  return profile;
}

/// Long-run behaviour of the chain induced by a fixed policy.
template <typename Scalar = double>
struct ChainEvaluation {
  Scalar average_cost{};
  /// Limiting state distribution from the canonical start state (0, 0).
  Vector<Scalar> stationary;
  std::size_t recurrent_classes = 0;
  std::size_t recurrent_states = 0;
  /// True when the recurrent states do not cover the whole grid.
  bool reducible = false;
};

namespace detail {

// Strongly connected components of the sparsity graph restricted to `active`.
// Iterative Tarjan; components come out in reverse topological order.
inline std::vector<std::vector<std::size_t>> strongly_connected(
    const std::vector<std::vector<std::size_t>>& adj, const std::vector<bool>& active) {
  const std::size_t n = adj.size();
  constexpr std::size_t unvisited = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> index(n, unvisited), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::vector<std::vector<std::size_t>> components;
  std::size_t counter = 0;

  struct Frame {
    std::size_t node;
    std::size_t edge;
  };
  for (std::size_t root = 0; root < n; ++root) {
    if (!active[root] || index[root] != unvisited) continue;
    std::vector<Frame> call{{root, 0}};
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!call.empty()) {
      auto& frame = call.back();
      const std::size_t v = frame.node;
      if (frame.edge < adj[v].size()) {
        const std::size_t w = adj[v][frame.edge++];
        if (!active[w]) continue;
        if (index[w] == unvisited) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      if (low[v] == index[v]) {
        std::vector<std::size_t> comp;
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp.push_back(w);
        } while (w != v);
        components.push_back(std::move(comp));
      }
      call.pop_back();
      if (!call.empty()) {
        const std::size_t parent = call.back().node;
        low[parent] = std::min(low[parent], low[v]);
      }
    }
  }
  return components;
}

}  // namespace detail

/// Policy-induced transition matrix and per-state expected cost.
template <typename Scalar>
std::pair<Matrix<Scalar>, Vector<Scalar>> policy_chain(const MdpModel<Scalar>& model,
                                                       const Policy& policy) {
  if (!policy.is_feasible(model.params)) {
    throw InfeasibleAction("policy is not feasible on the state grid");
  }
  const auto n = static_cast<Eigen::Index>(model.num_states());
  Matrix<Scalar> p(n, n);
  Vector<Scalar> c(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int a = to_int(policy[static_cast<std::size_t>(i)]);
    p.row(i) = model.transition[a].row(i);
    c(i) = model.cost[a](i);
  }
  return {std::move(p), std::move(c)};
}

/// Exact long-run average VAoI of a policy started from (0, 0).
///
/// Each closed class reachable from the start state gets its stationary
/// distribution from a direct linear solve; when several are reachable they
/// are weighted by their absorption probabilities.
template <typename Scalar>
ChainEvaluation<Scalar> exact_policy_evaluation(const MdpModel<Scalar>& model, const Policy& policy) {
  const auto [p, c] = policy_chain(model, policy);
  const auto n = static_cast<std::size_t>(p.rows());
  const std::size_t start = 0;

  std::vector<std::vector<std::size_t>> adj(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (p(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) > Scalar(0)) {
        adj[i].push_back(j);
      }
    }
  }

  std::vector<bool> reachable(n, false);
  std::vector<std::size_t> frontier{start};
  reachable[start] = true;
  while (!frontier.empty()) {
    const auto v = frontier.back();
    frontier.pop_back();
    for (auto w : adj[v]) {
      if (!reachable[w]) {
        reachable[w] = true;
        frontier.push_back(w);
      }
    }
  }

  const auto components = detail::strongly_connected(adj, reachable);
  std::vector<int> class_of(n, -1);
  std::vector<std::vector<std::size_t>> closed;
  for (const auto& comp : components) {
    std::vector<bool> in_comp(n, false);
    for (auto v : comp) in_comp[v] = true;
    bool is_closed = true;
    for (auto v : comp) {
      for (auto w : adj[v]) {
        if (!in_comp[w]) {
          is_closed = false;
          break;
        }
      }
      if (!is_closed) break;
    }
    if (is_closed) {
      for (auto v : comp) class_of[v] = static_cast<int>(closed.size());
      closed.push_back(comp);
    }
  }

  // Absorption probabilities from the start state into each closed class.
  std::vector<Scalar> weight(closed.size(), Scalar(0));
  if (class_of[start] >= 0) {
    weight[static_cast<std::size_t>(class_of[start])] = Scalar(1);
  } else {
    std::vector<std::size_t> transient;
    std::vector<Eigen::Index> local(n, -1);
    for (std::size_t v = 0; v < n; ++v) {
      if (reachable[v] && class_of[v] < 0) {
        local[v] = static_cast<Eigen::Index>(transient.size());
        transient.push_back(v);
      }
    }
    const auto m = static_cast<Eigen::Index>(transient.size());
    const auto k = static_cast<Eigen::Index>(closed.size());
    Matrix<Scalar> a = Matrix<Scalar>::Identity(m, m);
    Matrix<Scalar> rhs = Matrix<Scalar>::Zero(m, k);
    for (Eigen::Index r = 0; r < m; ++r) {
      const auto v = transient[static_cast<std::size_t>(r)];
      for (auto w : adj[v]) {
        const Scalar pw = p(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(w));
        if (local[w] >= 0) {
          a(r, local[w]) -= pw;
        } else {
          rhs(r, class_of[w]) += pw;
        }
      }
    }
    const Matrix<Scalar> absorb = a.partialPivLu().solve(rhs);
    for (Eigen::Index j = 0; j < k; ++j) {
      weight[static_cast<std::size_t>(j)] = absorb(local[start], j);
    }
  }

  ChainEvaluation<Scalar> out;
  out.stationary = Vector<Scalar>::Zero(static_cast<Eigen::Index>(n));
  out.recurrent_classes = closed.size();
  for (std::size_t ci = 0; ci < closed.size(); ++ci) {
    auto members = closed[ci];
    std::sort(members.begin(), members.end());
    out.recurrent_states += members.size();
    const auto m = static_cast<Eigen::Index>(members.size());
    // mu (P_C - I) = 0 with the last balance equation replaced by sum(mu) = 1.
    Matrix<Scalar> a(m, m);
    for (Eigen::Index r = 0; r < m; ++r) {
      for (Eigen::Index col = 0; col < m; ++col) {
        a(r, col) = p(static_cast<Eigen::Index>(members[static_cast<std::size_t>(col)]),
                      static_cast<Eigen::Index>(members[static_cast<std::size_t>(r)]));
      }
      a(r, r) -= Scalar(1);
    }
    a.row(m - 1).setOnes();
    Vector<Scalar> rhs = Vector<Scalar>::Zero(m);
    rhs(m - 1) = Scalar(1);
    const Vector<Scalar> mu = a.partialPivLu().solve(rhs);
    for (Eigen::Index r = 0; r < m; ++r) {
      const auto v = static_cast<Eigen::Index>(members[static_cast<std::size_t>(r)]);
      out.stationary(v) += weight[ci] * mu(r);
    }
  }
  out.average_cost = out.stationary.dot(c);
  out.reducible = out.recurrent_states != n;
  return out;
}

template <typename Scalar = double>
ChainEvaluation<Scalar> exact_policy_evaluation(const SystemParams& params, const Policy& policy) {
  return exact_policy_evaluation(build_model<Scalar>(params), policy);
}

/// Shorthand for the exact long-run average VAoI of `policy`.
inline double exact_average_vaoi(const SystemParams& params, const Policy& policy) {
  return exact_policy_evaluation<double>(params, policy).average_cost;
}

}  // namespace vaoi
