#include "vaoi/experiment.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <set>

namespace vaoi {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Strict reader over one JSON object: every key must be consumed.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(name(""), "expected an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  template <typename T>
  void read(const std::string& key, T& out) {
    if (!has(key)) return;
    const json& v = j_.at(key);
    try {
      if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw ConfigError(name(key), "expected a string");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) throw ConfigError(name(key), "expected an integer");
        if (std::is_unsigned_v<T> && v.is_number_integer() && !v.is_number_unsigned() &&
            v.get<long long>() < 0) {
          throw ConfigError(name(key), "expected a non-negative integer");
        }
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) throw ConfigError(name(key), "expected a number");
      }
      out = v.get<T>();
    } catch (const nlohmann::json::exception& ex) {
      throw ConfigError(name(key), ex.what());
    }
  }

  const json& child(const std::string& key) { return j_.at(key); }

  std::string name(const std::string& key) const {
    if (key.empty()) return path_.empty() ? "<root>" : path_;
    return path_.empty() ? key : path_ + "." + key;
  }

  void finish() const {
    for (const auto& [key, _] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError(name(key), "unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

State read_state(const json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer()) {
    throw ConfigError(field, "expected [delta, b]");
  }
  return {j[0].get<int>(), j[1].get<int>()};
}

LearningSchedule read_learning_schedule(const json& j, const std::string& path,
                                        LearningSchedule fallback) {
  ObjectReader r(j, path);
  std::string kind = fallback.kind == LearningSchedule::Kind::Harmonic ? "harmonic" : "visit-power";
  r.read("schedule", kind);
  LearningSchedule out = fallback;
  if (kind == "harmonic") {
    out = LearningSchedule::harmonic();
  } else if (kind == "visit-power") {
    out.kind = LearningSchedule::Kind::VisitPower;
  } else {
    throw ConfigError(r.name("schedule"), "expected 'harmonic' or 'visit-power'");
  }
  r.read("omega", out.omega);
  r.finish();
  return out;
}

json to_json(const LearningSchedule& s) {
  if (s.kind == LearningSchedule::Kind::Harmonic) return json{{"schedule", "harmonic"}};
  return json{{"schedule", "visit-power"}, {"omega", s.omega}};
}

std::string exploration_name(ExplorationSchedule::Kind k) {
  switch (k) {
    case ExplorationSchedule::Kind::Polynomial:
      return "polynomial";
    case ExplorationSchedule::Kind::Exponential:
      return "exponential";
    case ExplorationSchedule::Kind::InverseSqrt:
      return "inverse-sqrt";
  }
  return "";
}

Evaluator parse_evaluator(const std::string& text, const std::string& field) {
  if (text == "exact") return Evaluator::Exact;
  if (text == "monte-carlo") return Evaluator::MonteCarlo;
  throw ConfigError(field, "expected 'exact' or 'monte-carlo', got '" + text + "'");
}

std::filesystem::path prepare_output(const ExperimentConfig& config) {
  std::filesystem::path dir(config.output_dir);
  std::filesystem::create_directories(dir);
  return dir;
}

void write_json(const std::filesystem::path& path, const json& j) {
  write_text(path, j.dump(2) + "\n");
}

MonteCarloOptions full_evaluation(const ExperimentConfig& config) {
  return MonteCarloOptions{.runs = config.evaluation.runs,
                           .horizon = config.evaluation.horizon,
                           .seed = substream_seed(config.seed, 7),
                           .burn_in = config.evaluation.burn_in,
                           .threads = config.threads};
}

MonteCarloOptions episode_evaluation(const ExperimentConfig& config) {
  return MonteCarloOptions{.runs = config.evaluation.episode_runs,
                           .horizon = config.evaluation.episode_horizon,
                           .seed = config.seed,
                           .burn_in = config.evaluation.burn_in,
                           .threads = config.threads};
}

EstimationConfig estimation_config(const ExperimentConfig& config) {
  EstimationConfig out;
  out.episodes = config.estimation.episodes;
  out.horizon = config.estimation.horizon;
  out.mode = config.estimation.mode;
  out.seed = config.seed;
  out.solver = config.solver;
  out.evaluation = episode_evaluation(config);
  return out;
}

QLearningConfig qlearning_config(const ExperimentConfig& config) {
  QLearningConfig out;
  out.episodes = config.learning.episodes;
  out.horizon = config.learning.horizon;
  out.alpha = config.learning.alpha;
  out.gamma = config.learning.gamma;
  out.exploration = config.learning.exploration;
  out.lambda_update = config.learning.lambda_update;
  out.ref_state = config.learning.ref_state;
  out.seed = config.seed;
  out.evaluation = episode_evaluation(config);
  return out;
}

json nan_to_null(double x) { return std::isnan(x) ? json(nullptr) : json(x); }

}  // namespace

void ExperimentConfig::validate() const {
  auto probability = [](double p, const char* field) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(field, "must lie in [0, 1]");
  };
  probability(system.p_g, "p_g");
  probability(system.p_s, "p_s");
  probability(system.beta, "beta");
  if (system.B < 1) throw ConfigError("B", "must be >= 1");
  if (system.delta_max < 1) throw ConfigError("delta_max", "must be >= 1");

  if (!(solver.tol > 0.0)) throw ConfigError("solver.tol", "must be positive");
  if (solver.max_iter < 1) throw ConfigError("solver.max_iter", "must be >= 1");
  if (!is_valid(system, solver.ref_state)) {
    throw ConfigError("solver.ref_state", "outside the state grid");
  }

  if (learning.horizon < 1) throw ConfigError("learning.horizon", "must be >= 1");
  try {
    learning.alpha.validate();
  } catch (const std::invalid_argument& ex) {
    throw ConfigError("learning.alpha.omega", ex.what());
  }
  try {
    learning.gamma.validate();
  } catch (const std::invalid_argument& ex) {
    throw ConfigError("learning.gamma.omega", ex.what());
  }
  try {
    learning.exploration.validate();
  } catch (const std::invalid_argument& ex) {
    throw ConfigError("learning.exploration", ex.what());
  }
  if (!is_valid(system, learning.ref_state)) {
    throw ConfigError("learning.ref_state", "outside the state grid");
  }

  if (estimation.horizon < 1) throw ConfigError("estimation.horizon", "must be >= 1");
  if (evaluation.runs == 1) throw ConfigError("evaluation.runs", "must be 0 or >= 2");
  if (evaluation.runs >= 2 && evaluation.horizon < 1) {
    throw ConfigError("evaluation.horizon", "must be >= 1");
  }
  if (evaluation.episode_runs == 1) {
    throw ConfigError("evaluation.episode_runs", "must be 0 or >= 2");
  }
  if (evaluation.episode_runs >= 2 && evaluation.episode_horizon < 1) {
    throw ConfigError("evaluation.episode_horizon", "must be >= 1");
  }

  if (sweep.betas.empty()) throw ConfigError("sweep.betas", "must not be empty");
  for (double b : sweep.betas) probability(b, "sweep.betas");
  if (sweep.capacities.empty()) throw ConfigError("sweep.capacities", "must not be empty");
  for (int b : sweep.capacities) {
    if (b < 1) throw ConfigError("sweep.capacities", "entries must be >= 1");
  }
  if (sweep.delta_maxes.empty()) throw ConfigError("sweep.delta_maxes", "must not be empty");
  for (int d : sweep.delta_maxes) {
    if (d < 1) throw ConfigError("sweep.delta_maxes", "entries must be >= 1");
  }
  if (sweep.evaluators.empty()) throw ConfigError("sweep.evaluators", "must not be empty");
  for (Evaluator e : sweep.evaluators) {
    if (e == Evaluator::MonteCarlo && evaluation.runs < 2) {
      throw ConfigError("sweep.evaluators", "monte-carlo needs evaluation.runs >= 2");
    }
  }
  if (output_dir.empty()) throw ConfigError("output_dir", "must not be empty");
}

ExperimentConfig parse_config(const json& j) {
  ExperimentConfig c;
  ObjectReader root(j, "");
  root.read("p_g", c.system.p_g);
  root.read("p_s", c.system.p_s);
  root.read("beta", c.system.beta);
  root.read("B", c.system.B);
  root.read("delta_max", c.system.delta_max);
  root.read("seed", c.seed);
  root.read("output_dir", c.output_dir);
  root.read("threads", c.threads);

  if (root.has("solver")) {
    ObjectReader r(root.child("solver"), "solver");
    r.read("tol", c.solver.tol);
    r.read("max_iter", c.solver.max_iter);
    if (r.has("ref_state")) c.solver.ref_state = read_state(r.child("ref_state"), "solver.ref_state");
    r.finish();
  }

  if (root.has("learning")) {
    ObjectReader r(root.child("learning"), "learning");
    r.read("episodes", c.learning.episodes);
    r.read("horizon", c.learning.horizon);
    if (r.has("alpha")) {
      c.learning.alpha = read_learning_schedule(r.child("alpha"), "learning.alpha", c.learning.alpha);
    }
    if (r.has("gamma")) {
      c.learning.gamma = read_learning_schedule(r.child("gamma"), "learning.gamma", c.learning.gamma);
    }
    if (r.has("exploration")) {
      ObjectReader e(r.child("exploration"), "learning.exploration");
      std::string kind = exploration_name(c.learning.exploration.kind);
      e.read("schedule", kind);
      if (kind == "polynomial") {
        c.learning.exploration.kind = ExplorationSchedule::Kind::Polynomial;
      } else if (kind == "exponential") {
        c.learning.exploration.kind = ExplorationSchedule::Kind::Exponential;
      } else if (kind == "inverse-sqrt") {
        c.learning.exploration.kind = ExplorationSchedule::Kind::InverseSqrt;
      } else {
        throw ConfigError("learning.exploration.schedule",
                          "expected 'polynomial', 'exponential' or 'inverse-sqrt'");
      }
      e.read("epsilon0", c.learning.exploration.epsilon0);
      e.read("mu", c.learning.exploration.mu);
      e.read("floor", c.learning.exploration.floor);
      e.finish();
    }
    if (r.has("lambda_update")) {
      std::string mode;
      r.read("lambda_update", mode);
      try {
        c.learning.lambda_update = parse_lambda_update(mode);
      } catch (const std::invalid_argument& ex) {
        throw ConfigError("learning.lambda_update", ex.what());
      }
    }
    if (r.has("ref_state")) {
      c.learning.ref_state = read_state(r.child("ref_state"), "learning.ref_state");
    }
    r.finish();
  }

  if (root.has("estimation")) {
    ObjectReader r(root.child("estimation"), "estimation");
    r.read("episodes", c.estimation.episodes);
    r.read("horizon", c.estimation.horizon);
    if (r.has("mode")) {
      std::string mode;
      r.read("mode", mode);
      try {
        c.estimation.mode = parse_estimator_mode(mode);
      } catch (const std::invalid_argument& ex) {
        throw ConfigError("estimation.mode", ex.what());
      }
    }
    r.finish();
  }

  if (root.has("evaluation")) {
    ObjectReader r(root.child("evaluation"), "evaluation");
    r.read("runs", c.evaluation.runs);
    r.read("horizon", c.evaluation.horizon);
    r.read("episode_runs", c.evaluation.episode_runs);
    r.read("episode_horizon", c.evaluation.episode_horizon);
    r.read("burn_in", c.evaluation.burn_in);
    r.finish();
  }

  if (root.has("sweep")) {
    ObjectReader r(root.child("sweep"), "sweep");
    r.read("betas", c.sweep.betas);
    r.read("capacities", c.sweep.capacities);
    r.read("delta_maxes", c.sweep.delta_maxes);
    if (r.has("evaluators")) {
      std::vector<std::string> names;
      r.read("evaluators", names);
      c.sweep.evaluators.clear();
      for (const auto& n : names) c.sweep.evaluators.push_back(parse_evaluator(n, "sweep.evaluators"));
    }
    r.finish();
  }

  root.finish();
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const nlohmann::json::parse_error& ex) {
    throw ConfigError("--config", std::string("malformed JSON: ") + ex.what());
  }
  return parse_config(j);
}

json to_json(const ExperimentConfig& c) {
  json evaluators = json::array();
  for (Evaluator e : c.sweep.evaluators) evaluators.push_back(to_string(e));
  return json{
      {"p_g", c.system.p_g},
      {"p_s", c.system.p_s},
      {"beta", c.system.beta},
      {"B", c.system.B},
      {"delta_max", c.system.delta_max},
      {"seed", c.seed},
      {"output_dir", c.output_dir},
      {"threads", c.threads},
      {"solver",
       {{"tol", c.solver.tol}, {"max_iter", c.solver.max_iter}, {"ref_state", to_json(c.solver.ref_state)}}},
      {"learning",
       {{"episodes", c.learning.episodes},
        {"horizon", c.learning.horizon},
        {"alpha", to_json(c.learning.alpha)},
        {"gamma", to_json(c.learning.gamma)},
        {"exploration",
         {{"schedule", exploration_name(c.learning.exploration.kind)},
          {"epsilon0", c.learning.exploration.epsilon0},
          {"mu", c.learning.exploration.mu},
          {"floor", c.learning.exploration.floor}}},
        {"lambda_update", to_string(c.learning.lambda_update)},
        {"ref_state", to_json(c.learning.ref_state)}}},
      {"estimation",
       {{"episodes", c.estimation.episodes},
        {"horizon", c.estimation.horizon},
        {"mode", to_string(c.estimation.mode)}}},
      {"evaluation",
       {{"runs", c.evaluation.runs},
        {"horizon", c.evaluation.horizon},
        {"episode_runs", c.evaluation.episode_runs},
        {"episode_horizon", c.evaluation.episode_horizon},
        {"burn_in", c.evaluation.burn_in}}},
      {"sweep",
       {{"betas", c.sweep.betas},
        {"capacities", c.sweep.capacities},
        {"delta_maxes", c.sweep.delta_maxes},
        {"evaluators", evaluators}}},
  };
}

json make_manifest(const std::string& command, const ExperimentConfig& config,
                   double wall_seconds) {
  return json{{"command", command},
              {"version", kVersion},
              {"seed", config.seed},
              {"estimator_mode", to_string(config.estimation.mode)},
              {"lambda_update", to_string(config.learning.lambda_update)},
              {"config", to_json(config)},
              {"wall_time_seconds", wall_seconds}};
}

CommandResult cmd_solve(const ExperimentConfig& config) {
  config.validate();
  const auto start = Clock::now();
  const auto dir = prepare_output(config);

  const auto result = rvia_solve(build_model<double>(config.system), config.solver);
  const double exact = exact_average_vaoi(config.system, result.policy);
  const auto profile = threshold_profile(result.policy, config.system);

  CommandResult out;
  out.summary = json{{"avg_vaoi", result.avg_cost},
                     {"exact_avg_vaoi", exact},
                     {"iterations", result.iterations},
                     {"span_residual", result.span_residual},
                     {"threshold_structure", profile.holds()}};
  if (config.evaluation.runs >= 2) {
    out.summary["monte_carlo"] =
        to_json(monte_carlo_eval(config.system, result.policy, full_evaluation(config)));
  }
  const json manifest = make_manifest("solve", config, seconds_since(start));

  out.files = {dir / "policy_grid.csv", dir / "solution.json", dir / "manifest.json"};
  write_text(out.files[0], policy_grid_csv(config.system, result.policy));
  write_json(out.files[1], solution_json(config.system, result, manifest));
  write_json(out.files[2], manifest);
  return out;
}

CommandResult cmd_table_dmax(const ExperimentConfig& config) {
  config.validate();
  const auto start = Clock::now();
  const auto dir = prepare_output(config);

  std::vector<SystemParams> grid;
  for (int d : config.sweep.delta_maxes) {
    SystemParams p = config.system;
    p.delta_max = d;
    grid.push_back(p);
  }
  const auto rows = sweep(grid, {PolicySource::Optimal}, config.sweep.evaluators,
                          SweepOptions{config.solver, full_evaluation(config)});

  CommandResult out;
  json table = json::array();
  for (const auto& r : rows) {
    table.push_back(json{{"delta_max", r.params.delta_max},
                         {"evaluator", to_string(r.evaluator)},
                         {"avg_vaoi", nan_to_null(r.avg_vaoi)},
                         {"std_error", r.std_error},
                         {"status", r.ok ? "ok" : "failed"}});
  }
  out.summary = json{{"table", table}};
  out.files = {dir / "table_dmax.csv", dir / "manifest.json"};
  write_text(out.files[0], sweep_csv(rows));
  write_json(out.files[1], make_manifest("table-dmax", config, seconds_since(start)));
  return out;
}

CommandResult cmd_sweep_beta(const ExperimentConfig& config) {
  config.validate();
  const auto start = Clock::now();
  const auto dir = prepare_output(config);

  std::vector<SystemParams> grid;
  for (int b : config.sweep.capacities) {
    for (double beta : config.sweep.betas) {
      SystemParams p = config.system;
      p.B = b;
      p.beta = beta;
      grid.push_back(p);
    }
  }
  const auto rows = sweep(grid, {PolicySource::Optimal, PolicySource::Greedy},
                          config.sweep.evaluators,
                          SweepOptions{config.solver, full_evaluation(config)});
  std::size_t failed = 0;
  for (const auto& r : rows) failed += r.ok ? 0 : 1;

  CommandResult out;
  out.summary = json{{"rows", rows.size()}, {"failed", failed}};
  out.files = {dir / "sweep_beta.csv", dir / "manifest.json"};
  write_text(out.files[0], sweep_csv(rows));
  write_json(out.files[1], make_manifest("sweep-beta", config, seconds_since(start)));
  return out;
}

CommandResult cmd_estimate(const ExperimentConfig& config) {
  config.validate();
  const auto start = Clock::now();
  const auto dir = prepare_output(config);

  const auto reference = rvia_solve(build_model<double>(config.system), config.solver);
  const auto report = run_estimation_based_mdp(config.system, estimation_config(config));

  CommandResult out;
  const auto& last = report.episodes.back();
  out.summary = json{{"estimator_mode", to_string(config.estimation.mode)},
                     {"episodes", config.estimation.episodes},
                     {"p_g_hat", last.raw.p_g},
                     {"p_s_hat", last.raw.p_s},
                     {"final_exact_avg_vaoi", last.exact_avg_vaoi},
                     {"reference_avg_vaoi", reference.avg_cost}};
  json manifest = make_manifest("estimate", config, seconds_since(start));
  manifest["reference_avg_vaoi"] = reference.avg_cost;
  out.files = {dir / "estimation.csv", dir / "manifest.json"};
  write_text(out.files[0], estimation_csv(report));
  write_json(out.files[1], manifest);
  return out;
}

CommandResult cmd_qlearn(const ExperimentConfig& config) {
  config.validate();
  const auto start = Clock::now();
  const auto dir = prepare_output(config);

  const auto reference = rvia_solve(build_model<double>(config.system), config.solver);
  const auto report = run_q_learning(config.system, qlearning_config(config));
  const double final_exact = exact_average_vaoi(config.system, report.policy);

  CommandResult out;
  out.summary = json{{"episodes", config.learning.episodes},
                     {"steps", report.steps},
                     {"lambda_hat", report.table.lambda_hat},
                     {"final_exact_avg_vaoi", final_exact},
                     {"reference_avg_vaoi", reference.avg_cost}};
  json manifest = make_manifest("qlearn", config, seconds_since(start));
  manifest["reference_avg_vaoi"] = reference.avg_cost;
  out.files = {dir / "learning_curve.csv", dir / "qtable.json", dir / "manifest.json"};
  write_text(out.files[0], learning_curve_csv(report));
  write_json(out.files[1], qtable_json(report.table, manifest));
  write_json(out.files[2], manifest);
  return out;
}

CommandResult cmd_compare(const ExperimentConfig& config) {
  config.validate();
  const auto start = Clock::now();
  const auto dir = prepare_output(config);

  const auto known = rvia_solve(build_model<double>(config.system), config.solver);
  const auto estimation = run_estimation_based_mdp(config.system, estimation_config(config));
  auto qcfg = qlearning_config(config);
  qcfg.exact_evaluation = false;
  qcfg.evaluation.runs = 0;
  const auto learned = run_q_learning(config.system, qcfg);
  const double greedy = exact_average_vaoi(config.system, greedy_policy(config.system));

  const json manifest = make_manifest("compare", config, seconds_since(start));
  CommandResult out;
  out.summary = json{{"known_avg_vaoi", known.avg_cost},
                     {"estimation_endpoint_avg_vaoi", estimation.episodes.back().exact_avg_vaoi},
                     {"qlearning_endpoint_avg_vaoi", exact_average_vaoi(config.system, learned.policy)},
                     {"greedy_avg_vaoi", greedy},
                     {"estimator_mode", to_string(config.estimation.mode)},
                     {"estimation_episodes", config.estimation.episodes},
                     {"qlearning_episodes", config.learning.episodes}};
  json report = out.summary;
  report["manifest"] = manifest;
  out.files = {dir / "compare.json", dir / "manifest.json"};
  write_json(out.files[0], report);
  write_json(out.files[1], manifest);
  return out;
}

}  // namespace vaoi
