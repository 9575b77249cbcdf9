// Command-line front end: solve | table-dmax | sweep-beta | estimate | qlearn | compare.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "vaoi/experiment.hpp"

namespace {

struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> estimator_mode;
  std::optional<std::string> lambda_update;
  std::optional<double> p_g, p_s, beta, tol;
  std::optional<int> B, delta_max;
  std::optional<std::size_t> episodes, horizon, runs, eval_horizon, max_iter, episode_runs;
  std::optional<unsigned> threads;
};

void add_common_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "JSON experiment configuration");
  cmd->add_option("--seed", o.seed, "master seed (u64)");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--estimator-mode", o.estimator_mode, "attempt | oracle");
  cmd->add_option("--lambda-update", o.lambda_update, "every-step | ref-gated");
  cmd->add_option("--p-g,--p_g", o.p_g, "version generation probability");
  cmd->add_option("--p-s,--p_s", o.p_s, "transmission success probability");
  cmd->add_option("--beta", o.beta, "energy arrival probability");
  cmd->add_option("--B,--capacity", o.B, "battery capacity");
  cmd->add_option("--delta-max,--delta_max", o.delta_max, "VAoI truncation ceiling");
  cmd->add_option("--tol", o.tol, "RVIA span tolerance");
  cmd->add_option("--max-iter", o.max_iter, "RVIA iteration cap");
  cmd->add_option("--episodes", o.episodes, "learning / estimation episodes");
  cmd->add_option("--horizon", o.horizon, "slots per learning / estimation episode");
  cmd->add_option("--runs", o.runs, "Monte Carlo runs (0 disables)");
  cmd->add_option("--eval-horizon", o.eval_horizon, "slots per Monte Carlo run");
  cmd->add_option("--episode-runs", o.episode_runs, "Monte Carlo runs per learning episode");
  cmd->add_option("--threads", o.threads, "Monte Carlo worker threads (0 = auto)");
}

vaoi::ExperimentConfig resolve(const Overrides& o) {
  using vaoi::ConfigError;
  vaoi::json j = o.config_path.empty() ? vaoi::json::object()
                                       : vaoi::to_json(vaoi::load_config(o.config_path));
  auto section = [&](const char* name) -> vaoi::json& {
    if (!j.contains(name)) j[name] = vaoi::json::object();
    return j[name];
  };
  if (o.seed) j["seed"] = *o.seed;
  if (o.out) j["output_dir"] = *o.out;
  if (o.threads) j["threads"] = *o.threads;
  if (o.p_g) j["p_g"] = *o.p_g;
  if (o.p_s) j["p_s"] = *o.p_s;
  if (o.beta) j["beta"] = *o.beta;
  if (o.B) j["B"] = *o.B;
  if (o.delta_max) j["delta_max"] = *o.delta_max;
  if (o.tol) section("solver")["tol"] = *o.tol;
  if (o.max_iter) section("solver")["max_iter"] = *o.max_iter;
  if (o.estimator_mode) section("estimation")["mode"] = *o.estimator_mode;
  if (o.lambda_update) section("learning")["lambda_update"] = *o.lambda_update;
  if (o.episodes) {
    section("learning")["episodes"] = *o.episodes;
    section("estimation")["episodes"] = *o.episodes;
  }
  if (o.horizon) {
    section("learning")["horizon"] = *o.horizon;
    section("estimation")["horizon"] = *o.horizon;
  }
  if (o.runs) section("evaluation")["runs"] = *o.runs;
  if (o.eval_horizon) section("evaluation")["horizon"] = *o.eval_horizon;
  if (o.episode_runs) section("evaluation")["episode_runs"] = *o.episode_runs;
  if (o.runs && *o.runs == 0) section("sweep")["evaluators"] = vaoi::json::array({"exact"});
  return vaoi::parse_config(j);
}

int fail(const std::string& kind, const std::string& message, const std::string& field,
         int code) {
  vaoi::json err{{"error", {{"kind", kind}, {"message", message}}}};
  if (!field.empty()) err["error"]["field"] = field;
  std::cout << err.dump() << std::endl;
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Version-age-optimal transmission policies for an energy-harvesting sensor"};
  app.require_subcommand(1);

  Overrides o;
  const std::pair<const char*, const char*> commands[] = {
      {"solve", "solve the fully known model with relative value iteration"},
      {"table-dmax", "optimal average VAoI across truncation ceilings"},
      {"sweep-beta", "optimal and greedy average VAoI across beta and B"},
      {"estimate", "estimation-based MDP learning curve"},
      {"qlearn", "average-cost Q-learning learning curve"},
      {"compare", "all regimes and the greedy baseline on one configuration"},
  };
  for (const auto& [name, help] : commands) add_common_flags(app.add_subcommand(name, help), o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), "", 2);
  }

  try {
    const auto config = resolve(o);
    const std::string name = app.get_subcommands().front()->get_name();
    vaoi::CommandResult result;
    if (name == "solve") result = vaoi::cmd_solve(config);
    else if (name == "table-dmax") result = vaoi::cmd_table_dmax(config);
    else if (name == "sweep-beta") result = vaoi::cmd_sweep_beta(config);
    else if (name == "estimate") result = vaoi::cmd_estimate(config);
    else if (name == "qlearn") result = vaoi::cmd_qlearn(config);
    else result = vaoi::cmd_compare(config);

    vaoi::json files = vaoi::json::array();
    for (const auto& f : result.files) files.push_back(f.string());
    vaoi::json printed = result.summary;
    printed["files"] = files;
    std::cout << printed.dump(2) << std::endl;
    return 0;
  } catch (const vaoi::ConfigError& e) {
    return fail("config", e.what(), e.field(), 2);
  } catch (const vaoi::ConvergenceError& e) {
    return fail("convergence", e.what(), "", 1);
  } catch (const std::exception& e) {
    return fail("runtime", e.what(), "", 1);
  }
}
