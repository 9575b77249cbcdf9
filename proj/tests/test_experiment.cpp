#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "vaoi/experiment.hpp"
#include "vaoi/export.hpp"

using namespace vaoi;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("vaoi_test_" + name);
  fs::remove_all(dir);
  return dir;
}

ExperimentConfig small_config(const fs::path& dir) {
  ExperimentConfig c;
  c.system = {0.3, 0.8, 0.2, 4, 5};
  c.output_dir = dir.string();
  c.learning.episodes = 5;
  c.learning.horizon = 200;
  c.estimation.episodes = 3;
  c.estimation.horizon = 200;
  c.evaluation.runs = 4;
  c.evaluation.horizon = 300;
  c.evaluation.burn_in = 50;
  c.evaluation.episode_runs = 0;
  c.sweep.betas = {0.1, 0.3};
  c.sweep.capacities = {2};
  c.sweep.delta_maxes = {2, 4};
  c.threads = 1;
  return c;
}

}  // namespace

TEST_CASE("config round-trips through JSON") {
  ExperimentConfig c;
  c.system.beta = 0.25;
  c.learning.lambda_update = LambdaUpdate::RefGated;
  c.learning.alpha = LearningSchedule::harmonic();
  c.estimation.mode = EstimatorMode::EverySlotOracle;
  c.sweep.evaluators = {Evaluator::Exact};
  c.seed = 77;
  const json j = to_json(c);
  const ExperimentConfig back = parse_config(j);
  CHECK(to_json(back) == j);
  CHECK(back.system == c.system);
  CHECK(back.seed == 77);
  CHECK(back.estimation.mode == EstimatorMode::EverySlotOracle);
  CHECK(back.learning.lambda_update == LambdaUpdate::RefGated);

  const ExperimentConfig defaults = parse_config(json::object());
  CHECK(defaults.system == SystemParams{});
  CHECK(defaults.learning.episodes == 2000);
  CHECK(defaults.evaluation.runs == 1000);
}

TEST_CASE("config errors name the field") {
  auto field_of = [](const json& j) -> std::string {
    try {
      parse_config(j);
    } catch (const ConfigError& e) {
      return e.field();
    }
    return "<none>";
  };
  CHECK(field_of(json{{"p_g", 1.5}}) == "p_g");
  CHECK(field_of(json{{"bogus", 1}}) == "bogus");
  CHECK(field_of(json{{"learning", {{"horizon", 0}}}}) == "learning.horizon");
  CHECK(field_of(json{{"learning", {{"alpha", {{"omega", 0.3}}}}}}) == "learning.alpha.omega");
  CHECK(field_of(json{{"solver", {{"tol", "small"}}}}) == "solver.tol");
  CHECK(field_of(json{{"estimation", {{"mode", "psychic"}}}}) == "estimation.mode");
  CHECK(field_of(json{{"B", -1}}) == "B");
  CHECK(field_of(json{{"sweep", {{"unknown", 1}}}}) == "sweep.unknown");
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), std::exception);
}

TEST_CASE("solve writes only into the output directory") {
  const fs::path dir = fresh_dir("solve");
  const auto cfg = small_config(dir);
  const auto res = cmd_solve(cfg);
  REQUIRE(res.files.size() == 3);
  for (const auto& f : res.files) {
    CHECK(fs::exists(f));
    CHECK(f.parent_path() == dir);
  }
  std::size_t count = 0;
  for (const auto& e : fs::directory_iterator(dir)) count += e.is_regular_file();
  CHECK(count == 3);

  const auto grid = slurp(dir / "policy_grid.csv");
  CHECK(grid.rfind("delta,b0,b1,b2,b3,b4\n", 0) == 0);
  CHECK(std::count(grid.begin(), grid.end(), '\n') == 7);  // header + one row per delta

  const json sol = json::parse(slurp(dir / "solution.json"));
  CHECK(sol["avg_vaoi"].get<double>() == doctest::Approx(res.summary["avg_vaoi"].get<double>()));
  CHECK(sol["policy"].size() == 30);
  CHECK(sol.contains("manifest"));
  fs::remove_all(dir);
}

TEST_CASE("outputs are deterministic for a fixed seed") {
  const fs::path d1 = fresh_dir("det1"), d2 = fresh_dir("det2");
  auto c1 = small_config(d1), c2 = small_config(d2);
  cmd_sweep_beta(c1);
  cmd_sweep_beta(c2);
  CHECK(slurp(d1 / "sweep_beta.csv") == slurp(d2 / "sweep_beta.csv"));
  cmd_estimate(c1);
  cmd_estimate(c2);
  CHECK(slurp(d1 / "estimation.csv") == slurp(d2 / "estimation.csv"));
  cmd_qlearn(c1);
  cmd_qlearn(c2);
  CHECK(slurp(d1 / "learning_curve.csv") == slurp(d2 / "learning_curve.csv"));

  const auto sweep = slurp(d1 / "sweep_beta.csv");
  CHECK(sweep.rfind("p_g,p_s,beta,B,delta_max,policy,evaluator,avg_vaoi,std_error,"
                    "solver_iterations,status,error\n",
                    0) == 0);
  // 2 betas x 1 capacity x 2 sources x 2 evaluators
  CHECK(std::count(sweep.begin(), sweep.end(), '\n') == 9);
  fs::remove_all(d1);
  fs::remove_all(d2);
}

TEST_CASE("manifest records the run settings") {
  const fs::path dir = fresh_dir("manifest");
  auto cfg = small_config(dir);
  cfg.seed = 31;
  cfg.estimation.mode = EstimatorMode::EverySlotOracle;
  cmd_estimate(cfg);
  const json m = json::parse(slurp(dir / "manifest.json"));
  CHECK(m["command"] == "estimate");
  CHECK(m["seed"] == 31);
  CHECK(m["estimator_mode"] == "oracle");
  CHECK(m["lambda_update"] == "every-step");
  CHECK(m.contains("reference_avg_vaoi"));
  CHECK(parse_config(m["config"]).seed == 31);

  const auto csv = slurp(dir / "estimation.csv");
  CHECK(csv.rfind("episode,p_g_hat,p_s_hat,exact_avg_vaoi,mc_avg_vaoi,solver_iterations,"
                  "model_p_g,model_p_s\n",
                  0) == 0);
  fs::remove_all(dir);
}

TEST_CASE("table-dmax and compare summaries") {
  const fs::path dir = fresh_dir("compare");
  auto cfg = small_config(dir);
  const auto t = cmd_table_dmax(cfg);
  CHECK(t.summary["table"].size() == 4);  // 2 delta_max x 2 evaluators

  const auto res = cmd_compare(cfg);
  const json c = json::parse(slurp(dir / "compare.json"));
  for (const char* key : {"known_avg_vaoi", "estimation_endpoint_avg_vaoi",
                          "qlearning_endpoint_avg_vaoi", "greedy_avg_vaoi"}) {
    CAPTURE(key);
    REQUIRE(c.contains(key));
    CHECK(c[key].is_number());
    CHECK(c[key].get<double>() >= c["known_avg_vaoi"].get<double>() - 1e-9);
  }
  CHECK(res.summary["estimator_mode"] == "attempt");
  fs::remove_all(dir);
}

TEST_CASE("csv helpers") {
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(std::nan("")) == "");
  const SystemParams p{0.3, 0.8, 0.1, 1, 1};
  CHECK(policy_grid_csv(p, greedy_policy(p)) == "delta,b0,b1\n0,0,1\n1,0,1\n");
  CHECK(system_params_from_json(to_json(p)) == p);
}
