#include "doctest.h"

#include <cmath>
#include <random>

#include "vaoi/estimation.hpp"

using namespace vaoi;

TEST_CASE("estimator updates") {
  EstimatorState est;
  CHECK(est.p_g_hat() == 0.5);
  CHECK(est.p_s_hat() == 0.5);

  est = update_generation_estimate(est, 1);
  est = update_generation_estimate(est, 0);
  est = update_generation_estimate(est, 0);
  CHECK(est.gen_observations == 3);
  CHECK(est.slot_count == 3);
  CHECK(est.p_g_hat() == doctest::Approx(1.0 / 3.0));

  // Attempt-conditioned: idle slots reveal nothing about the channel.
  est = update_channel_estimate(est, false, 1);
  CHECK(est.tx_attempts == 0);
  est = update_channel_estimate(est, true, 0);
  est = update_channel_estimate(est, true, 1);
  est = update_channel_estimate(est, true, 1);
  CHECK(est.tx_attempts == 3);
  CHECK(est.p_s_hat() == doctest::Approx(2.0 / 3.0));

  EstimatorState oracle;
  oracle.mode = EstimatorMode::EverySlotOracle;
  oracle = update_channel_estimate(oracle, false, 1);
  oracle = update_channel_estimate(oracle, false, 0);
  CHECK(oracle.tx_attempts == 2);
  CHECK(oracle.p_s_hat() == doctest::Approx(0.5));

  const auto sm = smoothed_estimates(est);
  CHECK(sm.p_g == doctest::Approx(2.0 / 5.0));
  CHECK(sm.p_s == doctest::Approx(3.0 / 5.0));
  CHECK(smoothed_estimates(EstimatorState{}).p_g == doctest::Approx(0.5));
}

TEST_CASE("mode names round-trip") {
  for (auto m : {EstimatorMode::AttemptConditioned, EstimatorMode::EverySlotOracle}) {
    CHECK(parse_estimator_mode(to_string(m)) == m);
  }
  CHECK_THROWS_AS(parse_estimator_mode("sometimes"), std::invalid_argument);
}

TEST_CASE("recursive counts equal batch means") {
  std::mt19937_64 eng(5);
  std::bernoulli_distribution g(0.37), h(0.81), tx(0.4);
  EstimatorState est;
  std::vector<int> gs, hs;
  float running = 0.0f;  // float recursive mean as a cross-check on the update form
  double running_d = 0.0;
  for (int t = 0; t < 100000; ++t) {
    const int gi = g(eng), hi = h(eng);
    const bool attempt = tx(eng);
    est = update_generation_estimate(est, gi);
    est = update_channel_estimate(est, attempt, hi);
    gs.push_back(gi);
    if (attempt) hs.push_back(hi);
    running_d += (gi - running_d) / (t + 1);
    running += (static_cast<float>(gi) - running) / static_cast<float>(t + 1);
  }
  std::uint64_t gsum = 0, hsum = 0;
  for (int v : gs) gsum += v;
  for (int v : hs) hsum += v;
  CHECK(est.gen_successes == gsum);
  CHECK(est.tx_attempts == hs.size());
  CHECK(est.p_g_hat() == static_cast<double>(gsum) / gs.size());
  CHECK(est.p_s_hat() == static_cast<double>(hsum) / hs.size());
  CHECK(std::abs(running_d - est.p_g_hat()) <= 1e-12);
  CHECK(std::abs(static_cast<double>(running) - est.p_g_hat()) <= 1e-4);
}

TEST_CASE("smoothed estimates stay strictly inside (0, 1)") {
  EstimatorState est;
  for (int i = 0; i < 1000; ++i) {
    est = update_generation_estimate(est, 0);
    est = update_channel_estimate(est, true, 1);
  }
  const auto sm = smoothed_estimates(est);
  CHECK(sm.p_g > 0.0);
  CHECK(sm.p_s < 1.0);
  CHECK(raw_estimates(est).p_g == 0.0);
  CHECK(raw_estimates(est).p_s == 1.0);
}

TEST_CASE("closed loop: estimates converge and the policy approaches the optimum") {
  const SystemParams truth{0.3, 0.8, 0.2, 10, 10};
  const double optimum = rvia_solve<double>(truth).avg_cost;

  for (auto mode : {EstimatorMode::AttemptConditioned, EstimatorMode::EverySlotOracle}) {
    CAPTURE(to_string(mode));
    EstimationConfig cfg;
    cfg.episodes = 50;
    cfg.mode = mode;
    cfg.seed = 2;
    const auto rep = run_estimation_based_mdp(truth, cfg);
    REQUIRE(rep.episodes.size() == 51);
    CHECK(rep.episodes[0].model.p_g == 0.5);
    CHECK(rep.episodes[0].model.p_s == 0.5);

    const auto& est = rep.estimator;
    CHECK(est.slot_count == 50 * 2000);
    const double sg = std::sqrt(0.3 * 0.7 / est.gen_observations);
    const double ss = std::sqrt(0.8 * 0.2 / est.tx_attempts);
    CHECK(std::abs(est.p_g_hat() - 0.3) <= 4 * sg);
    CHECK(std::abs(est.p_s_hat() - 0.8) <= 4 * ss);
    if (mode == EstimatorMode::EverySlotOracle) CHECK(est.tx_attempts == est.slot_count);
    else CHECK(est.tx_attempts < est.slot_count);

    const double gap1 = rep.episodes[1].exact_avg_vaoi - optimum;
    const double gap50 = rep.episodes[50].exact_avg_vaoi - optimum;
    CHECK(gap1 >= -1e-9);
    CHECK(gap50 >= -1e-9);
    CHECK(gap50 <= gap1 + 1e-9);
    CHECK(rep.episodes[1].exact_avg_vaoi <= 1.05 * optimum);
    CHECK(rep.episodes[50].exact_avg_vaoi <= 1.01 * optimum);
    for (const auto& row : rep.episodes) CHECK(std::isnan(row.mc_avg_vaoi));
  }
}

TEST_CASE("true initial estimates that stay frozen give the optimal policy") {
  const SystemParams truth{0.3, 0.8, 0.1, 6, 8};
  const auto opt = rvia_solve<double>(truth);
  EstimationConfig cfg;
  cfg.episodes = 3;
  cfg.horizon = 500;
  cfg.initial_estimates = Estimates{0.3, 0.8};
  cfg.freeze_estimates = true;
  const auto rep = run_estimation_based_mdp(truth, cfg);
  for (const auto& row : rep.episodes) {
    CHECK(row.policy == opt.policy);
    CHECK(row.model.p_g == 0.3);
    CHECK(row.exact_avg_vaoi == doctest::Approx(opt.avg_cost).epsilon(1e-9));
  }
  CHECK(rep.estimator.slot_count == 1500);  // observations are still counted
  // Warm starts: later solves need far fewer iterations than the cold one.
  CHECK(rep.episodes[1].solver_iterations < rep.episodes[0].solver_iterations);
}

TEST_CASE("estimation run is deterministic and can attach Monte Carlo checks") {
  const SystemParams truth{0.3, 0.8, 0.2, 4, 5};
  EstimationConfig cfg;
  cfg.episodes = 4;
  cfg.horizon = 300;
  cfg.seed = 11;
  cfg.evaluation = {.runs = 4, .horizon = 300, .burn_in = 100, .threads = 1};
  const auto a = run_estimation_based_mdp(truth, cfg);
  const auto b = run_estimation_based_mdp(truth, cfg);
  CHECK(a.estimator == b.estimator);
  for (std::size_t i = 0; i < a.episodes.size(); ++i) {
    CHECK(a.episodes[i].mc_avg_vaoi == b.episodes[i].mc_avg_vaoi);
    CHECK_FALSE(std::isnan(a.episodes[i].mc_avg_vaoi));
  }
  cfg.horizon = 0;
  CHECK_THROWS_AS(run_estimation_based_mdp(truth, cfg), std::invalid_argument);
}
