#include "doctest.h"

#include <cmath>
#include <map>

#include "vaoi/mdp_solver.hpp"
#include "vaoi/simulator.hpp"

using namespace vaoi;

TEST_CASE("env_step with degenerate probabilities") {
  SUBCASE("sure success") {
    Environment env({1.0, 1.0, 1.0, 5, 5}, 7);
    const auto out = env_step(env, {3, 2}, Action::Transmit);
    CHECK(out.g == 1);
    CHECK(out.h == 1);
    CHECK(out.e == 1);
    CHECK(out.next_state == State{1, 2});
    CHECK(out.cost == 1.0);
  }
  SUBCASE("sure failure") {
    Environment env({0.0, 0.0, 0.0, 5, 5}, 7);
    const auto out = env_step(env, {3, 2}, Action::Transmit);
    CHECK(out.next_state == State{3, 1});
    const auto idle = env_step(env, {5, 0}, Action::Idle);
    CHECK(idle.next_state == State{5, 0});
    CHECK(idle.cost == 5.0);
  }
  SUBCASE("rejections") {
    Environment env({0.3, 0.8, 0.1, 5, 5}, 7);
    CHECK_THROWS_AS(env_step(env, {3, 0}, Action::Transmit), InfeasibleAction);
    CHECK_THROWS_AS(env_step(env, {6, 0}, Action::Idle), std::out_of_range);
    CHECK_THROWS_AS(Environment({1.2, 0.8, 0.1, 5, 5}, 1), std::invalid_argument);
  }
}

TEST_CASE("sampler frequencies match the kernel") {
  const SystemParams p{0.35, 0.6, 0.25, 2, 3};
  Environment env(p, 99);
  constexpr int draws = 200000;
  for (const State& s : enumerate_states(p)) {
    for (Action a : feasible_actions(s)) {
      std::map<std::pair<int, int>, int> counts;
      for (int i = 0; i < draws; ++i) {
        const auto out = env.step(s, a);
        ++counts[{out.next_state.delta, out.next_state.b}];
      }
      const auto dist = transition_dist(p, s, a);
      int covered = 0;
      for (const auto& e : dist.entries) {
        const int c = counts[{e.state.delta, e.state.b}];
        const double sigma = std::sqrt(e.probability * (1 - e.probability) / draws);
        CHECK(std::abs(c / double(draws) - e.probability) <= 4.5 * sigma + 1e-12);
        covered += c;
      }
      CHECK(covered == draws);
    }
  }
}

TEST_CASE("run_episode bookkeeping") {
  SUBCASE("all idle with certain generation climbs to the cap") {
    const SystemParams p{1.0, 0.8, 0.1, 4, 3};
    Environment env(p, 3);
    CHECK(run_episode(env, all_idle_policy(p), 10, {3, 0}).mean_vaoi == doctest::Approx(3.0));
    Environment env2(p, 3);
    const auto s = run_episode(env2, all_idle_policy(p), 4, {0, 0});
    CHECK(s.mean_vaoi == doctest::Approx((1 + 2 + 3 + 3) / 4.0));
    CHECK(s.transmissions == 0);
    CHECK(s.generations == 4);
    CHECK(s.max_vaoi == 3);
  }
  SUBCASE("bounds and observer") {
    const SystemParams p{0.3, 0.8, 0.1, 10, 10};
    const auto policy = rvia_solve<double>(p).policy;
    Environment env(p, 11);
    std::size_t seen = 0;
    bool in_range = true;
    const auto s = run_episode(env, policy, 5000, {0, 0},
                               [&](const State& st, Action a, const StepOutcome& out) {
                                 ++seen;
                                 in_range = in_range && is_valid(p, out.next_state) &&
                                            is_feasible(st, a);
                               });
    CHECK(seen == 5000);
    CHECK(in_range);
    CHECK(s.mean_vaoi >= 0.0);
    CHECK(s.mean_vaoi <= 10.0);
    CHECK(s.successes <= s.transmissions);
    CHECK(s.transmissions <= s.arrivals);  // every spent unit arrived during the run
  }
  SUBCASE("greedy keeps the battery at most one") {
    const SystemParams p{0.3, 0.8, 0.5, 10, 10};
    Environment env(p, 5);
    CHECK(run_episode(env, greedy_policy(p), 20000, {0, 0}).max_battery <= 1);
  }
  SUBCASE("argument checks") {
    const SystemParams p{0.3, 0.8, 0.1, 2, 2};
    Environment env(p, 1);
    CHECK_THROWS_AS(run_episode(env, greedy_policy(p), 0, {0, 0}), std::invalid_argument);
    CHECK_THROWS_AS(run_episode(env, Policy(3), 5, {0, 0}), std::invalid_argument);
  }
}

TEST_CASE("same seed and stream reproduce the trajectory") {
  const SystemParams p{0.3, 0.8, 0.1, 10, 10};
  const auto policy = greedy_policy(p);
  Environment a(p, 42, 3), b(p, 42, 3), c(p, 42, 4);
  const auto ra = run_episode(a, policy, 3000, {0, 0});
  const auto rb = run_episode(b, policy, 3000, {0, 0});
  const auto rc = run_episode(c, policy, 3000, {0, 0});
  CHECK(ra.mean_vaoi == rb.mean_vaoi);
  CHECK(ra.final_state == rb.final_state);
  CHECK(ra.mean_vaoi != rc.mean_vaoi);

  MonteCarloOptions opt{.runs = 16, .horizon = 500, .seed = 9, .threads = 1};
  const auto one = monte_carlo_eval(p, policy, opt);
  opt.threads = 4;
  const auto four = monte_carlo_eval(p, policy, opt);
  CHECK(one.mean_vaoi == four.mean_vaoi);
  CHECK(one.std_error == four.std_error);
}

TEST_CASE("Monte Carlo agrees with exact evaluation") {
  const SystemParams p{0.3, 0.8, 0.1, 10, 10};
  const auto opt_policy = rvia_solve<double>(p).policy;
  for (const Policy& pol : {opt_policy, greedy_policy(p)}) {
    const double exact = exact_average_vaoi(p, pol);
    const auto mc = monte_carlo_eval(p, pol, {.runs = 200, .horizon = 10000, .seed = 3});
    CHECK(mc.runs == 200);
    CHECK(mc.ci99_lo < mc.mean_vaoi);
    CHECK(mc.ci99_hi > mc.mean_vaoi);
    CHECK(mc.ci99_hi - mc.mean_vaoi == doctest::Approx(kZ99 * mc.std_error));
    CHECK(std::abs(mc.mean_vaoi - exact) <= 4 * mc.std_error);
  }
}

TEST_CASE("Monte Carlo estimate does not depend on the start state") {
  const SystemParams p{0.3, 0.8, 0.1, 10, 10};
  const auto pol = rvia_solve<double>(p).policy;
  MonteCarloOptions opt{.runs = 200, .horizon = 5000, .seed = 17};
  const auto from_empty = monte_carlo_eval(p, pol, opt);
  opt.start = {10, 10};
  opt.seed = 18;
  const auto from_full = monte_carlo_eval(p, pol, opt);
  const double se = std::hypot(from_empty.std_error, from_full.std_error);
  CHECK(std::abs(from_empty.mean_vaoi - from_full.mean_vaoi) <= 4 * se);
}

TEST_CASE("99% intervals cover the exact value in at least 95 of 100 repetitions") {
  const SystemParams p{0.4, 0.7, 0.3, 3, 4};
  const auto pol = rvia_solve<double>(p).policy;
  const double exact = exact_average_vaoi(p, pol);
  int covered = 0;
  for (std::uint64_t rep = 0; rep < 100; ++rep) {
    const auto mc = monte_carlo_eval(
        p, pol, {.runs = 30, .horizon = 2000, .seed = 1000 + rep, .burn_in = 200});
    covered += (mc.ci99_lo <= exact && exact <= mc.ci99_hi) ? 1 : 0;
  }
  CHECK(covered >= 95);
}

TEST_CASE("sweep marks failed points and keeps going") {
  SystemParams bad{0.3, 0.8, 0.1, 10, 10};
  bad.p_g = 2.0;
  const std::vector<SystemParams> grid{{0.3, 0.8, 0.1, 2, 2}, bad, {0.3, 0.8, 0.2, 3, 3}};
  SweepOptions opt;
  opt.monte_carlo = {.runs = 4, .horizon = 200, .seed = 1, .burn_in = 0, .threads = 1};
  const auto rows = sweep(grid, {PolicySource::Optimal, PolicySource::Greedy},
                          {Evaluator::Exact, Evaluator::MonteCarlo}, opt);
  REQUIRE(rows.size() == 12);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const bool is_bad = i >= 4 && i < 8;
    CHECK(rows[i].ok == !is_bad);
    if (is_bad) {
      CHECK(std::isnan(rows[i].avg_vaoi));
      CHECK(rows[i].error.find("p_g") != std::string::npos);
    }
  }
  CHECK(rows[0].avg_vaoi <= rows[2].avg_vaoi + 1e-12);  // optimal vs greedy, exact

  SweepOptions tight;
  tight.solver.max_iter = 3;
  const auto capped = sweep({{0.3, 0.8, 0.1, 10, 10}}, {PolicySource::Optimal, PolicySource::Greedy},
                            {Evaluator::Exact}, tight);
  REQUIRE(capped.size() == 2);
  CHECK_FALSE(capped[0].ok);
  CHECK(capped[1].ok);
  CHECK_THROWS_AS(sweep({}, {PolicySource::Optimal}, {Evaluator::Exact}), std::invalid_argument);
}
