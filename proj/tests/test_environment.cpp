#include <doctest.h>

#include <cmath>
#include <vector>

#include "acd/environment.hpp"
#include "acd/errors.hpp"
#include "oracles/monte_carlo.hpp"
#include "test_support.hpp"

using namespace acd;

namespace {

bool is_one_hot(const Observation& o) {
  int ones = 0;
  for (Eigen::Index i = 0; i < o.size(); ++i) {
    if (o[i] == 1.0) {
      ++ones;
    } else if (o[i] != 0.0) {
      return false;
    }
  }
  return ones == 1;
}

Eigen::Index hot(const Observation& o) {
  Eigen::Index i;
  o.maxCoeff(&i);
  return i;
}

}  // namespace

TEST_CASE("reward examples") {
  RewardModel m;
  m.impact = 10.0;
  CHECK(reward_of_transition(m, 0.0, Outcome::kDefenderWin, 0.0) == 10.0);
  CHECK(reward_of_transition(m, 1.0, Outcome::kAdversaryWin, 0.5) == -20.5);
  CHECK(reward_of_transition(m, 0.4, Outcome::kOngoing, 1.2) == doctest::Approx(-5.2).epsilon(1e-15));
  CHECK(reward_of_transition(m, 0.4, Outcome::kTruncated, 1.2) == doctest::Approx(-5.2).epsilon(1e-15));
  m.literal_iv = true;
  CHECK(reward_of_transition(m, 1.0, Outcome::kAdversaryWin, 0.5) == -10.5);
  CHECK(reward_of_transition(m, 0.0, Outcome::kDefenderWin, 0.0) == 10.0);
}

TEST_CASE("p_goal examples") {
  CHECK(compute_p_goal(1, 2, 0.75) == doctest::Approx(0.9375).epsilon(1e-15));
  for (int b = 0; b < 5; ++b) CHECK(compute_p_goal(0, b, 0.3) == 1.0);
  CHECK(compute_p_goal(2, 0, 0.9) == 0.0);
  CHECK(compute_p_goal(3, 4, 0.85) < 1.0);
  const AttackPath path{{1, 2, 3}};
  CHECK(compute_p_goal(path, 3, 2, 0.5) == 1.0);
  CHECK(compute_p_goal(path, 0, 4, 0.85) == compute_p_goal(3, 4, 0.85));
  CHECK_THROWS_AS(compute_p_goal(path, 4, 2, 0.5), PreconditionError);
  CHECK_THROWS_AS(compute_p_goal(2, -1, 0.5), PreconditionError);
}

TEST_CASE("p_goal closed form for one remaining step") {
  for (double rho : {0.75, 0.85, 0.95}) {
    for (int b = 1; b <= 7; ++b) {
      CHECK(std::abs(compute_p_goal(1, b, rho) - (1.0 - std::pow(1.0 - rho, b))) < 1e-15);
    }
  }
}

TEST_CASE("p_goal agrees with Monte Carlo at (3, 4, 0.85)") {
  const double mc = oracle::monte_carlo_p_goal(3, 4, 0.85, 200000, 42);
  CHECK(std::abs(compute_p_goal(3, 4, 0.85) - mc) < 0.005);
}

TEST_CASE("p_goal monotonicity") {
  for (std::size_t l = 1; l <= 6; ++l) {
    for (int b = 0; b <= 7; ++b) {
      for (double rho : {0.25, 0.5, 0.75, 0.85, 0.95}) {
        const double p = compute_p_goal(l, b, rho);
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
        CHECK(compute_p_goal(l, b + 1, rho) >= p);
        CHECK(compute_p_goal(l + 1, b, rho) <= p);
        CHECK(compute_p_goal(l, b, std::min(1.0, rho + 0.04)) >= p);
      }
    }
  }
}

TEST_CASE("memo table matches the direct program") {
  GoalProbabilityTable table(0.85, 7, 5);
  for (std::size_t l = 0; l <= 9; ++l) {
    for (int b = 0; b <= 6; ++b) CHECK(table(l, b) == compute_p_goal(l, b, 0.85));
  }
}

TEST_CASE("observation channel") {
  const auto g = testing::default_graph();
  Rng rng(1);

  SUBCASE("perfect accuracy") {
    const auto p = testing::profile(0.75, 4, 1.0);
    for (std::size_t i = 0; i + 1 < g->state_count(); ++i) {
      CHECK(hot(observe(*g, g->state_at(i), p, rng)) == static_cast<Eigen::Index>(i));
    }
  }
  SUBCASE("terminated is exact") {
    const auto p = testing::profile(0.75, 4, 0.01);
    for (int i = 0; i < 1000; ++i) CHECK(hot(observe(*g, AttackState::terminated(), p, rng)) == 16);
  }
  SUBCASE("noisy frequencies") {
    const auto p = testing::profile(0.75, 4, 0.85);
    const auto truth = AttackState::technique(7);
    const int n = 100000;
    std::vector<int> counts(g->state_count(), 0);
    for (int i = 0; i < n; ++i) {
      const auto o = observe(*g, truth, p, rng);
      REQUIRE(is_one_hot(o));
      ++counts[static_cast<std::size_t>(hot(o))];
    }
    CHECK(std::abs(counts[7] / static_cast<double>(n) - 0.85) < 0.01);
    CHECK(counts[16] == 0);
    // Decoys are spread evenly over the 15 other non-terminal states.
    for (std::size_t i = 0; i < 16; ++i) {
      if (i != 7) CHECK(std::abs(counts[i] / static_cast<double>(n) - 0.15 / 15) < 0.002);
    }
  }
}

TEST_CASE("reset") {
  const auto g = testing::default_graph();
  CyberDefenseEnv env(testing::env_config(g, testing::default_catalog(), *find_builtin_profile("Av1"), 3));
  const auto paths = enumerate_paths(*g);
  const auto obs = env.reset(paths.front());
  CHECK(is_one_hot(obs));
  CHECK(obs[0] == 1.0);
  CHECK(env.timestep() == 0);
  CHECK_FALSE(env.done());
  CHECK(env.adversary().failures == 0);
  CHECK(env.adversary().position == AttackState::initiated());

  const auto other = testing::chain_graph(3);
  CHECK_THROWS_AS(env.reset(enumerate_paths(*other).front()), PreconditionError);
}

TEST_CASE("step before reset or after the end") {
  const auto g = testing::chain_graph(3);
  CyberDefenseEnv env(testing::env_config(g, testing::small_catalog(*g, 1.0), testing::profile(1.0, 1), 1));
  CHECK_THROWS_AS(env.step(0), PreconditionError);
  env.reset(AttackPath{{1, 2, 3}});
  env.step(2);  // blocked with probability 1, tau 1
  CHECK(env.done());
  CHECK_THROWS_AS(env.step(0), PreconditionError);
}

TEST_CASE("certain success under Inactive reaches the goal in L steps") {
  const auto g = testing::default_graph();
  const auto paths = enumerate_paths(*g);
  for (std::size_t k = 0; k < paths.size(); k += 97) {
    const auto& path = paths[k];
    CyberDefenseEnv env(testing::env_config(g, testing::default_catalog(), testing::profile(1.0, 4), k));
    env.reset(path);
    StepOutcome out;
    for (std::size_t i = 0; i < path.size(); ++i) {
      REQUIRE_FALSE(env.done());
      out = env.step(0);
      CHECK(out.info.attack_succeeded);
      CHECK_FALSE(out.info.defense_blocked);
      CHECK(out.info.cost == 0.0);
      CHECK(out.info.true_state == AttackState::technique(path[i]));
    }
    CHECK(out.done);
    CHECK(out.info.outcome == Outcome::kAdversaryWin);
    CHECK(out.reward == -20.0);
    CHECK(env.timestep() == static_cast<int>(path.size()));
  }
}

TEST_CASE("final permitted failure blocked ends in a defender win") {
  const auto g = testing::chain_graph(3);
  CyberDefenseEnv env(testing::env_config(g, testing::small_catalog(*g, 1.0, 0.0, 0.0), testing::profile(0.9, 3), 5));
  env.reset(AttackPath{{1, 2, 3}});
  StepOutcome out;
  for (int i = 0; i < 3; ++i) {
    out = env.step(2);
    CHECK(out.info.defense_blocked);
    CHECK_FALSE(out.info.attack_succeeded);
  }
  CHECK(out.done);
  CHECK(out.info.outcome == Outcome::kDefenderWin);
  CHECK(out.info.true_state == AttackState::terminated());
  CHECK(hot(out.observation) == static_cast<Eigen::Index>(g->state_count() - 1));
  CHECK(out.reward == 10.0);
}

TEST_CASE("horizon truncation") {
  const auto g = testing::chain_graph(3);
  CyberDefenseEnv env(testing::env_config(g, testing::small_catalog(*g, 1.0), testing::profile(0.9, 50), 5, 4));
  env.reset(AttackPath{{1, 2, 3}});
  StepOutcome out;
  for (int i = 0; i < 4; ++i) out = env.step(2);
  CHECK(out.done);
  CHECK(out.info.outcome == Outcome::kTruncated);
}

TEST_CASE("every episode ends in exactly one outcome and rewards decompose") {
  const auto g = testing::default_graph();
  const auto c = testing::default_catalog();
  const auto paths = enumerate_paths(*g);
  Rng policy(17);
  for (const auto& p : builtin_profiles()) {
    CyberDefenseEnv env(testing::env_config(g, c, p, 99, 16));
    for (int ep = 0; ep < 300; ++ep) {
      env.reset(paths[policy.index(paths.size())]);
      StepOutcome out;
      int steps = 0;
      int prev_cursor = 0;
      do {
        out = env.step(policy.index(c->size()));
        ++steps;
        CHECK(is_one_hot(out.observation));
        CHECK(out.done == (out.info.outcome != Outcome::kOngoing));
        const int cursor = static_cast<int>(env.adversary().path_cursor);
        CHECK(cursor >= prev_cursor);
        prev_cursor = cursor;
        if (out.info.outcome == Outcome::kOngoing || out.info.outcome == Outcome::kTruncated) {
          CHECK(std::abs(out.reward + out.info.p_goal * 10.0 + out.info.cost) < 1e-12);
        }
      } while (!out.done);
      CHECK(steps <= 16);
      CHECK(env.adversary().failures <= p.failure_limit());
    }
  }
}

TEST_CASE("identical seeds and actions give identical trajectories") {
  const auto g = testing::default_graph();
  const auto c = testing::default_catalog();
  const auto path = enumerate_paths(*g)[321];
  auto run = [&] {
    CyberDefenseEnv env(testing::env_config(g, c, *find_builtin_profile("Av2"), 1234));
    std::vector<nlohmann::json> lines;
    env.set_trajectory_sink([&](const nlohmann::json& line) { lines.push_back(line); });
    for (int ep = 0; ep < 20; ++ep) {
      env.reset(path);
      std::size_t a = static_cast<std::size_t>(ep);
      while (!env.done()) env.step((a++ * 7) % c->size());
    }
    return lines;
  };
  const auto a = run();
  const auto b = run();
  REQUIRE(!a.empty());
  CHECK(a == b);
  for (const char* key : {"timestep", "action", "blocked", "attack_succeeded", "true_state", "observed_state",
                          "reward", "outcome"}) {
    CHECK(a.front().contains(key));
  }
}
