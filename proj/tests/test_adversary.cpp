#include <doctest.h>

#include <cmath>

#include "acd/adversary.hpp"
#include "acd/errors.hpp"

using namespace acd;

namespace {

const AttackPath kPath{{2, 3, 7, 4, 9, 11, 13}};

AdversaryProfile make(double rho, int tau) {
  AdversaryProfile p;
  p.name = "x";
  p.rho = rho;
  p.tau = tau;
  return p;
}

}  // namespace

TEST_CASE("builtin profiles") {
  const auto ps = builtin_profiles();
  REQUIRE(ps.size() == 3);
  CHECK(ps[0].name == "Av1");
  CHECK(ps[0].rho == 0.75);
  CHECK(ps[0].tau == 4);
  CHECK(ps[0].obs_accuracy == 0.85);
  CHECK(ps[1].rho == 0.85);
  CHECK(ps[1].tau == 5);
  CHECK(ps[1].obs_accuracy == 0.75);
  CHECK(ps[2].rho == 0.95);
  CHECK(ps[2].tau == 7);
  CHECK(ps[2].obs_accuracy == 0.65);
  CHECK(find_builtin_profile("Av3")->tau == 7);
  CHECK_FALSE(find_builtin_profile("Av9").has_value());
}

TEST_CASE("profile validation and json") {
  CHECK_THROWS_AS(make(0.0, 4).validate(), ConfigError);
  CHECK_THROWS_AS(make(1.1, 4).validate(), ConfigError);
  CHECK_THROWS_AS(make(0.5, 0).validate(), ConfigError);
  auto p = make(1.0, 1);
  CHECK_NOTHROW(p.validate());
  p.obs_accuracy = 0.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);

  const auto av2 = *find_builtin_profile("Av2");
  const auto back = AdversaryProfile::from_json(av2.to_json());
  CHECK(back.name == av2.name);
  CHECK(back.rho == av2.rho);
  CHECK(back.tau == av2.tau);
  CHECK(back.obs_accuracy == av2.obs_accuracy);
  CHECK_THROWS_AS(AdversaryProfile::from_json({{"name", "bad"}, {"rho", 2.0}, {"tau", 3}, {"obs_accuracy", 0.5}}),
                  ConfigError);
}

TEST_CASE("next_target follows the cursor") {
  AdversaryStatus s;
  CHECK(next_target(s, kPath) == 2);
  s.path_cursor = 1;
  CHECK(next_target(s, kPath) == 3);
  s.path_cursor = kPath.size();
  CHECK_THROWS_AS(next_target(s, kPath), PreconditionError);
  s.path_cursor = 0;
  s.terminated = true;
  CHECK_THROWS_AS(next_target(s, kPath), PreconditionError);
}

TEST_CASE("attempt degenerate probabilities") {
  Rng rng(1);
  auto sure = make(1.0, 4);
  for (int i = 0; i < 1000; ++i) CHECK(attempt(sure, rng));
  auto never = make(0.5, 4);
  never.rho = 0.0;  // test-only, bypasses validation
  for (int i = 0; i < 1000; ++i) CHECK_FALSE(attempt(never, rng));
}

TEST_CASE("attempt consumes exactly one uniform") {
  Rng a(9), b(9);
  attempt(make(0.75, 4), a);
  b.uniform();
  CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("attempt frequency") {
  for (double rho : {0.25, 0.5, 0.75, 0.95}) {
    Rng rng(static_cast<std::uint64_t>(rho * 100));
    int hits = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) hits += attempt(make(rho, 4), rng) ? 1 : 0;
    CHECK(std::abs(static_cast<double>(hits) / n - rho) < 0.01);
  }
}

TEST_CASE("record_outcome") {
  const auto p = make(0.75, 4);

  SUBCASE("success advances") {
    const auto s = record_outcome(AdversaryStatus{}, p, kPath, true);
    CHECK(s.position == AttackState::technique(2));
    CHECK(s.path_cursor == 1);
    CHECK(s.failures == 0);
    CHECK_FALSE(s.terminated);
  }
  SUBCASE("tau-th failure terminates") {
    AdversaryStatus s;
    s.failures = 3;
    s = record_outcome(s, p, kPath, false);
    CHECK(s.terminated);
    CHECK(s.failures == 4);
    CHECK(s.position == AttackState::terminated());
  }
  SUBCASE("failure below the budget keeps the position") {
    AdversaryStatus s;
    s.position = AttackState::technique(2);
    s.path_cursor = 1;
    s.failures = 2;
    s = record_outcome(s, make(0.95, 7), kPath, false);
    CHECK(s.failures == 3);
    CHECK(s.position == AttackState::technique(2));
    CHECK(s.path_cursor == 1);
    CHECK_FALSE(s.terminated);
  }
  SUBCASE("terminate_on_failure overrides tau") {
    auto q = make(0.75, 5);
    q.terminate_on_failure = 6;
    AdversaryStatus s;
    s.failures = 4;
    s = record_outcome(s, q, kPath, false);
    CHECK_FALSE(s.terminated);
    s = record_outcome(s, q, kPath, false);
    CHECK(s.terminated);
  }
  SUBCASE("terminated status rejects further outcomes") {
    AdversaryStatus s;
    s.terminated = true;
    s.position = AttackState::terminated();
    CHECK_THROWS_AS(record_outcome(s, p, kPath, true), PreconditionError);
  }
}

TEST_CASE("random episodes keep monotone position and the failure budget") {
  Rng rng(77);
  for (double rho : {0.3, 0.75, 0.95}) {
    const auto p = make(rho, 4);
    for (int ep = 0; ep < 2000; ++ep) {
      AdversaryStatus s;
      std::size_t last_cursor = 0;
      int failures = 0;
      while (!s.terminated && s.path_cursor < kPath.size()) {
        const bool ok = attempt(p, rng);
        s = record_outcome(s, p, kPath, ok);
        failures += ok ? 0 : 1;
        CHECK(s.path_cursor >= last_cursor);
        last_cursor = s.path_cursor;
        CHECK(s.failures <= p.tau);
        if (!s.terminated && s.path_cursor > 0) CHECK(s.position == AttackState::technique(kPath[s.path_cursor - 1]));
        if (!s.terminated && s.path_cursor == 0) CHECK(s.position == AttackState::initiated());
      }
      // Exactly one of goal or termination.
      CHECK(s.terminated != (s.path_cursor == kPath.size()));
      if (s.terminated) CHECK(failures == p.tau);
    }
  }
}
