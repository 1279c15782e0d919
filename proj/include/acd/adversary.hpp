#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "acd/attack_graph.hpp"
#include "acd/rng.hpp"

namespace acd {

// Fixed stochastic attacker: per-attempt skill rho, failure budget tau, and
// the accuracy with which the defender's alerts locate this attacker.
struct AdversaryProfile {
  std::string name;
  double rho = 0.75;
  int tau = 4;
  double obs_accuracy = 0.85;
  // Failure count at which the attacker gives up. Defaults to tau.
  std::optional<int> terminate_on_failure;

  int failure_limit() const { return terminate_on_failure.value_or(tau); }

  // Throws ConfigError unless 0 < rho <= 1, tau >= 1, 0 < obs_accuracy <= 1.
  void validate() const;

  static AdversaryProfile from_json(const nlohmann::json& doc);
  nlohmann::json to_json() const;
};

// Av1 (naive), Av2, Av3 (most sophisticated).
std::vector<AdversaryProfile> builtin_profiles();
std::optional<AdversaryProfile> find_builtin_profile(const std::string& name);

struct AdversaryStatus {
  AttackState position = AttackState::initiated();
  std::size_t path_cursor = 0;
  int failures = 0;
  bool terminated = false;
};

// Technique the adversary attempts next: path[cursor].
int next_target(const AdversaryStatus& status, const AttackPath& path);

// One Bernoulli(rho) draw; consumes exactly one uniform.
bool attempt(const AdversaryProfile& profile, Rng& rng);

// Advances on success; on failure counts it and terminates once the failure
// limit is reached. Blocked attempts are reported here as failures.
AdversaryStatus record_outcome(AdversaryStatus status, const AdversaryProfile& profile,
                               const AttackPath& path, bool succeeded);

}  // namespace acd
