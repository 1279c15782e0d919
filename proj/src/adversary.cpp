#include "acd/adversary.hpp"

#include "acd/errors.hpp"

namespace acd {

void AdversaryProfile::validate() const {
  if (!(rho > 0.0 && rho <= 1.0)) throw ConfigError("profile " + name + ": rho must lie in (0, 1]");
  if (tau < 1) throw ConfigError("profile " + name + ": tau must be at least 1");
  if (!(obs_accuracy > 0.0 && obs_accuracy <= 1.0)) {
    throw ConfigError("profile " + name + ": obs_accuracy must lie in (0, 1]");
  }
  if (failure_limit() < 1) throw ConfigError("profile " + name + ": terminate_on_failure must be at least 1");
}

AdversaryProfile AdversaryProfile::from_json(const nlohmann::json& doc) {
  AdversaryProfile p;
  try {
    p.name = doc.at("name").get<std::string>();
    p.rho = doc.at("rho").get<double>();
    p.tau = doc.at("tau").get<int>();
    p.obs_accuracy = doc.at("obs_accuracy").get<double>();
    if (doc.contains("terminate_on_failure")) p.terminate_on_failure = doc.at("terminate_on_failure").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("profile: ") + e.what());
  }
  p.validate();
  return p;
}

nlohmann::json AdversaryProfile::to_json() const {
  nlohmann::json doc = {{"name", name}, {"rho", rho}, {"tau", tau}, {"obs_accuracy", obs_accuracy}};
  if (terminate_on_failure) doc["terminate_on_failure"] = *terminate_on_failure;
  return doc;
}

std::vector<AdversaryProfile> builtin_profiles() {
  return {
      {"Av1", 0.75, 4, 0.85, std::nullopt},
      {"Av2", 0.85, 5, 0.75, std::nullopt},
      {"Av3", 0.95, 7, 0.65, std::nullopt},
  };
}

std::optional<AdversaryProfile> find_builtin_profile(const std::string& name) {
  for (auto& p : builtin_profiles()) {
    if (p.name == name) return p;
  }
  return std::nullopt;
}

int next_target(const AdversaryStatus& status, const AttackPath& path) {
  if (status.terminated) throw PreconditionError("adversary already terminated");
  if (status.path_cursor >= path.size()) throw PreconditionError("adversary already reached the end of its path");
  return path[status.path_cursor];
}

bool attempt(const AdversaryProfile& profile, Rng& rng) { return rng.uniform() < profile.rho; }

AdversaryStatus record_outcome(AdversaryStatus status, const AdversaryProfile& profile,
                               const AttackPath& path, bool succeeded) {
  const int target = next_target(status, path);
  if (succeeded) {
    status.position = AttackState::technique(target);
    ++status.path_cursor;
    return status;
  }
  ++status.failures;
  if (status.failures >= profile.failure_limit()) {
    status.terminated = true;
    status.position = AttackState::terminated();
  }
  return status;
}

}  // namespace acd
