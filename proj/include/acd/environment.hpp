#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "acd/adversary.hpp"
#include "acd/attack_graph.hpp"
#include "acd/defense_catalog.hpp"
#include "acd/rng.hpp"

namespace acd {

enum class Outcome { kOngoing, kDefenderWin, kAdversaryWin, kTruncated };

std::string to_string(Outcome outcome);

// Probability that the attacker finishes `remaining_steps` more techniques
// before exhausting `budget` further failures, with no defense. Dynamic
// program over (steps, budget).
double compute_p_goal(std::size_t remaining_steps, int budget, double rho);
double compute_p_goal(const AttackPath& path, std::size_t cursor, int budget, double rho);

// Memoized compute_p_goal for a fixed rho.
class GoalProbabilityTable {
 public:
  GoalProbabilityTable(double rho, std::size_t max_steps, int max_budget);

  double operator()(std::size_t remaining_steps, int budget) const;
  double rho() const { return rho_; }

 private:
  double rho_;
  std::size_t max_steps_;
  int max_budget_;
  std::vector<double> table_;  // (steps, budget) row-major
};

struct RewardModel {
  double impact = 10.0;     // I_g
  bool literal_iv = false;  // only the defender-win branch of the win indicator
};

// -p_goal * I_g - I_v * I_g - cost, with I_v = -1 on a defender win and +1 on
// an adversary win (0 for that branch when literal_iv is set).
double reward_of_transition(const RewardModel& model, double p_goal, Outcome outcome, double cost);

using Observation = Eigen::VectorXd;

Observation one_hot(std::size_t size, std::size_t index);

// Noisy alert channel: the true position with probability obs_accuracy,
// otherwise a uniformly chosen different Initiated/technique state.
// Terminated is always reported exactly.
Observation observe(const AttackGraph& graph, const AttackState& true_state,
                    const AdversaryProfile& profile, Rng& rng);

struct StepInfo {
  AttackState true_state = AttackState::initiated();
  AttackState observed_state = AttackState::initiated();
  bool defense_blocked = false;
  bool attack_succeeded = false;
  int interrupted = 0;
  double cost = 0.0;
  double p_goal = 0.0;
  Outcome outcome = Outcome::kOngoing;
};

struct StepOutcome {
  Observation observation;
  double reward = 0.0;
  bool done = false;
  StepInfo info;
};

struct EnvConfig {
  std::shared_ptr<const AttackGraph> graph;
  std::shared_ptr<const DefenseCatalog> catalog;
  AdversaryProfile profile;
  RewardModel reward_model;
  int horizon = 64;
  std::uint64_t seed = 0;
};

// One JSON line per timestep.
using TrajectorySink = std::function<void(const nlohmann::json&)>;

// Single episode simulator over one attack path at a time. Owned by one
// worker; independent instances share only the immutable graph and catalog.
class CyberDefenseEnv {
 public:
  explicit CyberDefenseEnv(EnvConfig config);

  Observation reset(const AttackPath& path);
  StepOutcome step(std::size_t action_id);

  std::size_t observation_size() const { return config_.graph->state_count(); }
  std::size_t action_count() const { return config_.catalog->size(); }

  const EnvConfig& config() const { return config_; }
  const AdversaryStatus& adversary() const { return status_; }
  const AttackPath& path() const { return path_; }
  int timestep() const { return timestep_; }
  bool done() const { return done_; }

  // Goal probability of the current (post-transition) true state.
  double current_p_goal() const;

  void set_trajectory_sink(TrajectorySink sink) { sink_ = std::move(sink); }

 private:
  EnvConfig config_;
  Rng rng_;
  GoalProbabilityTable p_goal_;
  AttackPath path_;
  AdversaryStatus status_;
  int timestep_ = 0;
  bool done_ = true;
  TrajectorySink sink_;
};

}  // namespace acd
