#include "acd/environment.hpp"

#include <algorithm>

#include "acd/errors.hpp"

namespace acd {

std::string to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::kOngoing:
      return "ongoing";
    case Outcome::kDefenderWin:
      return "defender_win";
    case Outcome::kAdversaryWin:
      return "adversary_win";
    case Outcome::kTruncated:
      return "truncated";
  }
  return "ongoing";
}

double compute_p_goal(std::size_t remaining_steps, int budget, double rho) {
  if (budget < 0) throw PreconditionError("failure budget must be non-negative");
  if (remaining_steps == 0) return 1.0;
  if (budget == 0) return 0.0;
  // row[b] holds P(s - 1, b) while computing P(s, b) in place.
  std::vector<double> row(static_cast<std::size_t>(budget) + 1, 1.0);
  for (std::size_t s = 1; s <= remaining_steps; ++s) {
    row[0] = 0.0;
    for (int b = 1; b <= budget; ++b) row[b] = rho * row[b] + (1.0 - rho) * row[b - 1];
  }
  return row[static_cast<std::size_t>(budget)];
}

double compute_p_goal(const AttackPath& path, std::size_t cursor, int budget, double rho) {
  if (cursor > path.size()) throw PreconditionError("path cursor past the end of the path");
  return compute_p_goal(path.size() - cursor, budget, rho);
}

GoalProbabilityTable::GoalProbabilityTable(double rho, std::size_t max_steps, int max_budget)
    : rho_(rho), max_steps_(max_steps), max_budget_(max_budget),
      table_((max_steps + 1) * (static_cast<std::size_t>(max_budget) + 1)) {
  const auto width = static_cast<std::size_t>(max_budget) + 1;
  for (std::size_t s = 0; s <= max_steps; ++s) {
    for (int b = 0; b <= max_budget; ++b) {
      double p;
      if (s == 0) {
        p = 1.0;
      } else if (b == 0) {
        p = 0.0;
      } else {
        p = rho * table_[(s - 1) * width + b] + (1.0 - rho) * table_[s * width + b - 1];
      }
      table_[s * width + static_cast<std::size_t>(b)] = p;
    }
  }
}

double GoalProbabilityTable::operator()(std::size_t remaining_steps, int budget) const {
  if (remaining_steps > max_steps_ || budget < 0 || budget > max_budget_) {
    return compute_p_goal(remaining_steps, budget, rho_);
  }
  return table_[remaining_steps * (static_cast<std::size_t>(max_budget_) + 1) +
                static_cast<std::size_t>(budget)];
}

double reward_of_transition(const RewardModel& model, double p_goal, Outcome outcome, double cost) {
  double win_indicator = 0.0;
  if (outcome == Outcome::kDefenderWin) {
    win_indicator = -1.0;
  } else if (outcome == Outcome::kAdversaryWin && !model.literal_iv) {
    win_indicator = 1.0;
  }
  return -p_goal * model.impact - win_indicator * model.impact - cost;
}

Observation one_hot(std::size_t size, std::size_t index) {
  Observation v = Observation::Zero(static_cast<Eigen::Index>(size));
  v[static_cast<Eigen::Index>(index)] = 1.0;
  return v;
}

namespace {

AttackState noisy_state(const AttackGraph& graph, const AttackState& true_state,
                        const AdversaryProfile& profile, Rng& rng) {
  if (true_state.is_terminated()) return true_state;
  if (rng.uniform() < profile.obs_accuracy) return true_state;
  // Decoys: Initiated and every technique except the true one.
  const std::size_t decoys = graph.state_count() - 2;
  std::size_t pick = rng.index(decoys);
  if (pick >= graph.state_index(true_state)) ++pick;
  return graph.state_at(pick);
}

}  // namespace

Observation observe(const AttackGraph& graph, const AttackState& true_state,
                    const AdversaryProfile& profile, Rng& rng) {
  return one_hot(graph.state_count(), graph.state_index(noisy_state(graph, true_state, profile, rng)));
}

CyberDefenseEnv::CyberDefenseEnv(EnvConfig config)
    : config_(std::move(config)),
      rng_(config_.seed),
      p_goal_(config_.profile.rho, config_.graph ? config_.graph->techniques().size() : 0,
              config_.profile.failure_limit()) {
  if (!config_.graph || !config_.catalog) throw PreconditionError("environment needs a graph and a catalog");
  if (config_.horizon < 1) throw ConfigError("horizon must be positive");
  config_.profile.validate();
}

Observation CyberDefenseEnv::reset(const AttackPath& path) {
  if (!config_.graph->contains(path)) throw PreconditionError("path does not belong to the loaded graph");
  if (path.size() > static_cast<std::size_t>(config_.horizon)) {
    throw ConfigError("horizon shorter than the attack path");
  }
  path_ = path;
  status_ = AdversaryStatus{};
  timestep_ = 0;
  done_ = false;
  return one_hot(observation_size(), 0);
}

double CyberDefenseEnv::current_p_goal() const {
  if (status_.terminated) return 0.0;
  if (status_.path_cursor >= path_.size()) return 1.0;
  return p_goal_(path_.size() - status_.path_cursor, config_.profile.failure_limit() - status_.failures);
}

StepOutcome CyberDefenseEnv::step(std::size_t action_id) {
  if (done_) throw PreconditionError("step() called on a finished episode");
  const AttackGraph& graph = *config_.graph;
  const DefenseCatalog& catalog = *config_.catalog;
  const DefenseAction& action = catalog.action(action_id);

  StepOutcome out;
  StepInfo& info = out.info;
  const int target = next_target(status_, path_);
  const int depth = graph.tactic_depth(status_.position);

  info.defense_blocked = rng_.uniform() < block_probability(catalog, action, target);
  info.attack_succeeded = !info.defense_blocked && attempt(config_.profile, rng_);
  status_ = record_outcome(status_, config_.profile, path_, info.attack_succeeded);
  ++timestep_;

  info.interrupted = sample_interruptions(catalog, action, depth, rng_);
  info.cost = action_cost(catalog, action, info.interrupted);

  if (status_.terminated) {
    info.outcome = Outcome::kDefenderWin;
  } else if (status_.path_cursor == path_.size()) {
    info.outcome = Outcome::kAdversaryWin;
  } else if (timestep_ >= config_.horizon) {
    info.outcome = Outcome::kTruncated;
  }

  info.p_goal = current_p_goal();
  out.reward = reward_of_transition(config_.reward_model, info.p_goal, info.outcome, info.cost);

  info.true_state = status_.position;
  info.observed_state = noisy_state(graph, status_.position, config_.profile, rng_);
  out.observation = one_hot(graph.state_count(), graph.state_index(info.observed_state));
  out.done = info.outcome != Outcome::kOngoing;
  done_ = out.done;

  if (sink_) {
    sink_({{"timestep", timestep_},
           {"action", action_id},
           {"blocked", info.defense_blocked},
           {"attack_succeeded", info.attack_succeeded},
           {"true_state", info.true_state.to_string()},
           {"observed_state", info.observed_state.to_string()},
           {"interrupted", info.interrupted},
           {"reward", out.reward},
           {"outcome", to_string(info.outcome)}});
  }
  return out;
}

}  // namespace acd
