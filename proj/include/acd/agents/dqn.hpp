#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "acd/agents/episodic_env.hpp"
#include "acd/agents/hyperparams.hpp"
#include "acd/agents/replay_buffer.hpp"
#include "acd/mlp.hpp"
#include "acd/rng.hpp"

namespace acd {

// Index of the largest entry; the lowest index wins ties.
std::size_t argmax(const Eigen::VectorXd& values);

// Uniform random action with probability eps, else argmax Q. Draws one
// uniform, plus one more when exploring.
std::size_t act_epsilon_greedy(const Mlp& qnet, const Observation& obs, double eps, Rng& rng);

// Bootstrapped regression target for one transition. With `double_q` the
// online net picks the next action and the target net evaluates it.
double dqn_target(const Mlp& online, const Mlp& target, const Transition& t, double gamma, bool double_q);

class DqnAgent {
 public:
  DqnAgent(std::size_t observation_size, std::size_t action_count, const HyperParams& hp, std::uint64_t seed);
  // Wraps existing networks (tests, checkpoints).
  DqnAgent(Mlp online, Mlp target, const HyperParams& hp);

  std::size_t act(const Observation& obs, double eps, Rng& rng) const {
    return act_epsilon_greedy(online_, obs, eps, rng);
  }
  std::size_t greedy(const Observation& obs) const { return argmax(online_.forward(obs)); }

  // One optimizer step on mean squared TD error over `batch`; the target
  // side is held fixed. Syncs the target net every target_sync updates.
  // Returns the loss before the step.
  double update(const std::vector<const Transition*>& batch);

  const Mlp& online() const { return online_; }
  const Mlp& target() const { return target_; }
  Mlp& mutable_online() { return online_; }
  const HyperParams& hyperparams() const { return hp_; }
  std::uint64_t updates() const { return updates_; }
  void sync_target() { target_ = online_; }

  nlohmann::json networks_json() const;

 private:
  HyperParams hp_;
  Mlp online_;
  Mlp target_;
  Optimizer optimizer_;
  std::uint64_t updates_ = 0;
};

// Samples batch_size transitions and runs DqnAgent::update. Throws
// PreconditionError on an underfull buffer.
double dqn_update(DqnAgent& agent, const ReplayBuffer& buffer, Rng& rng);

}  // namespace acd
