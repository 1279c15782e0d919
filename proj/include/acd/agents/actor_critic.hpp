#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "acd/agents/episodic_env.hpp"
#include "acd/agents/hyperparams.hpp"
#include "acd/mlp.hpp"
#include "acd/rng.hpp"

namespace acd {

// Ordered on-policy experience plus everything the losses need.
struct RolloutBatch {
  std::vector<Transition> transitions;
  std::vector<bool> episode_end;        // episode finished at this step (terminal or truncated)
  std::vector<double> returns;          // G
  std::vector<double> values;           // V(s_t) from the critic at rollout time
  std::vector<double> advantages;       // G - V
  std::vector<double> old_log_probs;    // log pi_old(a_t | s_t)

  std::size_t size() const { return transitions.size(); }
};

// G_t = r_t + gamma * G_{t+1}, seeded with `bootstrap_value` after the last
// reward (pass 0 for a terminal end).
std::vector<double> compute_returns(std::span<const double> rewards, double gamma, double bootstrap_value);

// Elementwise G - V.
std::vector<double> advantage(std::span<const double> returns, std::span<const double> values);

// Fills returns, values and advantages of `batch`, splitting at episode ends.
// Terminal ends bootstrap with 0, truncations and the fragment tail with the
// critic's value of the next state.
void fill_returns(RolloutBatch& batch, const Mlp& critic, double gamma);

struct PolicyLoss {
  double loss = 0.0;
  double entropy = 0.0;  // mean policy entropy over the batch
  GradientSet grad;      // d loss / d actor parameters
};

struct ValueLoss {
  double loss = 0.0;
  GradientSet grad;
};

struct A2cLosses {
  PolicyLoss policy;
  ValueLoss value;
};

// policy: -mean(log pi(a|s) * A) - entropy_coef * mean H(pi(.|s)), A held
// fixed; value: mean (G - V)^2.
A2cLosses a2c_losses(const Mlp& actor, const Mlp& critic, const RolloutBatch& batch, const HyperParams& hp);

// Clipped surrogate: -mean(min(r A, clip(r, 1-e, 1+e) A)) - entropy_coef * H
// with r = exp(log pi - log pi_old).
PolicyLoss ppo_loss(const Mlp& actor, const RolloutBatch& batch, const HyperParams& hp);

ValueLoss value_loss(const Mlp& critic, const RolloutBatch& batch);

// Separate actor (softmax head) and critic (scalar linear head) networks
// with their own optimizers.
class ActorCritic {
 public:
  ActorCritic(std::size_t observation_size, std::size_t action_count, const HyperParams& hp, std::uint64_t seed);
  ActorCritic(Mlp actor, Mlp critic, const HyperParams& hp);

  // Samples from pi(.|obs) with one uniform draw. Optionally reports log pi.
  std::size_t sample_action(const Observation& obs, Rng& rng, double* log_prob = nullptr) const;
  // Most probable action; lowest index wins ties.
  std::size_t mode(const Observation& obs) const;
  double value(const Observation& obs) const;

  // Clips each gradient to hp.grad_clip and takes one descent step per net.
  void apply_gradients(GradientSet actor_grad, GradientSet critic_grad);

  const Mlp& actor() const { return actor_; }
  const Mlp& critic() const { return critic_; }
  void set_parameters(std::span<const double> actor, std::span<const double> critic);
  const HyperParams& hyperparams() const { return hp_; }

  nlohmann::json networks_json() const;

 private:
  HyperParams hp_;
  Mlp actor_;
  Mlp critic_;
  Optimizer actor_opt_;
  Optimizer critic_opt_;
};

}  // namespace acd
