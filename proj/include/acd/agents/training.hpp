#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>

#include <json.hpp>

#include "acd/agents/actor_critic.hpp"
#include "acd/agents/dqn.hpp"
#include "acd/agents/episodic_env.hpp"
#include "acd/agents/hyperparams.hpp"
#include "acd/agents/parameter_server.hpp"

namespace acd {

enum class Algorithm { kDqn, kA2c, kA3c, kPpo };

std::string to_string(Algorithm algorithm);
Algorithm parse_algorithm(const std::string& text);

struct EpisodeRecord {
  double total_return = 0.0;
  int length = 0;
  Outcome outcome = Outcome::kOngoing;
};

// Observation hooks for a training run. Calls are serialized.
class TrainingMonitor {
 public:
  virtual ~TrainingMonitor() = default;
  virtual void on_episode(const EpisodeRecord&) {}
  // After `epoch` (1-based) complete epochs; `checkpoint` is the agent document.
  virtual void on_epoch(int, const nlohmann::json&) {}
  // After each optimizer step of the actor-critic learners. Under A3C these
  // run on worker threads, serialized with each other by the server lock.
  virtual void on_update(std::uint64_t, const ActorCritic&) {}
};

// Builds worker `index`'s environment.
using EnvFactory = std::function<std::unique_ptr<EpisodicEnv>(int index)>;

struct TrainResult {
  nlohmann::json checkpoint;
  std::uint64_t steps = 0;
  std::uint64_t updates = 0;
  std::uint64_t episodes = 0;
};

// Runs hp.epochs * hp.steps_per_epoch environment steps across
// hp.num_workers environments. DQN, A2C and PPO are deterministic per seed;
// A3C is only when run with one worker.
TrainResult train_agent(Algorithm algorithm, const EnvFactory& make_env, const HyperParams& hp,
                        std::uint64_t seed, TrainingMonitor* monitor = nullptr);

TrainResult train_dqn(const EnvFactory& make_env, const HyperParams& hp, std::uint64_t seed,
                      TrainingMonitor* monitor = nullptr);
TrainResult train_a2c(const EnvFactory& make_env, const HyperParams& hp, std::uint64_t seed,
                      TrainingMonitor* monitor = nullptr);
TrainResult train_ppo(const EnvFactory& make_env, const HyperParams& hp, std::uint64_t seed,
                      TrainingMonitor* monitor = nullptr);
TrainResult train_a3c(const EnvFactory& make_env, const HyperParams& hp, std::uint64_t seed,
                      TrainingMonitor* monitor = nullptr);

// Agent checkpoint: algorithm, hyperparameters, training step and networks.
nlohmann::json make_checkpoint(Algorithm algorithm, const HyperParams& hp, std::uint64_t step,
                               const nlohmann::json& networks);

// Deterministic action selection used for evaluation.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::size_t act(const Observation& obs) const = 0;
  virtual std::size_t observation_size() const = 0;
  virtual std::size_t action_count() const = 0;
};

// Greedy Q (DQN) or the actor's mode (A2C/A3C/PPO). Throws ConfigError on a
// malformed document.
std::unique_ptr<Policy> policy_from_checkpoint(const nlohmann::json& checkpoint);

// Policy from a plain function, for scripted baselines.
class FunctionPolicy : public Policy {
 public:
  FunctionPolicy(std::size_t observation_size, std::size_t action_count,
                 std::function<std::size_t(const Observation&)> fn)
      : obs_(observation_size), actions_(action_count), fn_(std::move(fn)) {}
  std::size_t act(const Observation& obs) const override { return fn_(obs); }
  std::size_t observation_size() const override { return obs_; }
  std::size_t action_count() const override { return actions_; }

 private:
  std::size_t obs_;
  std::size_t actions_;
  std::function<std::size_t(const Observation&)> fn_;
};

}  // namespace acd
