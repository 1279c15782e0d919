#pragma once

#include <cstdint>
#include <functional>
#include <mutex>
#include <vector>

#include "acd/agents/actor_critic.hpp"

namespace acd {

struct ParameterSnapshot {
  std::uint64_t version = 0;
  std::vector<double> actor;
  std::vector<double> critic;
};

// Authoritative actor-critic parameters for asynchronous workers. Every
// submission is applied atomically and bumps the version by one.
class ParameterServer {
 public:
  // Called under the server lock after each applied submission.
  using ApplyObserver = std::function<void(std::uint64_t version, const ActorCritic& model)>;

  explicit ParameterServer(ActorCritic model);

  // Consistent copy of a single version.
  ParameterSnapshot snapshot() const;

  // Applies one gradient submission (computed on any earlier version).
  // Returns the new version. Throws PreconditionError after shutdown().
  std::uint64_t submit(GradientSet actor_grad, GradientSet critic_grad);

  std::uint64_t version() const;
  void shutdown();
  bool is_shut_down() const;

  void set_apply_observer(ApplyObserver observer);

  // Runs `fn` on the model while holding the lock.
  void with_model(const std::function<void(const ActorCritic&)>& fn) const;

 private:
  mutable std::mutex mu_;
  ActorCritic model_;
  std::uint64_t version_ = 0;
  bool shut_down_ = false;
  ApplyObserver observer_;
};

}  // namespace acd
