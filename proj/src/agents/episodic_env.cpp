#include "acd/agents/episodic_env.hpp"

#include "acd/errors.hpp"

namespace acd {

PathPoolEnv::PathPoolEnv(EnvConfig config, std::vector<AttackPath> paths, std::uint64_t path_seed)
    : env_(std::move(config)),
      paths_(std::make_shared<const std::vector<AttackPath>>(std::move(paths))),
      path_rng_(path_seed) {
  if (paths_->empty()) throw ConfigError("path pool is empty");
}

Observation PathPoolEnv::reset() {
  last_info_ = StepInfo{};
  return env_.reset((*paths_)[path_rng_.index(paths_->size())]);
}

EnvStep PathPoolEnv::step(std::size_t action) {
  StepOutcome out = env_.step(action);
  last_info_ = out.info;
  EnvStep s;
  s.observation = std::move(out.observation);
  s.reward = out.reward;
  s.done = out.done;
  s.outcome = out.info.outcome;
  s.terminal = s.outcome == Outcome::kDefenderWin || s.outcome == Outcome::kAdversaryWin;
  return s;
}

}  // namespace acd
