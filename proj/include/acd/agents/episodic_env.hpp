#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "acd/environment.hpp"
#include "acd/rng.hpp"

namespace acd {

struct EnvStep {
  Observation observation;
  double reward = 0.0;
  bool done = false;      // episode over
  bool terminal = false;  // no bootstrapping past this step (false on truncation)
  Outcome outcome = Outcome::kOngoing;
};

// What the learners see: an episodic environment that picks its own episode
// setup on reset.
class EpisodicEnv {
 public:
  virtual ~EpisodicEnv() = default;
  virtual std::size_t observation_size() const = 0;
  virtual std::size_t action_count() const = 0;
  virtual Observation reset() = 0;
  virtual EnvStep step(std::size_t action) = 0;
};

// CyberDefenseEnv with a uniformly sampled attack path per episode.
class PathPoolEnv : public EpisodicEnv {
 public:
  PathPoolEnv(EnvConfig config, std::vector<AttackPath> paths, std::uint64_t path_seed);

  std::size_t observation_size() const override { return env_.observation_size(); }
  std::size_t action_count() const override { return env_.action_count(); }
  Observation reset() override;
  EnvStep step(std::size_t action) override;

  CyberDefenseEnv& inner() { return env_; }
  const StepInfo& last_info() const { return last_info_; }

 private:
  CyberDefenseEnv env_;
  std::shared_ptr<const std::vector<AttackPath>> paths_;
  Rng path_rng_;
  StepInfo last_info_;
};

// One stored experience. Observations are one-hot.
struct Transition {
  Observation state;
  std::size_t action = 0;
  double reward = 0.0;
  Observation next_state;
  bool terminal = false;
};

}  // namespace acd
