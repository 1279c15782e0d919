#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "acd/mlp.hpp"

namespace acd {

// Training hyperparameters. The first block is the full-scale training setup;
// the second block holds implementation choices.
struct HyperParams {
  double gamma = 0.8;
  double alpha = 0.005;
  double entropy_coef = 0.05;
  double eps_initial = 1.0;
  double eps_final = 0.04;
  std::uint64_t eps_decay_steps = 300000;
  int num_workers = 4;
  int rollout_fragment = 12;
  int batch_size = 48;
  double ppo_clip = 0.4;
  int epochs = 100;
  int steps_per_epoch = 25000;

  std::size_t replay_capacity = 50000;
  int target_sync = 500;  // DQN updates between target-network copies
  bool double_dqn = true;
  int ppo_epochs = 3;
  double grad_clip = 40.0;  // L2 norm per network; <= 0 disables
  OptimizerKind optimizer = OptimizerKind::kAdam;
  std::vector<std::size_t> hidden = {256, 256};

  std::uint64_t total_steps() const {
    return static_cast<std::uint64_t>(epochs) * static_cast<std::uint64_t>(steps_per_epoch);
  }

  // Throws ConfigError when a field is out of range.
  void validate() const;

  // Missing keys keep their defaults.
  static HyperParams from_json(const nlohmann::json& doc, HyperParams base);
  static HyperParams from_json(const nlohmann::json& doc) { return from_json(doc, HyperParams()); }
  nlohmann::json to_json() const;
};

// Linear decay from eps_initial at step 0 to eps_final at eps_decay_steps,
// constant afterwards.
double epsilon(std::uint64_t step, const HyperParams& hp);

}  // namespace acd
