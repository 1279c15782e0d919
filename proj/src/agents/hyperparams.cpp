#include "acd/agents/hyperparams.hpp"

#include <cmath>

#include "acd/errors.hpp"

namespace acd {

void HyperParams::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("hyperparams: ") + what);
  };
  require(gamma >= 0.0 && gamma < 1.0, "gamma must lie in [0, 1)");
  require(alpha > 0.0, "alpha must be positive");
  require(entropy_coef >= 0.0, "entropy_coef must be non-negative");
  require(eps_final >= 0.0 && eps_final <= eps_initial && eps_initial <= 1.0,
          "need 0 <= eps_final <= eps_initial <= 1");
  require(eps_decay_steps > 0, "eps_decay_steps must be positive");
  require(num_workers > 0, "num_workers must be positive");
  require(rollout_fragment > 0, "rollout_fragment must be positive");
  require(batch_size > 0, "batch_size must be positive");
  require(ppo_clip > 0.0 && ppo_clip < 1.0, "ppo_clip must lie in (0, 1)");
  require(epochs > 0 && steps_per_epoch > 0, "epochs and steps_per_epoch must be positive");
  require(replay_capacity >= static_cast<std::size_t>(batch_size), "replay_capacity must hold a batch");
  require(target_sync > 0, "target_sync must be positive");
  require(ppo_epochs > 0, "ppo_epochs must be positive");
  require(!hidden.empty(), "need at least one hidden layer");
  for (auto h : hidden) require(h > 0, "hidden layers must be non-empty");
}

HyperParams HyperParams::from_json(const nlohmann::json& doc, HyperParams base) {
  HyperParams hp = std::move(base);
  try {
    hp.gamma = doc.value("gamma", hp.gamma);
    hp.alpha = doc.value("alpha", hp.alpha);
    hp.entropy_coef = doc.value("entropy_coef", hp.entropy_coef);
    hp.eps_initial = doc.value("eps_initial", hp.eps_initial);
    hp.eps_final = doc.value("eps_final", hp.eps_final);
    hp.eps_decay_steps = doc.value("eps_decay_steps", hp.eps_decay_steps);
    hp.num_workers = doc.value("num_workers", hp.num_workers);
    hp.rollout_fragment = doc.value("rollout_fragment", hp.rollout_fragment);
    hp.batch_size = doc.value("batch_size", hp.batch_size);
    hp.ppo_clip = doc.value("ppo_clip", hp.ppo_clip);
    hp.epochs = doc.value("epochs", hp.epochs);
    hp.steps_per_epoch = doc.value("steps_per_epoch", hp.steps_per_epoch);
    hp.replay_capacity = doc.value("replay_capacity", hp.replay_capacity);
    hp.target_sync = doc.value("target_sync", hp.target_sync);
    hp.double_dqn = doc.value("double_dqn", hp.double_dqn);
    hp.ppo_epochs = doc.value("ppo_epochs", hp.ppo_epochs);
    hp.grad_clip = doc.value("grad_clip", hp.grad_clip);
    if (doc.contains("optimizer")) hp.optimizer = parse_optimizer_kind(doc.at("optimizer").get<std::string>());
    hp.hidden = doc.value("hidden", hp.hidden);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("hyperparams: ") + e.what());
  }
  hp.validate();
  return hp;
}

nlohmann::json HyperParams::to_json() const {
  return {{"gamma", gamma},
          {"alpha", alpha},
          {"entropy_coef", entropy_coef},
          {"eps_initial", eps_initial},
          {"eps_final", eps_final},
          {"eps_decay_steps", eps_decay_steps},
          {"num_workers", num_workers},
          {"rollout_fragment", rollout_fragment},
          {"batch_size", batch_size},
          {"ppo_clip", ppo_clip},
          {"epochs", epochs},
          {"steps_per_epoch", steps_per_epoch},
          {"replay_capacity", replay_capacity},
          {"target_sync", target_sync},
          {"double_dqn", double_dqn},
          {"ppo_epochs", ppo_epochs},
          {"grad_clip", grad_clip},
          {"optimizer", to_string(optimizer)},
          {"hidden", hidden}};
}

double epsilon(std::uint64_t step, const HyperParams& hp) {
  if (step >= hp.eps_decay_steps) return hp.eps_final;
  const double frac = static_cast<double>(step) / static_cast<double>(hp.eps_decay_steps);
  return hp.eps_initial + frac * (hp.eps_final - hp.eps_initial);
}

}  // namespace acd
