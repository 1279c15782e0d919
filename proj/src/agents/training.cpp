#include "acd/agents/training.hpp"

#include <exception>
#include <mutex>
#include <thread>

#include "acd/errors.hpp"

namespace acd {

std::string to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kDqn:
      return "dqn";
    case Algorithm::kA2c:
      return "a2c";
    case Algorithm::kA3c:
      return "a3c";
    case Algorithm::kPpo:
      return "ppo";
  }
  return "dqn";
}

Algorithm parse_algorithm(const std::string& text) {
  if (text == "dqn") return Algorithm::kDqn;
  if (text == "a2c") return Algorithm::kA2c;
  if (text == "a3c") return Algorithm::kA3c;
  if (text == "ppo") return Algorithm::kPpo;
  throw ConfigError("unknown algorithm '" + text + "' (expected dqn, a2c, a3c or ppo)");
}

nlohmann::json make_checkpoint(Algorithm algorithm, const HyperParams& hp, std::uint64_t step,
                               const nlohmann::json& networks) {
  return {{"algorithm", to_string(algorithm)}, {"hyperparams", hp.to_json()}, {"step", step}, {"networks", networks}};
}

namespace {

// Per-worker environment plus the episode in progress.
struct Worker {
  std::unique_ptr<EpisodicEnv> env;
  Rng rng;
  Observation obs;
  double episode_return = 0.0;
  int episode_length = 0;
};

std::vector<Worker> make_workers(const EnvFactory& make_env, const HyperParams& hp, std::uint64_t seed) {
  std::vector<Worker> workers;
  for (int w = 0; w < hp.num_workers; ++w) {
    Worker wk{make_env(w), Rng(derive_seed(seed, 100 + static_cast<std::uint64_t>(w))), {}, 0.0, 0};
    if (!wk.env) throw PreconditionError("environment factory returned null");
    wk.obs = wk.env->reset();
    workers.push_back(std::move(wk));
  }
  return workers;
}

// Shared step budget with epoch bookkeeping.
struct Budget {
  std::uint64_t total = 0;
  std::uint64_t per_epoch = 1;
  std::uint64_t steps = 0;

  bool exhausted() const { return steps >= total; }
  // Counts one step; returns the epoch just completed, or 0.
  int tick() {
    ++steps;
    return steps % per_epoch == 0 ? static_cast<int>(steps / per_epoch) : 0;
  }
};

Budget make_budget(const HyperParams& hp) {
  return {hp.total_steps(), static_cast<std::uint64_t>(hp.steps_per_epoch), 0};
}

// Advances one worker by one step and returns the transition. Completed
// episodes are reported and the environment reset.
Transition advance(Worker& w, std::size_t action, TrainingMonitor* monitor, std::uint64_t* episodes,
                   bool* episode_end) {
  EnvStep s = w.env->step(action);
  Transition t{w.obs, action, s.reward, s.observation, s.terminal};
  w.episode_return += s.reward;
  ++w.episode_length;
  *episode_end = s.done;
  if (s.done) {
    if (monitor) monitor->on_episode({w.episode_return, w.episode_length, s.outcome});
    ++*episodes;
    w.episode_return = 0.0;
    w.episode_length = 0;
    w.obs = w.env->reset();
  } else {
    w.obs = std::move(s.observation);
  }
  return t;
}

std::pair<std::size_t, std::size_t> shape_of(const std::vector<Worker>& workers) {
  return {workers.front().env->observation_size(), workers.front().env->action_count()};
}

// Appends one fragment from `w` sampled from the model's policy. The last
// transition always closes a segment so fragments never share returns.
void collect_fragment(Worker& w, const ActorCritic& model, const HyperParams& hp, Budget& budget,
                      RolloutBatch& batch, TrainingMonitor* monitor, std::uint64_t* episodes,
                      const std::function<void(int)>& on_epoch) {
  const std::size_t begin = batch.size();
  for (int k = 0; k < hp.rollout_fragment && !budget.exhausted(); ++k) {
    const std::size_t a = model.sample_action(w.obs, w.rng);
    bool end = false;
    batch.transitions.push_back(advance(w, a, monitor, episodes, &end));
    batch.episode_end.push_back(end);
    if (const int epoch = budget.tick()) on_epoch(epoch);
  }
  if (batch.size() > begin) batch.episode_end.back() = true;
}

void fill_old_log_probs(RolloutBatch& batch, const Mlp& actor) {
  Eigen::MatrixXd states(static_cast<Eigen::Index>(actor.input_size()), static_cast<Eigen::Index>(batch.size()));
  for (std::size_t i = 0; i < batch.size(); ++i) states.col(static_cast<Eigen::Index>(i)) = batch.transitions[i].state;
  ForwardCache cache;
  actor.forward(states, &cache);
  const Eigen::MatrixXd logp = log_softmax(cache.logits);
  batch.old_log_probs.resize(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    batch.old_log_probs[i] = logp(static_cast<Eigen::Index>(batch.transitions[i].action), static_cast<Eigen::Index>(i));
  }
}

void check_hyperparams(const HyperParams& hp) {
  hp.validate();
  if (hp.num_workers < 1) throw ConfigError("num_workers must be at least 1");
}

TrainResult train_synchronous_ac(Algorithm algorithm, const EnvFactory& make_env, const HyperParams& hp,
                                 std::uint64_t seed, TrainingMonitor* monitor) {
  check_hyperparams(hp);
  auto workers = make_workers(make_env, hp, seed);
  const auto [obs_size, actions] = shape_of(workers);
  ActorCritic model(obs_size, actions, hp, derive_seed(seed, 1));
  Budget budget = make_budget(hp);
  TrainResult result;

  auto on_epoch = [&](int epoch) {
    if (monitor) monitor->on_epoch(epoch, make_checkpoint(algorithm, hp, budget.steps, model.networks_json()));
  };

  while (!budget.exhausted()) {
    RolloutBatch batch;
    for (auto& w : workers) collect_fragment(w, model, hp, budget, batch, monitor, &result.episodes, on_epoch);
    if (batch.size() == 0) break;
    fill_returns(batch, model.critic(), hp.gamma);
    if (algorithm == Algorithm::kPpo) {
      fill_old_log_probs(batch, model.actor());
      for (int e = 0; e < hp.ppo_epochs; ++e) {
        PolicyLoss pl = ppo_loss(model.actor(), batch, hp);
        ValueLoss vl = value_loss(model.critic(), batch);
        model.apply_gradients(std::move(pl.grad), std::move(vl.grad));
        ++result.updates;
        if (monitor) monitor->on_update(result.updates, model);
      }
    } else {
      A2cLosses l = a2c_losses(model.actor(), model.critic(), batch, hp);
      model.apply_gradients(std::move(l.policy.grad), std::move(l.value.grad));
      ++result.updates;
      if (monitor) monitor->on_update(result.updates, model);
    }
  }
  result.steps = budget.steps;
  result.checkpoint = make_checkpoint(algorithm, hp, budget.steps, model.networks_json());
  return result;
}

}  // namespace

TrainResult train_dqn(const EnvFactory& make_env, const HyperParams& hp, std::uint64_t seed,
                      TrainingMonitor* monitor) {
  check_hyperparams(hp);
  auto workers = make_workers(make_env, hp, seed);
  const auto [obs_size, actions] = shape_of(workers);
  DqnAgent agent(obs_size, actions, hp, derive_seed(seed, 1));
  ReplayBuffer buffer(hp.replay_capacity);
  Rng sample_rng(derive_seed(seed, 3));
  Budget budget = make_budget(hp);
  TrainResult result;

  while (!budget.exhausted()) {
    for (auto& w : workers) {
      for (int k = 0; k < hp.rollout_fragment && !budget.exhausted(); ++k) {
        const std::size_t a = agent.act(w.obs, epsilon(budget.steps, hp), w.rng);
        bool end = false;
        buffer.push(advance(w, a, monitor, &result.episodes, &end));
        if (const int epoch = budget.tick(); epoch && monitor) {
          monitor->on_epoch(epoch, make_checkpoint(Algorithm::kDqn, hp, budget.steps, agent.networks_json()));
        }
      }
      if (buffer.size() >= static_cast<std::size_t>(hp.batch_size)) {
        dqn_update(agent, buffer, sample_rng);
        ++result.updates;
      }
    }
  }
  result.steps = budget.steps;
  result.checkpoint = make_checkpoint(Algorithm::kDqn, hp, budget.steps, agent.networks_json());
  return result;
}

TrainResult train_a2c(const EnvFactory& make_env, const HyperParams& hp, std::uint64_t seed,
                      TrainingMonitor* monitor) {
  return train_synchronous_ac(Algorithm::kA2c, make_env, hp, seed, monitor);
}

TrainResult train_ppo(const EnvFactory& make_env, const HyperParams& hp, std::uint64_t seed,
                      TrainingMonitor* monitor) {
  return train_synchronous_ac(Algorithm::kPpo, make_env, hp, seed, monitor);
}

TrainResult train_a3c(const EnvFactory& make_env, const HyperParams& hp, std::uint64_t seed,
                      TrainingMonitor* monitor) {
  check_hyperparams(hp);
  auto workers = make_workers(make_env, hp, seed);
  const auto [obs_size, actions] = shape_of(workers);
  ParameterServer server(ActorCritic(obs_size, actions, hp, derive_seed(seed, 1)));
  if (monitor) {
    server.set_apply_observer([monitor](std::uint64_t v, const ActorCritic& m) { monitor->on_update(v, m); });
  }

  // Guards the step budget, episode counts and the monitor's episode/epoch hooks.
  std::mutex mu;
  Budget budget = make_budget(hp);
  TrainResult result;
  std::exception_ptr failure;

  // Epoch checkpoints copy the server's current parameters.
  const ActorCritic shape_model(obs_size, actions, hp, derive_seed(seed, 1));
  auto on_epoch = [&](int epoch) {
    if (!monitor) return;
    const ParameterSnapshot snap = server.snapshot();
    ActorCritic copy = shape_model;
    copy.set_parameters(snap.actor, snap.critic);
    monitor->on_epoch(epoch, make_checkpoint(Algorithm::kA3c, hp, budget.steps, copy.networks_json()));
  };

  auto run_worker = [&](Worker& w) {
    try {
      ActorCritic local = shape_model;
      while (true) {
        const ParameterSnapshot snap = server.snapshot();
        local.set_parameters(snap.actor, snap.critic);
        RolloutBatch batch;
        for (int k = 0; k < hp.rollout_fragment; ++k) {
          std::lock_guard lock(mu);
          if (budget.exhausted() || failure) break;
          const std::size_t a = local.sample_action(w.obs, w.rng);
          bool end = false;
          batch.transitions.push_back(advance(w, a, monitor, &result.episodes, &end));
          batch.episode_end.push_back(end);
          if (const int epoch = budget.tick()) on_epoch(epoch);
        }
        if (batch.size() == 0) break;
        batch.episode_end.back() = true;
        fill_returns(batch, local.critic(), hp.gamma);
        A2cLosses l = a2c_losses(local.actor(), local.critic(), batch, hp);
        server.submit(std::move(l.policy.grad), std::move(l.value.grad));
      }
    } catch (...) {
      std::lock_guard lock(mu);
      if (!failure) failure = std::current_exception();
      server.shutdown();
    }
  };

  if (workers.size() == 1) {
    run_worker(workers.front());
  } else {
    std::vector<std::thread> threads;
    for (auto& w : workers) threads.emplace_back(run_worker, std::ref(w));
    for (auto& t : threads) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  result.steps = budget.steps;
  result.updates = server.version();
  server.with_model([&](const ActorCritic& m) {
    result.checkpoint = make_checkpoint(Algorithm::kA3c, hp, budget.steps, m.networks_json());
  });
  return result;
}

TrainResult train_agent(Algorithm algorithm, const EnvFactory& make_env, const HyperParams& hp,
                        std::uint64_t seed, TrainingMonitor* monitor) {
  switch (algorithm) {
    case Algorithm::kDqn:
      return train_dqn(make_env, hp, seed, monitor);
    case Algorithm::kA2c:
      return train_a2c(make_env, hp, seed, monitor);
    case Algorithm::kA3c:
      return train_a3c(make_env, hp, seed, monitor);
    case Algorithm::kPpo:
      return train_ppo(make_env, hp, seed, monitor);
  }
  throw PreconditionError("unknown algorithm");
}

namespace {

class GreedyQPolicy : public Policy {
 public:
  explicit GreedyQPolicy(Mlp net) : net_(std::move(net)) {}
  std::size_t act(const Observation& obs) const override { return argmax(net_.forward(obs)); }
  std::size_t observation_size() const override { return net_.input_size(); }
  std::size_t action_count() const override { return net_.output_size(); }

 private:
  Mlp net_;
};

class ModePolicy : public Policy {
 public:
  explicit ModePolicy(Mlp actor) : actor_(std::move(actor)) {}
  std::size_t act(const Observation& obs) const override { return argmax(actor_.forward(obs)); }
  std::size_t observation_size() const override { return actor_.input_size(); }
  std::size_t action_count() const override { return actor_.output_size(); }

 private:
  Mlp actor_;
};

}  // namespace

std::unique_ptr<Policy> policy_from_checkpoint(const nlohmann::json& checkpoint) {
  try {
    const Algorithm algorithm = parse_algorithm(checkpoint.at("algorithm").get<std::string>());
    const auto& nets = checkpoint.at("networks");
    if (algorithm == Algorithm::kDqn) return std::make_unique<GreedyQPolicy>(Mlp::from_json(nets.at("online")));
    Mlp actor = Mlp::from_json(nets.at("actor"));
    if (actor.head() != Head::kSoftmax) throw ConfigError("checkpoint actor must have a softmax head");
    return std::make_unique<ModePolicy>(std::move(actor));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("checkpoint: ") + e.what());
  }
}

}  // namespace acd
