#include "acd/agents/actor_critic.hpp"

#include <algorithm>
#include <cmath>

#include "acd/errors.hpp"

namespace acd {

std::vector<double> compute_returns(std::span<const double> rewards, double gamma, double bootstrap_value) {
  std::vector<double> g(rewards.size());
  double next = bootstrap_value;
  for (std::size_t i = rewards.size(); i-- > 0;) {
    next = rewards[i] + gamma * next;
    g[i] = next;
  }
  return g;
}

std::vector<double> advantage(std::span<const double> returns, std::span<const double> values) {
  if (returns.size() != values.size()) throw PreconditionError("returns and values differ in length");
  std::vector<double> a(returns.size());
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = returns[i] - values[i];
  return a;
}

namespace {

Eigen::MatrixXd stack_states(const RolloutBatch& batch, bool next) {
  const auto& first = next ? batch.transitions.front().next_state : batch.transitions.front().state;
  Eigen::MatrixXd m(first.size(), static_cast<Eigen::Index>(batch.size()));
  for (std::size_t i = 0; i < batch.size(); ++i) {
    m.col(static_cast<Eigen::Index>(i)) = next ? batch.transitions[i].next_state : batch.transitions[i].state;
  }
  return m;
}

struct PolicyTerms {
  ForwardCache cache;
  Eigen::MatrixXd log_probs;
  Eigen::VectorXd entropy;
};

PolicyTerms policy_terms(const Mlp& actor, const RolloutBatch& batch) {
  if (actor.head() != Head::kSoftmax) throw PreconditionError("actor needs a softmax head");
  PolicyTerms t;
  actor.forward(stack_states(batch, false), &t.cache);
  t.log_probs = log_softmax(t.cache.logits);
  t.entropy = -(t.cache.output.array() * t.log_probs.array()).colwise().sum().transpose();
  return t;
}

// Adds the entropy-bonus gradient -coef * mean H to `grad` (w.r.t. logits).
void add_entropy_gradient(const PolicyTerms& t, double coef, Eigen::MatrixXd& grad) {
  const double n = static_cast<double>(grad.cols());
  for (Eigen::Index i = 0; i < grad.cols(); ++i) {
    grad.col(i).array() +=
        (coef / n) * t.cache.output.col(i).array() * (t.log_probs.col(i).array() + t.entropy[i]);
  }
}

}  // namespace

void fill_returns(RolloutBatch& batch, const Mlp& critic, double gamma) {
  const std::size_t n = batch.size();
  if (n == 0) throw PreconditionError("empty rollout batch");
  if (batch.episode_end.size() != n) throw PreconditionError("episode_end flags missing");
  const Eigen::MatrixXd v = critic.forward(stack_states(batch, false), nullptr);
  const Eigen::MatrixXd v_next = critic.forward(stack_states(batch, true), nullptr);

  batch.values.assign(n, 0.0);
  batch.returns.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) batch.values[i] = v(0, static_cast<Eigen::Index>(i));

  std::size_t start = 0;
  std::vector<double> rewards;
  for (std::size_t i = 0; i < n; ++i) {
    if (!batch.episode_end[i] && i + 1 < n) continue;
    const Transition& last = batch.transitions[i];
    const double bootstrap = last.terminal ? 0.0 : v_next(0, static_cast<Eigen::Index>(i));
    rewards.clear();
    for (std::size_t j = start; j <= i; ++j) rewards.push_back(batch.transitions[j].reward);
    const auto g = compute_returns(rewards, gamma, bootstrap);
    std::copy(g.begin(), g.end(), batch.returns.begin() + static_cast<std::ptrdiff_t>(start));
    start = i + 1;
  }
  batch.advantages = advantage(batch.returns, batch.values);
}

ValueLoss value_loss(const Mlp& critic, const RolloutBatch& batch) {
  ForwardCache cache;
  const Eigen::MatrixXd v = critic.forward(stack_states(batch, false), &cache);
  const double n = static_cast<double>(batch.size());
  Eigen::MatrixXd grad(1, v.cols());
  ValueLoss out;
  for (Eigen::Index i = 0; i < v.cols(); ++i) {
    const double err = batch.returns[static_cast<std::size_t>(i)] - v(0, i);
    out.loss += err * err / n;
    grad(0, i) = -2.0 * err / n;
  }
  out.grad = critic.backward(cache, grad);
  return out;
}

A2cLosses a2c_losses(const Mlp& actor, const Mlp& critic, const RolloutBatch& batch, const HyperParams& hp) {
  if (batch.advantages.size() != batch.size()) throw PreconditionError("batch has no advantages");
  PolicyTerms t = policy_terms(actor, batch);
  const double n = static_cast<double>(batch.size());

  A2cLosses out;
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(t.cache.logits.rows(), t.cache.logits.cols());
  for (Eigen::Index i = 0; i < grad.cols(); ++i) {
    const auto a = static_cast<Eigen::Index>(batch.transitions[static_cast<std::size_t>(i)].action);
    const double adv = batch.advantages[static_cast<std::size_t>(i)];
    out.policy.loss -= t.log_probs(a, i) * adv / n;
    // d(-log pi(a) * A)/dz = -A * (e_a - p)
    grad.col(i) = (adv / n) * t.cache.output.col(i);
    grad(a, i) -= adv / n;
  }
  out.policy.entropy = t.entropy.mean();
  out.policy.loss -= hp.entropy_coef * out.policy.entropy;
  add_entropy_gradient(t, hp.entropy_coef, grad);
  out.policy.grad = actor.backward_logits(t.cache, grad);
  out.value = value_loss(critic, batch);
  return out;
}

PolicyLoss ppo_loss(const Mlp& actor, const RolloutBatch& batch, const HyperParams& hp) {
  if (batch.old_log_probs.size() != batch.size() || batch.advantages.size() != batch.size()) {
    throw PreconditionError("PPO batch needs old log-probabilities and advantages");
  }
  PolicyTerms t = policy_terms(actor, batch);
  const double n = static_cast<double>(batch.size());
  const double lo = 1.0 - hp.ppo_clip;
  const double hi = 1.0 + hp.ppo_clip;

  PolicyLoss out;
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(t.cache.logits.rows(), t.cache.logits.cols());
  for (Eigen::Index i = 0; i < grad.cols(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    const auto a = static_cast<Eigen::Index>(batch.transitions[k].action);
    const double adv = batch.advantages[k];
    const double ratio = std::exp(t.log_probs(a, i) - batch.old_log_probs[k]);
    const double unclipped = ratio * adv;
    const double clipped = std::clamp(ratio, lo, hi) * adv;
    out.loss -= std::min(unclipped, clipped) / n;
    if (unclipped <= clipped) {
      // d(-r A)/dz = -r A (e_a - p)
      grad.col(i) = (unclipped / n) * t.cache.output.col(i);
      grad(a, i) -= unclipped / n;
    }
  }
  out.entropy = t.entropy.mean();
  out.loss -= hp.entropy_coef * out.entropy;
  add_entropy_gradient(t, hp.entropy_coef, grad);
  out.grad = actor.backward_logits(t.cache, grad);
  return out;
}

namespace {

std::vector<std::size_t> dims_for(std::size_t in, const std::vector<std::size_t>& hidden, std::size_t out) {
  std::vector<std::size_t> dims{in};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(out);
  return dims;
}

}  // namespace

ActorCritic::ActorCritic(std::size_t observation_size, std::size_t action_count, const HyperParams& hp,
                         std::uint64_t seed)
    : ActorCritic(Mlp::init(dims_for(observation_size, hp.hidden, action_count), Head::kSoftmax, derive_seed(seed, 1)),
                  Mlp::init(dims_for(observation_size, hp.hidden, 1), Head::kLinear, derive_seed(seed, 2)), hp) {}

ActorCritic::ActorCritic(Mlp actor, Mlp critic, const HyperParams& hp)
    : hp_(hp), actor_(std::move(actor)), critic_(std::move(critic)) {
  if (actor_.head() != Head::kSoftmax) throw PreconditionError("actor needs a softmax head");
  if (critic_.head() != Head::kLinear || critic_.output_size() != 1) {
    throw PreconditionError("critic needs a scalar linear head");
  }
  actor_opt_ = Optimizer(hp_.optimizer, hp_.alpha, actor_.parameter_count());
  critic_opt_ = Optimizer(hp_.optimizer, hp_.alpha, critic_.parameter_count());
}

std::size_t ActorCritic::sample_action(const Observation& obs, Rng& rng, double* log_prob) const {
  const Eigen::VectorXd p = actor_.forward(obs);
  const double u = rng.uniform();
  double acc = 0.0;
  std::size_t a = static_cast<std::size_t>(p.size()) - 1;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    acc += p[i];
    if (u < acc) {
      a = static_cast<std::size_t>(i);
      break;
    }
  }
  if (log_prob) *log_prob = std::log(p[static_cast<Eigen::Index>(a)]);
  return a;
}

std::size_t ActorCritic::mode(const Observation& obs) const {
  const Eigen::VectorXd p = actor_.forward(obs);
  std::size_t best = 0;
  for (Eigen::Index i = 1; i < p.size(); ++i) {
    if (p[i] > p[static_cast<Eigen::Index>(best)]) best = static_cast<std::size_t>(i);
  }
  return best;
}

double ActorCritic::value(const Observation& obs) const { return critic_.forward(obs)[0]; }

void ActorCritic::apply_gradients(GradientSet actor_grad, GradientSet critic_grad) {
  if (hp_.grad_clip > 0.0) {
    clip_gradient_norm(actor_grad, hp_.grad_clip);
    clip_gradient_norm(critic_grad, hp_.grad_clip);
  }
  actor_opt_.apply(actor_, actor_grad, Direction::kDescend);
  critic_opt_.apply(critic_, critic_grad, Direction::kDescend);
}

void ActorCritic::set_parameters(std::span<const double> actor, std::span<const double> critic) {
  actor_.set_parameters(actor);
  critic_.set_parameters(critic);
}

nlohmann::json ActorCritic::networks_json() const {
  return {{"actor", actor_.to_json()}, {"critic", critic_.to_json()}};
}

}  // namespace acd
