#include "acd/agents/dqn.hpp"

#include <cmath>

#include "acd/errors.hpp"

namespace acd {

namespace {

std::vector<std::size_t> net_dims(std::size_t in, const std::vector<std::size_t>& hidden, std::size_t out) {
  std::vector<std::size_t> dims{in};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(out);
  return dims;
}

}  // namespace

std::size_t argmax(const Eigen::VectorXd& values) {
  std::size_t best = 0;
  for (Eigen::Index i = 1; i < values.size(); ++i) {
    if (values[i] > values[static_cast<Eigen::Index>(best)]) best = static_cast<std::size_t>(i);
  }
  return best;
}

std::size_t act_epsilon_greedy(const Mlp& qnet, const Observation& obs, double eps, Rng& rng) {
  if (rng.uniform() < eps) return rng.index(qnet.output_size());
  return argmax(qnet.forward(obs));
}

double dqn_target(const Mlp& online, const Mlp& target, const Transition& t, double gamma, bool double_q) {
  if (t.terminal) return t.reward;
  const Eigen::VectorXd q_next = target.forward(t.next_state);
  const double bootstrap = double_q ? q_next[static_cast<Eigen::Index>(argmax(online.forward(t.next_state)))]
                                    : q_next.maxCoeff();
  return t.reward + gamma * bootstrap;
}

DqnAgent::DqnAgent(std::size_t observation_size, std::size_t action_count, const HyperParams& hp,
                   std::uint64_t seed)
    : DqnAgent(Mlp::init(net_dims(observation_size, hp.hidden, action_count), Head::kLinear, seed), Mlp{}, hp) {}

DqnAgent::DqnAgent(Mlp online, Mlp target, const HyperParams& hp)
    : hp_(hp), online_(std::move(online)), target_(std::move(target)) {
  if (target_.dims().empty()) target_ = online_;
  if (target_.dims() != online_.dims()) throw PreconditionError("online and target networks differ in shape");
  optimizer_ = Optimizer(hp_.optimizer, hp_.alpha, online_.parameter_count());
}

double DqnAgent::update(const std::vector<const Transition*>& batch) {
  if (batch.empty()) throw PreconditionError("empty DQN batch");
  const auto n = static_cast<Eigen::Index>(batch.size());
  const auto in = static_cast<Eigen::Index>(online_.input_size());

  Eigen::MatrixXd states(in, n), next_states(in, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    states.col(i) = batch[i]->state;
    next_states.col(i) = batch[i]->next_state;
  }

  const Eigen::MatrixXd q_next_target = target_.forward(next_states, nullptr);
  Eigen::MatrixXd q_next_online;
  if (hp_.double_dqn) q_next_online = online_.forward(next_states, nullptr);

  ForwardCache cache;
  const Eigen::MatrixXd q = online_.forward(states, &cache);
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(q.rows(), n);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Transition& t = *batch[i];
    double y = t.reward;
    if (!t.terminal) {
      const Eigen::Index next_a = hp_.double_dqn ? static_cast<Eigen::Index>(argmax(q_next_online.col(i)))
                                                 : static_cast<Eigen::Index>(argmax(q_next_target.col(i)));
      y += hp_.gamma * q_next_target(next_a, i);
    }
    const auto a = static_cast<Eigen::Index>(t.action);
    const double err = q(a, i) - y;
    loss += err * err;
    grad(a, i) = 2.0 * err / static_cast<double>(n);
  }
  loss /= static_cast<double>(n);
  if (!std::isfinite(loss)) throw DivergenceError("DQN loss is not finite");

  optimizer_.apply(online_, online_.backward(cache, grad), Direction::kDescend);
  ++updates_;
  if (updates_ % static_cast<std::uint64_t>(hp_.target_sync) == 0) sync_target();
  return loss;
}

nlohmann::json DqnAgent::networks_json() const {
  return {{"online", online_.to_json()}, {"target", target_.to_json()}};
}

double dqn_update(DqnAgent& agent, const ReplayBuffer& buffer, Rng& rng) {
  const auto n = static_cast<std::size_t>(agent.hyperparams().batch_size);
  return agent.update(buffer.sample(n, rng));
}

}  // namespace acd
