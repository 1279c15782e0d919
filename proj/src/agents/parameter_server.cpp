#include "acd/agents/parameter_server.hpp"

#include "acd/errors.hpp"

namespace acd {

ParameterServer::ParameterServer(ActorCritic model) : model_(std::move(model)) {}

ParameterSnapshot ParameterServer::snapshot() const {
  std::lock_guard lock(mu_);
  const auto a = model_.actor().parameters();
  const auto c = model_.critic().parameters();
  return {version_, {a.begin(), a.end()}, {c.begin(), c.end()}};
}

std::uint64_t ParameterServer::submit(GradientSet actor_grad, GradientSet critic_grad) {
  std::lock_guard lock(mu_);
  if (shut_down_) throw PreconditionError("parameter server is shut down");
  model_.apply_gradients(std::move(actor_grad), std::move(critic_grad));
  ++version_;
  if (observer_) observer_(version_, model_);
  return version_;
}

std::uint64_t ParameterServer::version() const {
  std::lock_guard lock(mu_);
  return version_;
}

void ParameterServer::shutdown() {
  std::lock_guard lock(mu_);
  shut_down_ = true;
}

bool ParameterServer::is_shut_down() const {
  std::lock_guard lock(mu_);
  return shut_down_;
}

void ParameterServer::set_apply_observer(ApplyObserver observer) {
  std::lock_guard lock(mu_);
  observer_ = std::move(observer);
}

void ParameterServer::with_model(const std::function<void(const ActorCritic&)>& fn) const {
  std::lock_guard lock(mu_);
  fn(model_);
}

}  // namespace acd
