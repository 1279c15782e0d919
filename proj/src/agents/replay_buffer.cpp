#include "acd/agents/replay_buffer.hpp"

#include "acd/errors.hpp"

namespace acd {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ConfigError("replay capacity must be positive");
  items_.reserve(std::min<std::size_t>(capacity, 1 << 16));
}

void ReplayBuffer::push(Transition t) {
  if (items_.size() < capacity_) {
    items_.push_back(std::move(t));
  } else {
    items_[next_] = std::move(t);
  }
  next_ = (next_ + 1) % capacity_;
}

std::vector<const Transition*> ReplayBuffer::sample(std::size_t n, Rng& rng) const {
  if (items_.size() < n) {
    throw PreconditionError("replay buffer holds " + std::to_string(items_.size()) + " transitions, need " +
                            std::to_string(n));
  }
  std::vector<const Transition*> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(&items_[rng.index(items_.size())]);
  return out;
}

std::vector<const Transition*> ReplayBuffer::contents() const {
  std::vector<const Transition*> out;
  out.reserve(items_.size());
  const std::size_t start = items_.size() < capacity_ ? 0 : next_;
  for (std::size_t i = 0; i < items_.size(); ++i) out.push_back(&items_[(start + i) % items_.size()]);
  return out;
}

}  // namespace acd
