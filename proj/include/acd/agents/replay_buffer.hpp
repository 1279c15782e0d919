#pragma once

#include <vector>

#include "acd/agents/episodic_env.hpp"
#include "acd/rng.hpp"

namespace acd {

// Fixed-capacity ring buffer with uniform sampling (with replacement).
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition t);
  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }

  // Throws PreconditionError when fewer than n transitions are stored.
  std::vector<const Transition*> sample(std::size_t n, Rng& rng) const;

  // Stored transitions, oldest first.
  std::vector<const Transition*> contents() const;

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::vector<Transition> items_;
};

}  // namespace acd
