#pragma once

#include <stdexcept>
#include <string>

namespace acd {

// Malformed or inconsistent input documents (graph, catalog, config,
// checkpoint). Maps to CLI exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A call that violates an operation's precondition (stepping a finished
// episode, querying successors of Terminated, ...).
class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Non-finite loss or gradient during training. Maps to CLI exit code 2.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace acd
