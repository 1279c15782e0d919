#pragma once

// Monte Carlo reference for the undefended goal probability.

#include <cstddef>
#include <cstdint>

#include "acd/rng.hpp"

namespace oracle {

// Fraction of simulated attackers that complete `steps` techniques before
// accumulating `budget` failures.
inline double monte_carlo_p_goal(std::size_t steps, int budget, double rho, std::size_t trials, std::uint64_t seed) {
  acd::Rng rng(seed);
  std::size_t reached = 0;
  for (std::size_t i = 0; i < trials; ++i) {
    std::size_t done = 0;
    int failures = 0;
    while (done < steps && failures < budget) {
      if (rng.uniform() < rho) {
        ++done;
      } else {
        ++failures;
      }
    }
    reached += done == steps ? 1 : 0;
  }
  return static_cast<double>(reached) / static_cast<double>(trials);
}

}  // namespace oracle
