#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "maal/belief.hpp"

namespace maal {

/// Hashable summary of what an observer sees when it watches another agent act.
using ObservationKey = std::uint64_t;

/// One observed action of the goal-holding agent, with the key it was chosen under.
struct ObservedStep {
  ObservationKey key = 0;
  std::size_t action = 0;
};

/// Per-episode trace. `beliefs[t][link]` is observer link `link`'s belief at the
/// end of step t (after seeing that step's action), t = 0..steps-1.
struct EpisodeRecord {
  std::size_t true_goal = 0;
  std::vector<std::vector<GoalDistribution>> beliefs;
  std::vector<std::vector<std::size_t>> actions;
  std::vector<double> rewards_raw;     // team sum per step
  std::vector<double> rewards_shaped;  // team sum per step
  std::vector<ObservedStep> observed_trajectory;
  double return_raw = 0.0;
  double return_shaped = 0.0;
  double klg_sum = 0.0;  // sum over shaped agents and steps
  bool success = false;
  std::size_t steps = 0;
};

}  // namespace maal
