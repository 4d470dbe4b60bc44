#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "maal/belief.hpp"

namespace maal {

/// Policy input: observation, own goal (true or estimated) and beliefs about every other agent.
struct AugmentedObservation {
  std::vector<double> obs;
  std::vector<double> own_goal;        // one-hot over the goal set
  std::vector<double> others_beliefs;  // one block per other agent, fixed agent order

  std::size_t size() const noexcept { return obs.size() + own_goal.size() + others_beliefs.size(); }
  std::vector<double> flat() const;
  std::size_t goal_index() const;
  /// Largest probability across the belief blocks, 0 when there are none.
  double belief_confidence() const;

  friend bool operator==(const AugmentedObservation&, const AugmentedObservation&) = default;
};

/// The learning tuple for one agent and one action, with its shaped reward.
struct ShapedTransition {
  std::size_t agent = 0;
  AugmentedObservation s_aug;
  std::size_t action = 0;
  AugmentedObservation s_aug_next;
  std::size_t action_next = 0;  // action already chosen at the next state (on-policy targets)
  bool done = false;
  double reward_raw = 0.0;
  double reward_shaped = 0.0;
  double klg = 0.0;
};

}  // namespace maal
