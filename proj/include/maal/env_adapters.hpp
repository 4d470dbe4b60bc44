#pragma once

// Bindings of the two worlds to the pipeline's MultiAgentEnv surface, plus the
// goal-conditioned value sources the max-entropy recognizer reads.

#include <memory>
#include <random>
#include <vector>

#include "maal/legibility.hpp"
#include "maal/maze.hpp"
#include "maal/particle.hpp"
#include "maal/recognition.hpp"

namespace maal {

class MazeEnv final : public MultiAgentEnv {
 public:
  /// With `public_target` the follower is told the exit (oracle follower baseline).
  MazeEnv(std::shared_ptr<const MazeLayout> layout, MazeConfig config, bool public_target = false);

  void reset(std::uint64_t seed, std::size_t target_exit);
  const MazeWorld& world() const noexcept { return world_; }

  std::size_t num_agents() const override { return 2; }
  std::size_t num_actions() const override { return kMazeActions; }
  std::size_t num_goals() const override { return kMazeExits; }
  std::optional<std::size_t> goal_of(std::size_t agent) const override;
  std::vector<double> observe(std::size_t agent) const override { return maze_observe(world_, agent); }
  ObservationKey observation_key(std::size_t observer, std::size_t observed) const override;
  EnvStep step(std::span<const std::size_t> actions) override;
  bool done() const override { return world_.done; }

 private:
  std::shared_ptr<const MazeLayout> layout_;
  MazeConfig config_;
  bool public_target_;
  MazeWorld world_;
};

class NavEnv final : public MultiAgentEnv {
 public:
  NavEnv(ParticlePhysics physics, NavKeyGrid grid = {});

  void reset(std::mt19937_64& rng, std::size_t target_landmark);
  const ParticleWorld& world() const noexcept { return world_; }
  const NavKeyGrid& grid() const noexcept { return grid_; }

  std::size_t num_agents() const override { return kNavAgents; }
  std::size_t num_actions() const override { return kNavActions; }
  std::size_t num_goals() const override { return kNavLandmarks; }
  std::optional<std::size_t> goal_of(std::size_t) const override { return world_.target_landmark; }
  std::vector<double> observe(std::size_t agent) const override { return nav_observe(world_, agent); }
  ObservationKey observation_key(std::size_t observer, std::size_t observed) const override;
  EnvStep step(std::span<const std::size_t> actions) override;
  bool done() const override { return world_.done; }

 private:
  ParticlePhysics physics_;
  NavKeyGrid grid_;
  ParticleWorld world_;
};

/// Q_g(s, a) = -1 - (moves from the leader's next cell to exit g).
class MazeGoalValues final : public GoalActionValues {
 public:
  explicit MazeGoalValues(const MazeLayout& layout);
  std::size_t num_goals() const override { return kMazeExits; }
  std::size_t num_actions() const override { return kMazeActions; }
  void values(ObservationKey key, std::span<double> out) const override;

 private:
  const MazeLayout* layout_;
  std::vector<std::vector<int>> dist_;  // per exit
};

/// Q_g(cell, a) = -1 - (grid steps from the next cell to landmark g around obstacles).
class NavGoalValues final : public GoalActionValues {
 public:
  NavGoalValues(const ParticlePhysics& physics, NavKeyGrid grid);
  std::size_t num_goals() const override { return kNavLandmarks; }
  std::size_t num_actions() const override { return kNavActions; }
  void values(ObservationKey key, std::span<double> out) const override;
  int distance(std::size_t landmark, int cx, int cy) const;

 private:
  NavKeyGrid grid_;
  std::vector<std::vector<int>> dist_;  // per landmark, cells_per_side^2
};

/// Q-table key for the maze: joint positions, goal (or estimate) and belief confidence bin.
std::uint64_t maze_learner_key(const AugmentedObservation& obs);
/// Own position, the continuous input of the navigation tile learners.
std::vector<double> nav_learner_projection(const AugmentedObservation& obs);

}  // namespace maal
