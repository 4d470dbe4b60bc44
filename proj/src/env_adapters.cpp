#include "maal/env_adapters.hpp"

#include <algorithm>
#include <deque>
#include <limits>

#include "maal/errors.hpp"

namespace maal {

MazeEnv::MazeEnv(std::shared_ptr<const MazeLayout> layout, MazeConfig config, bool public_target)
    : layout_(std::move(layout)), config_(config), public_target_(public_target) {
  world_ = maze_reset(layout_, 0, 0, config_);
}

void MazeEnv::reset(std::uint64_t seed, std::size_t target_exit) {
  world_ = maze_reset(layout_, seed, target_exit, config_);
}

std::optional<std::size_t> MazeEnv::goal_of(std::size_t agent) const {
  if (agent == kLeader || public_target_) return world_.target_exit;
  return std::nullopt;
}

ObservationKey MazeEnv::observation_key(std::size_t, std::size_t) const { return maze_state_code(world_); }

EnvStep MazeEnv::step(std::span<const std::size_t> actions) {
  if (actions.size() != 2) throw ConfigError("maze takes a joint action of two");
  const auto r = maze_step(world_, maze_action(actions[0]), maze_action(actions[1]));
  return {{r.rewards[0], r.rewards[1]}, r.done, r.success};
}

NavEnv::NavEnv(ParticlePhysics physics, NavKeyGrid grid) : physics_(physics), grid_(grid) {
  if (grid_.cells_per_side < 2) throw ConfigError("navigation key grid too coarse");
  std::mt19937_64 rng(0);
  world_ = nav_reset(rng, 0, physics_);
}

void NavEnv::reset(std::mt19937_64& rng, std::size_t target_landmark) {
  world_ = nav_reset(rng, target_landmark, physics_);
}

ObservationKey NavEnv::observation_key(std::size_t, std::size_t observed) const {
  return grid_.key(world_, observed);
}

EnvStep NavEnv::step(std::span<const std::size_t> actions) {
  if (actions.size() != kNavAgents) throw ConfigError("navigation takes a joint action of three");
  const auto r = nav_step_discrete(world_, {actions[0], actions[1], actions[2]});
  return {{r.rewards.begin(), r.rewards.end()}, r.done, r.success};
}

MazeGoalValues::MazeGoalValues(const MazeLayout& layout) : layout_(&layout) {
  for (std::size_t e = 0; e < kMazeExits; ++e) dist_.push_back(maze_distances(layout, layout.exit(e)));
}

void MazeGoalValues::values(ObservationKey key, std::span<double> out) const {
  constexpr std::uint64_t w = MazeLayout::kWidth;
  constexpr std::uint64_t h = MazeLayout::kHeight;
  const std::uint64_t leader_index = key / (w * h);
  const Cell leader{static_cast<int>(leader_index % w), static_cast<int>(leader_index / w)};
  constexpr int kFar = MazeLayout::kWidth * MazeLayout::kHeight;
  for (std::size_t g = 0; g < kMazeExits; ++g) {
    for (std::size_t a = 0; a < kMazeActions; ++a) {
      Cell next = apply_move(leader, static_cast<MazeAction>(a));
      if (!layout_->passable(next)) next = leader;
      const int d = layout_->passable(next) ? dist_[g][next.y * MazeLayout::kWidth + next.x] : -1;
      out[g * kMazeActions + a] = -1.0 - static_cast<double>(d < 0 ? kFar : d);
    }
  }
}

NavGoalValues::NavGoalValues(const ParticlePhysics& physics, NavKeyGrid grid) : grid_(grid) {
  const int n = grid_.cells_per_side;
  const double hw = physics.arena_half_width;
  const double cell = 2.0 * hw / n;
  const auto obstacles = canonical_obstacles();
  std::vector<bool> blocked(static_cast<std::size_t>(n * n), false);
  for (int cy = 0; cy < n; ++cy) {
    for (int cx = 0; cx < n; ++cx) {
      const Vec2 c{-hw + (cx + 0.5) * cell, -hw + (cy + 0.5) * cell};
      for (const auto& o : obstacles) {
        if (norm(c - o.center) < o.radius + physics.agent_radius) blocked[cy * n + cx] = true;
      }
    }
  }
  const auto landmarks = canonical_landmarks();
  const int far = n * n;
  for (const auto& l : landmarks) {
    std::vector<int> dist(static_cast<std::size_t>(n * n), -1);
    const int sx = grid_.cell_x(l.x, hw);
    const int sy = grid_.cell_y(l.y, hw);
    std::deque<std::pair<int, int>> frontier{{sx, sy}};
    dist[sy * n + sx] = 0;
    while (!frontier.empty()) {
      const auto [x, y] = frontier.front();
      frontier.pop_front();
      constexpr int dx[4] = {0, 0, -1, 1};
      constexpr int dy[4] = {1, -1, 0, 0};
      for (int k = 0; k < 4; ++k) {
        const int nx = x + dx[k];
        const int ny = y + dy[k];
        if (nx < 0 || ny < 0 || nx >= n || ny >= n) continue;
        if (blocked[ny * n + nx] || dist[ny * n + nx] >= 0) continue;
        dist[ny * n + nx] = dist[y * n + x] + 1;
        frontier.push_back({nx, ny});
      }
    }
    // Blocked cells take their best open neighbour plus one.
    for (int y = 0; y < n; ++y) {
      for (int x = 0; x < n; ++x) {
        if (dist[y * n + x] >= 0) continue;
        int best = far;
        constexpr int dx[4] = {0, 0, -1, 1};
        constexpr int dy[4] = {1, -1, 0, 0};
        for (int k = 0; k < 4; ++k) {
          const int nx = x + dx[k];
          const int ny = y + dy[k];
          if (nx < 0 || ny < 0 || nx >= n || ny >= n) continue;
          const int d = dist[ny * n + nx];
          if (d >= 0 && !blocked[ny * n + nx]) best = std::min(best, d + 1);
        }
        dist[y * n + x] = best;
      }
    }
    dist_.push_back(std::move(dist));
  }
}

int NavGoalValues::distance(std::size_t landmark, int cx, int cy) const {
  return dist_.at(landmark)[cy * grid_.cells_per_side + cx];
}

void NavGoalValues::values(ObservationKey key, std::span<double> out) const {
  const int n = grid_.cells_per_side;
  const auto cell = static_cast<int>(key / 8);
  const int cx = cell % n;
  const int cy = cell / n;
  // action order matches the discrete force basis: +y, -y, -x, +x, none
  constexpr int dx[kNavActions] = {0, 0, -1, 1, 0};
  constexpr int dy[kNavActions] = {1, -1, 0, 0, 0};
  for (std::size_t g = 0; g < kNavLandmarks; ++g) {
    for (std::size_t a = 0; a < kNavActions; ++a) {
      const int nx = std::clamp(cx + dx[a], 0, n - 1);
      const int ny = std::clamp(cy + dy[a], 0, n - 1);
      out[g * kNavActions + a] = -1.0 - static_cast<double>(distance(g, nx, ny));
    }
  }
}

std::uint64_t maze_learner_key(const AugmentedObservation& obs) {
  if (obs.obs.size() < 4) throw ConfigError("maze observation too short");
  const Cell leader{static_cast<int>(obs.obs[0]), static_cast<int>(obs.obs[1])};
  const Cell follower{static_cast<int>(obs.obs[2]), static_cast<int>(obs.obs[3])};
  DiscreteKey k;
  k.state = maze_state_code(leader, follower);
  k.goal = static_cast<std::uint8_t>(obs.goal_index());
  k.confidence = static_cast<std::uint8_t>(confidence_bin(obs.belief_confidence()));
  return k.packed();
}

std::vector<double> nav_learner_projection(const AugmentedObservation& obs) {
  if (obs.obs.size() < 2) throw ConfigError("navigation observation too short");
  return {obs.obs[0], obs.obs[1]};
}

}  // namespace maal
