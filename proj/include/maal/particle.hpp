#pragma once

// Particle simple-navigation world: three point agents, six static landmarks,
// circular obstacles. Agent 0 knows the target landmark; agent 1 watches agent 0
// and agent 2 watches agent 1.

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <vector>

namespace maal {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

double norm(Vec2 v);
double dot(Vec2 a, Vec2 b);

struct Obstacle {
  Vec2 center;
  double radius = 0.0;
};

inline constexpr std::size_t kNavAgents = 3;
inline constexpr std::size_t kNavLandmarks = 6;
inline constexpr std::size_t kNavActions = 5;

struct ParticlePhysics {
  double dt = 0.1;
  double damping = 0.25;
  double mass = 1.0;
  double max_speed = 1.0;
  double max_force = 1.0;
  double agent_radius = 0.05;
  double arena_half_width = 1.0;
  double capture_radius = 0.1;
  double success_bonus = 5.0;
  std::size_t max_steps = 100;
};

/// observer -> observed; agent 0 is watched by agent 1, agent 1 by agent 2.
struct ObservationChain {
  static constexpr std::array<int, kNavAgents> kObserves{-1, 0, 1};
  static int observed_by(std::size_t observer) { return kObserves.at(observer); }
};

struct ParticleWorld {
  ParticlePhysics physics;
  std::array<Vec2, kNavAgents> pos{};
  std::array<Vec2, kNavAgents> vel{};
  std::array<Vec2, kNavLandmarks> landmarks{};
  std::vector<Obstacle> obstacles;
  std::array<int, kNavAgents> last_action{-1, -1, -1};
  std::size_t target_landmark = 0;
  std::size_t step_count = 0;
  bool done = false;
  bool success = false;
};

struct NavStepResult {
  std::array<double, kNavAgents> rewards{};
  bool done = false;
  bool success = false;
};

std::array<Vec2, kNavLandmarks> canonical_landmarks();
std::vector<Obstacle> canonical_obstacles();

/// Landmarks and obstacles at canonical positions; agents sampled uniformly off the obstacles.
ParticleWorld nav_reset(std::uint64_t seed, std::size_t target_landmark, ParticlePhysics physics = {});
ParticleWorld nav_reset(std::mt19937_64& rng, std::size_t target_landmark, ParticlePhysics physics = {});

/// Advances one step under raw forces (clamped to max_force).
NavStepResult nav_step(ParticleWorld& world, const std::array<Vec2, kNavAgents>& forces);
/// Same, with the discrete force basis {+y, -y, -x, +x, none} scaled by max_force.
NavStepResult nav_step_discrete(ParticleWorld& world, const std::array<std::size_t, kNavAgents>& actions);
Vec2 discrete_force(std::size_t action, double max_force);

/// Own position and velocity, landmark and obstacle offsets; the watched partner's
/// offset and last action for agents 1 and 2; the target one-hot for agent 0.
std::vector<double> nav_observe(const ParticleWorld& world, std::size_t agent);

/// Grid cell of the position plus 8-sector heading; the recognizer's key.
struct NavKeyGrid {
  int cells_per_side = 16;
  std::uint64_t key(const ParticleWorld& world, std::size_t agent) const;
  int cell_x(double x, double half_width) const;
  int cell_y(double y, double half_width) const;
};

/// `step,agent,x,y,vx,vy,last_action,target`
void write_nav_snapshot_header(std::ostream& out);
void write_nav_snapshot(std::ostream& out, const ParticleWorld& world);

}  // namespace maal
