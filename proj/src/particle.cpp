#include "maal/particle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "maal/errors.hpp"

namespace maal {

double norm(Vec2 v) { return std::hypot(v.x, v.y); }
double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }

std::array<Vec2, kNavLandmarks> canonical_landmarks() {
  std::array<Vec2, kNavLandmarks> out{};
  for (std::size_t i = 0; i < kNavLandmarks; ++i) {
    const double angle = std::numbers::pi / 6.0 + static_cast<double>(i) * std::numbers::pi / 3.0;
    out[i] = {0.75 * std::cos(angle), 0.75 * std::sin(angle)};
  }
  return out;
}

std::vector<Obstacle> canonical_obstacles() {
  return {{{0.0, 0.0}, 0.2}, {{-0.45, 0.3}, 0.12}, {{0.45, -0.3}, 0.12}};
}

namespace {

void validate(const ParticlePhysics& p) {
  if (!(p.dt > 0.0) || !(p.mass > 0.0) || !(p.max_speed > 0.0) || !(p.max_force > 0.0) ||
      p.damping < 0.0 || p.damping >= 1.0 || !(p.agent_radius >= 0.0) || !(p.arena_half_width > 0.0) ||
      p.max_steps == 0) {
    throw ConfigError("invalid particle physics constants");
  }
}

bool clear_of_obstacles(const ParticleWorld& w, Vec2 p) {
  for (const auto& o : w.obstacles) {
    if (norm(p - o.center) < o.radius + w.physics.agent_radius) return false;
  }
  return true;
}

}  // namespace

ParticleWorld nav_reset(std::mt19937_64& rng, std::size_t target_landmark, ParticlePhysics physics) {
  validate(physics);
  if (target_landmark >= kNavLandmarks) throw ConfigError("target landmark out of range");
  ParticleWorld w;
  w.physics = physics;
  w.landmarks = canonical_landmarks();
  w.obstacles = canonical_obstacles();
  w.target_landmark = target_landmark;
  std::uniform_real_distribution<double> coord(-physics.arena_half_width, physics.arena_half_width);
  for (std::size_t i = 0; i < kNavAgents; ++i) {
    Vec2 p;
    do {
      const double x = coord(rng);
      p = {x, coord(rng)};
    } while (!clear_of_obstacles(w, p));
    w.pos[i] = p;
  }
  return w;
}

ParticleWorld nav_reset(std::uint64_t seed, std::size_t target_landmark, ParticlePhysics physics) {
  std::mt19937_64 rng(seed);
  return nav_reset(rng, target_landmark, physics);
}

Vec2 discrete_force(std::size_t action, double max_force) {
  switch (action) {
    case 0: return {0.0, max_force};
    case 1: return {0.0, -max_force};
    case 2: return {-max_force, 0.0};
    case 3: return {max_force, 0.0};
    case 4: return {0.0, 0.0};
    default: throw ConfigError("navigation action index out of range");
  }
}

NavStepResult nav_step(ParticleWorld& w, const std::array<Vec2, kNavAgents>& forces) {
  if (w.done) throw StateError("navigation episode already finished");
  const auto& ph = w.physics;
  for (const auto& f : forces) {
    if (!std::isfinite(f.x) || !std::isfinite(f.y)) throw NumericError("non-finite force");
  }
  for (std::size_t i = 0; i < kNavAgents; ++i) {
    Vec2 f = forces[i];
    const double fn = norm(f);
    if (fn > ph.max_force) f = (ph.max_force / fn) * f;

    Vec2 v = (1.0 - ph.damping) * w.vel[i] + (ph.dt / ph.mass) * f;
    const double speed = norm(v);
    if (speed > ph.max_speed) v = (ph.max_speed / speed) * v;
    Vec2 p = w.pos[i] + ph.dt * v;

    for (const auto& o : w.obstacles) {
      const Vec2 d = p - o.center;
      const double dist = norm(d);
      const double reach = o.radius + ph.agent_radius;
      if (dist >= reach) continue;
      const Vec2 n = dist > 0.0 ? (1.0 / dist) * d : Vec2{1.0, 0.0};
      p = o.center + reach * n;
      const double vn = dot(v, n);
      if (vn < 0.0) v = v - vn * n;
    }
    const double hw = ph.arena_half_width;
    if (p.x < -hw || p.x > hw) {
      p.x = std::clamp(p.x, -hw, hw);
      v.x = 0.0;
    }
    if (p.y < -hw || p.y > hw) {
      p.y = std::clamp(p.y, -hw, hw);
      v.y = 0.0;
    }
    w.pos[i] = p;
    w.vel[i] = v;
  }
  ++w.step_count;

  NavStepResult r;
  const Vec2 target = w.landmarks[w.target_landmark];
  bool all_in = true;
  for (std::size_t i = 0; i < kNavAgents; ++i) {
    const double d = norm(w.pos[i] - target);
    r.rewards[i] = -d;
    all_in = all_in && d <= ph.capture_radius;
  }
  if (all_in) {
    for (double& rw : r.rewards) rw += ph.success_bonus;
    r.success = true;
    r.done = true;
  } else if (w.step_count >= ph.max_steps) {
    r.done = true;
  }
  w.done = r.done;
  w.success = r.success;
  return r;
}

NavStepResult nav_step_discrete(ParticleWorld& w, const std::array<std::size_t, kNavAgents>& actions) {
  std::array<Vec2, kNavAgents> forces{};
  for (std::size_t i = 0; i < kNavAgents; ++i) forces[i] = discrete_force(actions[i], w.physics.max_force);
  auto r = nav_step(w, forces);
  for (std::size_t i = 0; i < kNavAgents; ++i) w.last_action[i] = static_cast<int>(actions[i]);
  return r;
}

std::vector<double> nav_observe(const ParticleWorld& w, std::size_t agent) {
  if (agent >= kNavAgents) throw ConfigError("navigation has three agents");
  const Vec2 me = w.pos[agent];
  std::vector<double> o{me.x, me.y, w.vel[agent].x, w.vel[agent].y};
  for (const auto& l : w.landmarks) {
    o.push_back(l.x - me.x);
    o.push_back(l.y - me.y);
  }
  for (const auto& ob : w.obstacles) {
    o.push_back(ob.center.x - me.x);
    o.push_back(ob.center.y - me.y);
  }
  const int partner = ObservationChain::observed_by(agent);
  if (partner >= 0) {
    const Vec2 pp = w.pos[static_cast<std::size_t>(partner)];
    o.push_back(pp.x - me.x);
    o.push_back(pp.y - me.y);
    const int last = w.last_action[static_cast<std::size_t>(partner)];
    for (int a = 0; a < static_cast<int>(kNavActions); ++a) o.push_back(a == last ? 1.0 : 0.0);
  } else {
    for (std::size_t l = 0; l < kNavLandmarks; ++l) o.push_back(l == w.target_landmark ? 1.0 : 0.0);
  }
  return o;
}

int NavKeyGrid::cell_x(double x, double hw) const {
  const int c = static_cast<int>(std::floor((x + hw) / (2.0 * hw) * cells_per_side));
  return std::clamp(c, 0, cells_per_side - 1);
}

int NavKeyGrid::cell_y(double y, double hw) const { return cell_x(y, hw); }

std::uint64_t NavKeyGrid::key(const ParticleWorld& w, std::size_t agent) const {
  const double hw = w.physics.arena_half_width;
  const Vec2 p = w.pos[agent];
  const Vec2 v = w.vel[agent];
  double angle = std::atan2(v.y, v.x);
  if (angle < 0.0) angle += 2.0 * std::numbers::pi;
  const int sector = std::min(7, static_cast<int>(angle / (std::numbers::pi / 4.0)));
  const auto cell = static_cast<std::uint64_t>(cell_y(p.y, hw) * cells_per_side + cell_x(p.x, hw));
  return cell * 8 + static_cast<std::uint64_t>(sector);
}

void write_nav_snapshot_header(std::ostream& out) { out << "step,agent,x,y,vx,vy,last_action,target\n"; }

void write_nav_snapshot(std::ostream& out, const ParticleWorld& w) {
  for (std::size_t i = 0; i < kNavAgents; ++i) {
    out << w.step_count << ',' << i << ',' << w.pos[i].x << ',' << w.pos[i].y << ',' << w.vel[i].x << ','
        << w.vel[i].y << ',' << w.last_action[i] << ',' << w.target_landmark << '\n';
  }
}

}  // namespace maal
