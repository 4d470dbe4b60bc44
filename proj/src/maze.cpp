#include "maal/maze.hpp"

#include <deque>
#include <fstream>
#include <ostream>
#include <sstream>

#include "maal/errors.hpp"

namespace maal {

MazeAction maze_action(std::size_t index) {
  if (index >= kMazeActions) throw ConfigError("maze action index out of range");
  return static_cast<MazeAction>(index);
}

Cell apply_move(Cell c, MazeAction a) {
  switch (a) {
    case MazeAction::Up: return {c.x, c.y - 1};
    case MazeAction::Down: return {c.x, c.y + 1};
    case MazeAction::Left: return {c.x - 1, c.y};
    case MazeAction::Right: return {c.x + 1, c.y};
    case MazeAction::Stay: return c;
  }
  return c;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

MazeLayout MazeLayout::parse(std::string_view text) {
  std::vector<std::string> rows;
  std::string current;
  for (char ch : text) {
    if (ch == '\r') continue;
    if (ch == '\n') {
      rows.push_back(current);
      current.clear();
    } else {
      current.push_back(ch);
    }
  }
  if (!current.empty()) rows.push_back(current);
  while (!rows.empty() && rows.back().empty()) rows.pop_back();
  if (rows.size() != static_cast<std::size_t>(kHeight)) {
    throw ConfigError("maze map must have " + std::to_string(kHeight) + " rows");
  }

  MazeLayout layout;
  layout.walls_.assign(kWidth * kHeight, false);
  std::array<int, kMazeExits> exit_seen{};
  int leaders = 0;
  int followers = 0;
  for (int y = 0; y < kHeight; ++y) {
    const auto& row = rows[y];
    if (row.size() != static_cast<std::size_t>(kWidth)) {
      throw ConfigError("maze map row " + std::to_string(y) + " must have " + std::to_string(kWidth) +
                        " columns");
    }
    for (int x = 0; x < kWidth; ++x) {
      const char ch = row[x];
      const bool boundary = x == 0 || y == 0 || x == kWidth - 1 || y == kHeight - 1;
      switch (ch) {
        case '#': layout.walls_[y * kWidth + x] = true; break;
        case '.': break;
        case 'L': layout.leader_start_ = {x, y}; ++leaders; break;
        case 'F': layout.follower_start_ = {x, y}; ++followers; break;
        case 'A': case 'B': case 'C': case 'D': {
          if (!boundary) throw ConfigError(std::string("exit ") + ch + " is not on the boundary");
          const auto idx = static_cast<std::size_t>(ch - 'A');
          layout.exits_[idx] = {x, y};
          ++exit_seen[idx];
          break;
        }
        default: throw ConfigError(std::string("unknown maze map character '") + ch + "'");
      }
    }
  }
  for (std::size_t i = 0; i < kMazeExits; ++i) {
    if (exit_seen[i] != 1) throw ConfigError("each exit A-D must appear exactly once");
  }
  if (leaders != 1 || followers != 1) throw ConfigError("exactly one L and one F start cell required");

  std::ostringstream canon;
  for (const auto& r : rows) canon << r << '\n';
  layout.text_ = canon.str();
  layout.hash_ = fnv1a64(layout.text_);
  return layout;
}

MazeLayout MazeLayout::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open maze map: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

bool MazeLayout::is_wall(Cell c) const {
  if (!in_bounds(c)) return true;
  return walls_[c.y * kWidth + c.x];
}

MazeWorld maze_reset(std::shared_ptr<const MazeLayout> layout, std::uint64_t /*seed*/,
                     std::size_t target_exit, MazeConfig config) {
  if (!layout) throw ConfigError("maze layout missing");
  if (target_exit >= kMazeExits) throw ConfigError("target exit must be one of A-D");
  if (config.max_steps == 0) throw ConfigError("max_steps must be positive");
  MazeWorld w;
  w.leader = layout->leader_start();
  w.follower = layout->follower_start();
  w.layout = std::move(layout);
  w.config = config;
  w.target_exit = target_exit;
  return w;
}

namespace {

double move_agent(const MazeLayout& layout, Cell& pos, MazeAction a, double move_cost) {
  if (a == MazeAction::Stay) return 0.0;
  const Cell next = apply_move(pos, a);
  if (layout.passable(next)) pos = next;
  return move_cost;
}

}  // namespace

MazeStepResult maze_step(MazeWorld& world, MazeAction leader, MazeAction follower) {
  if (world.done) throw StateError("maze episode already finished");
  MazeStepResult r;
  r.rewards[kLeader] = move_agent(*world.layout, world.leader, leader, world.config.move_cost);
  r.rewards[kFollower] = move_agent(*world.layout, world.follower, follower, world.config.move_cost);
  world.prev_action = {static_cast<int>(leader), static_cast<int>(follower)};
  ++world.step_count;

  const Cell goal = world.layout->exit(world.target_exit);
  if (world.leader == goal && world.follower == goal) {
    r.rewards[kLeader] += world.config.success_bonus;
    r.rewards[kFollower] += world.config.success_bonus;
    r.success = true;
    r.done = true;
  } else if (world.step_count >= world.config.max_steps) {
    r.done = true;
  }
  world.done = r.done;
  world.success = r.success;
  return r;
}

std::vector<double> maze_observe(const MazeWorld& world, std::size_t agent) {
  if (agent > kFollower) throw ConfigError("maze has two agents");
  std::vector<double> o{static_cast<double>(world.leader.x), static_cast<double>(world.leader.y),
                        static_cast<double>(world.follower.x), static_cast<double>(world.follower.y),
                        static_cast<double>(world.prev_action[agent == kLeader ? kFollower : kLeader])};
  if (agent == kLeader) {
    for (std::size_t i = 0; i < kMazeExits; ++i) o.push_back(i == world.target_exit ? 1.0 : 0.0);
  }
  return o;
}

std::uint64_t maze_state_code(Cell leader, Cell follower) {
  constexpr std::uint64_t w = MazeLayout::kWidth;
  constexpr std::uint64_t h = MazeLayout::kHeight;
  return ((static_cast<std::uint64_t>(leader.y) * w + static_cast<std::uint64_t>(leader.x)) * h +
          static_cast<std::uint64_t>(follower.y)) * w + static_cast<std::uint64_t>(follower.x);
}

std::uint64_t maze_state_code(const MazeWorld& world) {
  return maze_state_code(world.leader, world.follower);
}

void write_maze_snapshot_header(std::ostream& out) {
  out << "step,leader_x,leader_y,follower_x,follower_y,target,leader_prev,follower_prev\n";
}

void write_maze_snapshot(std::ostream& out, const MazeWorld& w) {
  out << w.step_count << ',' << w.leader.x << ',' << w.leader.y << ',' << w.follower.x << ','
      << w.follower.y << ',' << static_cast<char>('A' + w.target_exit) << ',' << w.prev_action[0] << ','
      << w.prev_action[1] << '\n';
}

std::vector<int> maze_distances(const MazeLayout& layout, Cell from) {
  constexpr int w = MazeLayout::kWidth;
  std::vector<int> dist(w * MazeLayout::kHeight, -1);
  if (!layout.passable(from)) return dist;
  std::deque<Cell> frontier{from};
  dist[from.y * w + from.x] = 0;
  while (!frontier.empty()) {
    const Cell c = frontier.front();
    frontier.pop_front();
    for (std::size_t a = 0; a < 4; ++a) {
      const Cell n = apply_move(c, static_cast<MazeAction>(a));
      if (!layout.passable(n) || dist[n.y * w + n.x] >= 0) continue;
      dist[n.y * w + n.x] = dist[c.y * w + c.x] + 1;
      frontier.push_back(n);
    }
  }
  return dist;
}

}  // namespace maal
