#pragma once

// Lead-Follow Maze: a leader with a private target exit and a follower that
// must infer it; both succeed only when they stand on that exit together.

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace maal {

struct Cell {
  int x = 0;
  int y = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

enum class MazeAction : std::uint8_t { Up = 0, Down = 1, Left = 2, Right = 3, Stay = 4 };
inline constexpr std::size_t kMazeActions = 5;
inline constexpr std::size_t kMazeExits = 4;
inline constexpr std::size_t kLeader = 0;
inline constexpr std::size_t kFollower = 1;

MazeAction maze_action(std::size_t index);
Cell apply_move(Cell c, MazeAction a);

/// Static maze geometry parsed from a map file.
class MazeLayout {
 public:
  static constexpr int kWidth = 16;
  static constexpr int kHeight = 10;

  /// Rows of `#` (wall), `.` (free), `A`-`D` (exits on the boundary), `L`/`F` (start cells).
  static MazeLayout parse(std::string_view text);
  static MazeLayout load(const std::string& path);

  bool is_wall(Cell c) const;
  bool in_bounds(Cell c) const { return c.x >= 0 && c.x < kWidth && c.y >= 0 && c.y < kHeight; }
  bool passable(Cell c) const { return in_bounds(c) && !is_wall(c); }
  Cell exit(std::size_t index) const { return exits_.at(index); }
  Cell leader_start() const { return leader_start_; }
  Cell follower_start() const { return follower_start_; }
  /// 64-bit FNV-1a over the canonical map text.
  std::uint64_t hash() const { return hash_; }
  const std::string& text() const { return text_; }

 private:
  std::vector<bool> walls_;
  std::array<Cell, kMazeExits> exits_{};
  Cell leader_start_;
  Cell follower_start_;
  std::string text_;
  std::uint64_t hash_ = 0;
};

std::uint64_t fnv1a64(std::string_view bytes);

struct MazeConfig {
  std::size_t max_steps = 50;
  double move_cost = -0.1;
  double success_bonus = 1.0;
};

struct MazeWorld {
  std::shared_ptr<const MazeLayout> layout;
  MazeConfig config;
  Cell leader;
  Cell follower;
  std::size_t target_exit = 0;
  std::size_t step_count = 0;
  std::array<int, 2> prev_action{-1, -1};  // -1 until the first step
  bool done = false;
  bool success = false;
};

struct MazeStepResult {
  std::array<double, 2> rewards{0.0, 0.0};
  bool done = false;
  bool success = false;
};

/// Canonical start; the seed is accepted for interface symmetry, layout starts are fixed.
MazeWorld maze_reset(std::shared_ptr<const MazeLayout> layout, std::uint64_t seed,
                     std::size_t target_exit, MazeConfig config = {});
MazeStepResult maze_step(MazeWorld& world, MazeAction leader, MazeAction follower);

/// [leader x, leader y, follower x, follower y, other's previous action (-1 = none)],
/// plus a 4-wide target one-hot for the leader only.
std::vector<double> maze_observe(const MazeWorld& world, std::size_t agent);

/// Dense index of the joint position state; the empirical recognizer's key.
std::uint64_t maze_state_code(Cell leader, Cell follower);
std::uint64_t maze_state_code(const MazeWorld& world);

/// `step,leader_x,leader_y,follower_x,follower_y,target,leader_prev,follower_prev`
void write_maze_snapshot_header(std::ostream& out);
void write_maze_snapshot(std::ostream& out, const MazeWorld& world);

/// Breadth-first distances (in moves) from `from` to every cell; -1 when unreachable.
std::vector<int> maze_distances(const MazeLayout& layout, Cell from);

}  // namespace maal
