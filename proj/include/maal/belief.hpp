#pragma once

// Goal sets, beliefs over goals and the divergence/aggregation operators the
// legibility reward is built from.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace maal {

/// Clamp applied to probabilities before any logarithm.
inline constexpr double kProbFloor = 1e-12;
/// Allowed deviation of a belief's total mass from 1.
inline constexpr double kSimplexTolerance = 1e-9;

/// Ordered, fixed set of goal labels. Index i names the same goal for the whole run.
class GoalSet {
 public:
  explicit GoalSet(std::vector<std::string> labels);

  std::size_t size() const noexcept { return labels_.size(); }
  const std::string& label(std::size_t index) const { return labels_.at(index); }
  std::optional<std::size_t> index_of(std::string_view label) const;
  const std::vector<std::string>& labels() const noexcept { return labels_; }

 private:
  std::vector<std::string> labels_;
};

/// The true goal of an agent, as an index into its GoalSet.
struct OneHotGoal {
  std::size_t index = 0;

  friend bool operator==(const OneHotGoal&, const OneHotGoal&) = default;
};

/// Throws ConfigError unless index < n_goals.
OneHotGoal make_goal(std::size_t index, std::size_t n_goals);

/// A point on the probability simplex over a GoalSet.
class GoalDistribution {
 public:
  /// Validates non-negativity and unit mass (within kSimplexTolerance), then normalizes.
  static GoalDistribution from_probs(std::vector<double> probs);
  static GoalDistribution one_hot(std::size_t n_goals, std::size_t index);

  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::span<const double> probs() const noexcept { return probs_; }

  /// Every entry raised to at least `floor`, total mass kept at 1.
  GoalDistribution floored(double floor = kProbFloor) const;

  /// Lowest index attaining the maximum.
  std::size_t argmax() const noexcept;
  /// True when exactly one index attains the maximum.
  bool has_unique_max() const noexcept;

  friend bool operator==(const GoalDistribution&, const GoalDistribution&) = default;

 private:
  explicit GoalDistribution(std::vector<double> probs) : probs_(std::move(probs)) {}
  std::vector<double> probs_;
};

/// D_KL(g || b) with g one-hot, i.e. -ln b(g*). Finite whenever b(g*) > 0.
struct ReverseKL {};

/// D_KL(b || g~) against a one-hot target smoothed to eps_smooth off-goal.
struct SmoothedForwardKL {
  double eps_smooth = 1e-3;
};

using DivergenceMode = std::variant<ReverseKL, SmoothedForwardKL>;

/// Throws ConfigError unless eps_smooth lies in (0, 0.5/n_goals).
void validate_mode(const DivergenceMode& mode, std::size_t n_goals);
std::string mode_name(const DivergenceMode& mode);

struct Divergence {
  double value = 0.0;
  bool clamped = false;  // b(g*) fell below kProbFloor and was clamped
};

GoalDistribution uniform(const GoalSet& goals);
GoalDistribution uniform(std::size_t n_goals);

Divergence divergence_to_goal(const GoalDistribution& belief, OneHotGoal goal,
                              const DivergenceMode& mode = ReverseKL{});

/// Divergence before minus divergence after; positive when the belief moved toward the goal.
double kl_gain(const GoalDistribution& before, const GoalDistribution& after, OneHotGoal goal,
               const DivergenceMode& mode = ReverseKL{});

/// Contiguous concatenation of per-agent beliefs, in the caller's agent order.
std::vector<double> concat_beliefs(std::span<const GoalDistribution> parts);

/// Weighted mean of observers' beliefs about one agent, renormalized onto the simplex.
GoalDistribution aggregate_self_belief(std::span<const GoalDistribution> per_observer,
                                       std::span<const double> weights);

}  // namespace maal
