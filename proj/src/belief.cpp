#include "maal/belief.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "maal/errors.hpp"

namespace maal {

GoalSet::GoalSet(std::vector<std::string> labels) : labels_(std::move(labels)) {
  if (labels_.size() < 2) throw ConfigError("goal set needs at least two goals");
  std::unordered_set<std::string> seen;
  for (const auto& l : labels_) {
    if (!seen.insert(l).second) throw ConfigError("duplicate goal label: " + l);
  }
}

std::optional<std::size_t> GoalSet::index_of(std::string_view label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - labels_.begin());
}

OneHotGoal make_goal(std::size_t index, std::size_t n_goals) {
  if (index >= n_goals) throw ConfigError("goal index out of range");
  return OneHotGoal{index};
}

GoalDistribution GoalDistribution::from_probs(std::vector<double> probs) {
  if (probs.empty()) throw ConfigError("empty distribution");
  double total = 0.0;
  for (double p : probs) {
    if (!std::isfinite(p) || p < 0.0) throw ConfigError("distribution entry negative or non-finite");
    total += p;
  }
  if (std::abs(total - 1.0) > kSimplexTolerance) throw ConfigError("distribution does not sum to 1");
  if (total != 1.0) {
    for (double& p : probs) p /= total;
  }
  return GoalDistribution(std::move(probs));
}

GoalDistribution GoalDistribution::one_hot(std::size_t n_goals, std::size_t index) {
  if (index >= n_goals) throw ConfigError("goal index out of range");
  std::vector<double> p(n_goals, 0.0);
  p[index] = 1.0;
  return GoalDistribution(std::move(p));
}

GoalDistribution GoalDistribution::floored(double floor) const {
  const std::size_t n = probs_.size();
  if (!(floor > 0.0) || floor * static_cast<double>(n) >= 1.0) throw ConfigError("invalid floor");
  if (*std::min_element(probs_.begin(), probs_.end()) >= floor) return *this;
  std::vector<double> out = probs_;
  std::vector<bool> pinned(n, false);
  // Pin entries at the floor and rescale the free ones; repeat until nothing new dips below.
  for (std::size_t round = 0; round <= n; ++round) {
    double pinned_mass = 0.0;
    double free_mass = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (pinned[i]) {
        pinned_mass += floor;
      } else {
        free_mass += out[i];
      }
    }
    const double scale = (1.0 - pinned_mass) / free_mass;
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (pinned[i]) {
        out[i] = floor;
      } else if (out[i] * scale < floor) {
        pinned[i] = true;
        changed = true;
      }
    }
    if (!changed) {
      for (std::size_t i = 0; i < n; ++i) {
        if (!pinned[i]) out[i] *= scale;
      }
      break;
    }
  }
  return GoalDistribution(std::move(out));
}

std::size_t GoalDistribution::argmax() const noexcept {
  return static_cast<std::size_t>(std::max_element(probs_.begin(), probs_.end()) - probs_.begin());
}

bool GoalDistribution::has_unique_max() const noexcept {
  const double top = probs_[argmax()];
  return std::count(probs_.begin(), probs_.end(), top) == 1;
}

void validate_mode(const DivergenceMode& mode, std::size_t n_goals) {
  if (const auto* s = std::get_if<SmoothedForwardKL>(&mode)) {
    if (!(s->eps_smooth > 0.0) || s->eps_smooth >= 0.5 / static_cast<double>(n_goals)) {
      throw ConfigError("eps_smooth must lie in (0, 0.5/|G|)");
    }
  }
}

std::string mode_name(const DivergenceMode& mode) {
  return std::holds_alternative<ReverseKL>(mode) ? "reverse_kl" : "smoothed_forward_kl";
}

GoalDistribution uniform(const GoalSet& goals) { return uniform(goals.size()); }

GoalDistribution uniform(std::size_t n_goals) {
  if (n_goals < 2) throw ConfigError("goal set needs at least two goals");
  return GoalDistribution::from_probs(std::vector<double>(n_goals, 1.0 / static_cast<double>(n_goals)));
}

Divergence divergence_to_goal(const GoalDistribution& belief, OneHotGoal goal,
                              const DivergenceMode& mode) {
  const std::size_t n = belief.size();
  if (goal.index >= n) throw ConfigError("goal index out of range");
  if (std::holds_alternative<ReverseKL>(mode)) {
    const double p = belief[goal.index];
    if (p < kProbFloor) return {-std::log(kProbFloor), true};
    // -ln(1) would be -0.0
    return {p == 1.0 ? 0.0 : -std::log(p), false};
  }
  const double eps = std::get<SmoothedForwardKL>(mode).eps_smooth;
  validate_mode(mode, n);
  const double on_goal = 1.0 - eps * static_cast<double>(n - 1);
  double d = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double b = belief[k];
    if (b <= 0.0) continue;
    d += b * std::log(b / (k == goal.index ? on_goal : eps));
  }
  return {std::max(d, 0.0), false};
}

double kl_gain(const GoalDistribution& before, const GoalDistribution& after, OneHotGoal goal,
               const DivergenceMode& mode) {
  if (before.size() != after.size()) throw ConfigError("belief size mismatch");
  return divergence_to_goal(before, goal, mode).value - divergence_to_goal(after, goal, mode).value;
}

std::vector<double> concat_beliefs(std::span<const GoalDistribution> parts) {
  std::vector<double> out;
  if (parts.empty()) return out;
  const std::size_t n = parts.front().size();
  out.reserve(parts.size() * n);
  for (const auto& p : parts) {
    if (p.size() != n) throw ConfigError("beliefs over different goal sets");
    out.insert(out.end(), p.probs().begin(), p.probs().end());
  }
  return out;
}

GoalDistribution aggregate_self_belief(std::span<const GoalDistribution> per_observer,
                                       std::span<const double> weights) {
  if (per_observer.empty()) throw ConfigError("no observers to aggregate");
  if (per_observer.size() != weights.size()) throw ConfigError("observer/weight count mismatch");
  const std::size_t n = per_observer.front().size();
  std::vector<double> acc(n, 0.0);
  double weight_total = 0.0;
  for (std::size_t j = 0; j < per_observer.size(); ++j) {
    const double w = weights[j];
    if (!std::isfinite(w) || w < 0.0) throw ConfigError("weights must be non-negative");
    if (per_observer[j].size() != n) throw ConfigError("beliefs over different goal sets");
    weight_total += w;
    for (std::size_t k = 0; k < n; ++k) acc[k] += w * per_observer[j][k];
  }
  if (weight_total <= 0.0) throw ConfigError("all aggregation weights are zero");
  const double observers = static_cast<double>(per_observer.size());
  for (double& a : acc) a /= observers;
  const double mass = std::accumulate(acc.begin(), acc.end(), 0.0);
  for (double& a : acc) a /= mass;
  return GoalDistribution::from_probs(std::move(acc));
}

}  // namespace maal
