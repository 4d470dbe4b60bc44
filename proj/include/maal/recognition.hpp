#pragma once

// Goal recognition: action-likelihood backends, the Bayesian belief filter run
// by each observer, and the self-belief query an agent makes of its observers.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <unordered_map>
#include <vector>

#include "maal/belief.hpp"
#include "maal/episode.hpp"

namespace maal {

/// Likelihood of one observed action under each goal.
class ActionLikelihood {
 public:
  virtual ~ActionLikelihood() = default;
  virtual std::size_t num_goals() const = 0;
  virtual std::size_t num_actions() const = 0;
  /// Entry k is P(action | key, goal k); every entry is at least kProbFloor.
  virtual std::vector<double> likelihood(ObservationKey key, std::size_t action) const = 0;
};

/// Laplace-smoothed action counts per (observation, goal), learned from labelled episodes.
class EmpiricalPolicyModel final : public ActionLikelihood {
 public:
  EmpiricalPolicyModel(std::size_t n_goals, std::size_t n_actions, double laplace_alpha = 1.0);

  std::size_t num_goals() const override { return n_goals_; }
  std::size_t num_actions() const override { return n_actions_; }
  double laplace_alpha() const noexcept { return alpha_; }

  std::vector<double> likelihood(ObservationKey key, std::size_t action) const override;

  void add(ObservationKey key, std::size_t goal, std::size_t action, std::uint64_t count = 1);
  std::uint64_t count(ObservationKey key, std::size_t goal, std::size_t action) const;
  std::size_t num_keys() const noexcept { return counts_.size(); }
  std::uint64_t total_count() const noexcept { return total_; }

  /// Rows `observation_key,goal,action,count`, sorted, non-zero counts only.
  void write_csv(std::ostream& out) const;
  static EmpiricalPolicyModel read_csv(std::istream& in, std::size_t n_goals, std::size_t n_actions,
                                       double laplace_alpha = 1.0);

  friend bool operator==(const EmpiricalPolicyModel& a, const EmpiricalPolicyModel& b) {
    return a.n_goals_ == b.n_goals_ && a.n_actions_ == b.n_actions_ && a.alpha_ == b.alpha_ &&
           a.counts_ == b.counts_;
  }

 private:
  std::size_t n_goals_;
  std::size_t n_actions_;
  double alpha_;
  std::uint64_t total_ = 0;
  // key -> n_goals * n_actions counts, goal-major
  std::unordered_map<ObservationKey, std::vector<std::uint32_t>> counts_;
};

/// Goal-conditioned action values the max-entropy model reads from.
class GoalActionValues {
 public:
  virtual ~GoalActionValues() = default;
  virtual std::size_t num_goals() const = 0;
  virtual std::size_t num_actions() const = 0;
  /// Fills `out` (size goals*actions, goal-major) with Q_goal(key, action).
  virtual void values(ObservationKey key, std::span<double> out) const = 0;
};

/// Explicit table of goal-conditioned action values; absent keys read as all zeros.
class TabularGoalValues final : public GoalActionValues {
 public:
  TabularGoalValues(std::size_t n_goals, std::size_t n_actions);
  std::size_t num_goals() const override { return n_goals_; }
  std::size_t num_actions() const override { return n_actions_; }
  void values(ObservationKey key, std::span<double> out) const override;
  void set(ObservationKey key, std::size_t goal, std::size_t action, double value);

 private:
  std::size_t n_goals_;
  std::size_t n_actions_;
  std::unordered_map<ObservationKey, std::vector<double>> table_;
};

/// Boltzmann action model per goal: P(a | key, g) = softmax_a(temperature * Q_g(key, a)).
class MaxEntLikelihoodModel final : public ActionLikelihood {
 public:
  explicit MaxEntLikelihoodModel(std::shared_ptr<const GoalActionValues> q_source,
                                 double temperature = 1.0);

  std::size_t num_goals() const override { return q_->num_goals(); }
  std::size_t num_actions() const override { return q_->num_actions(); }
  double temperature() const noexcept { return temperature_; }
  std::vector<double> likelihood(ObservationKey key, std::size_t action) const override;

 private:
  std::shared_ptr<const GoalActionValues> q_;
  double temperature_;
};

struct BayesResult {
  GoalDistribution posterior;
  bool degenerate = false;  // normalizer underflowed; prior returned unchanged
};

/// posterior(k) proportional to likelihood(k) * prior(k).
BayesResult bayes_update(const GoalDistribution& prior, std::span<const double> likelihood);

/// One observer's running belief about one observed agent's goal.
class Recognizer {
 public:
  Recognizer(const ActionLikelihood& backend, std::size_t observed_agent);

  /// Back to the uniform prior; called at episode start.
  void reset();
  /// Folds in one observed action taken under `key`; returns the new belief.
  const GoalDistribution& step(ObservationKey key, std::size_t action);

  const GoalDistribution& belief() const noexcept { return belief_; }
  std::size_t observed_agent() const noexcept { return observed_; }
  bool last_update_degenerate() const noexcept { return degenerate_; }
  const ActionLikelihood& backend() const noexcept { return *backend_; }

 private:
  const ActionLikelihood* backend_;
  std::size_t observed_;
  GoalDistribution belief_;
  bool degenerate_ = false;
};

/// Adds one count per observed step under the revealed goal.
void train_empirical(EmpiricalPolicyModel& model, std::span<const ObservedStep> trajectory,
                     OneHotGoal true_goal);
void train_empirical(EmpiricalPolicyModel& model, const EpisodeRecord& episode);

/// How the agents watching me currently predict my goal, by querying their recognizers.
class SelfBeliefEstimator {
 public:
  SelfBeliefEstimator() = default;
  void add_observer(const Recognizer& recognizer_of_me, double weight = 1.0);
  std::size_t num_observers() const noexcept { return observers_.size(); }

  GoalDistribution estimate() const;

 private:
  std::vector<const Recognizer*> observers_;
  std::vector<double> weights_;
};

}  // namespace maal
