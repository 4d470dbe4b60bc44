#pragma once

// The shaping pipeline: every agent tracks the goals of the agents it watches,
// queries how it is itself being read, acts on the augmented observation and is
// paid beta times the KL-divergence gain its previous action produced.

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "maal/belief.hpp"
#include "maal/episode.hpp"
#include "maal/learners.hpp"
#include "maal/recognition.hpp"
#include "maal/transition.hpp"

namespace maal {

struct EnvStep {
  std::vector<double> rewards;
  bool done = false;
  bool success = false;
};

/// The environment surface the pipeline drives.
class MultiAgentEnv {
 public:
  virtual ~MultiAgentEnv() = default;
  virtual std::size_t num_agents() const = 0;
  virtual std::size_t num_actions() const = 0;
  virtual std::size_t num_goals() const = 0;
  /// The goal an agent is pursuing (what observers try to infer); nullopt for goal-less agents.
  virtual std::optional<std::size_t> goal_of(std::size_t agent) const = 0;
  virtual std::vector<double> observe(std::size_t agent) const = 0;
  /// Key under which an observer files the observed agent's next action.
  virtual ObservationKey observation_key(std::size_t observer, std::size_t observed) const = 0;
  virtual EnvStep step(std::span<const std::size_t> actions) = 0;
  virtual bool done() const = 0;
};

struct RecognitionLink {
  std::size_t observer = 0;
  std::size_t observed = 0;
  const ActionLikelihood* backend = nullptr;
};

struct Topology {
  std::vector<bool> knows_goal;  // per agent: true goal in the goal block, else argmax estimate
  std::vector<RecognitionLink> links;
};

struct ShapingConfig {
  double beta = 0.0;
  DivergenceMode mode = ReverseKL{};
  std::vector<std::size_t> shaped_agents;
  /// (agent, observer) -> weight of that observer's view in the agent's self-belief; default 1.
  std::map<std::pair<std::size_t, std::size_t>, double> omega;
  /// When false the legibility computation is skipped entirely and rewards pass through.
  bool enabled = true;
};

AugmentedObservation augment(std::span<const double> obs, OneHotGoal goal, std::size_t n_goals,
                             std::span<const GoalDistribution> beliefs);

double shape_reward(double raw, double klg, double beta);

struct StepOutput {
  std::vector<std::size_t> actions;    // joint action chosen this step
  std::vector<double> rewards_raw;     // environment rewards for that action
  std::vector<double> klg;             // per agent, gain credited to the previous action (0 at t=0)
  std::vector<ShapedTransition> transitions;
  /// Link beliefs after each recognizer round run during this call (0, 1, or 2 rounds).
  std::vector<std::vector<GoalDistribution>> belief_rounds;
  bool done = false;
  bool success = false;
};

class LegibilityPipeline {
 public:
  LegibilityPipeline(MultiAgentEnv& env, std::vector<Learner*> learners, Topology topology,
                     ShapingConfig shaping, std::vector<Rng> exploration);

  /// Resets recognizers to uniform and clears per-episode state; call after resetting the env.
  void begin_episode();
  /// One synchronized time step. When the environment finishes, the last action's transition
  /// is flushed in the same call.
  StepOutput step(double epsilon);

  bool active() const noexcept { return active_; }
  std::size_t time() const noexcept { return t_; }
  const std::vector<Recognizer>& recognizers() const noexcept { return recognizers_; }
  const Topology& topology() const noexcept { return topology_; }
  const ShapingConfig& shaping() const noexcept { return shaping_; }
  /// (key, action) pairs the observed agent of `link` produced this episode.
  const std::vector<ObservedStep>& link_trajectory(std::size_t link) const { return trajectories_.at(link); }
  /// Self-belief of every shaped agent (empty optional for unshaped agents).
  std::vector<std::optional<GoalDistribution>> self_beliefs() const;

 private:
  void update_recognizers(std::span<const ObservationKey> keys, std::span<const std::size_t> actions,
                          StepOutput& out);
  AugmentedObservation build_augmented(std::size_t agent) const;
  double klg_for(std::size_t agent, const std::optional<GoalDistribution>& before,
                 const std::optional<GoalDistribution>& after) const;

  MultiAgentEnv* env_;
  std::vector<Learner*> learners_;
  Topology topology_;
  ShapingConfig shaping_;
  std::vector<Rng> rngs_;
  std::vector<Recognizer> recognizers_;
  std::vector<std::optional<SelfBeliefEstimator>> estimators_;
  std::vector<int> primary_link_;  // per agent, first link where it is the observer
  std::vector<std::vector<ObservedStep>> trajectories_;

  bool active_ = false;
  std::size_t t_ = 0;
  std::vector<AugmentedObservation> prev_aug_;
  std::vector<std::size_t> prev_actions_;
  std::vector<double> prev_rewards_;
  std::vector<ObservationKey> prev_keys_;
  std::vector<std::optional<GoalDistribution>> prev_self_;
};

}  // namespace maal
