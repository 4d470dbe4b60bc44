#include "maal/legibility.hpp"

#include <algorithm>

#include "maal/errors.hpp"

namespace maal {

AugmentedObservation augment(std::span<const double> obs, OneHotGoal goal, std::size_t n_goals,
                             std::span<const GoalDistribution> beliefs) {
  if (goal.index >= n_goals) throw ConfigError("goal index out of range");
  AugmentedObservation a;
  a.obs.assign(obs.begin(), obs.end());
  a.own_goal.assign(n_goals, 0.0);
  a.own_goal[goal.index] = 1.0;
  for (const auto& b : beliefs) {
    if (b.size() != n_goals) throw ConfigError("belief length does not match goal count");
  }
  a.others_beliefs = concat_beliefs(beliefs);
  return a;
}

double shape_reward(double raw, double klg, double beta) { return raw + beta * klg; }

LegibilityPipeline::LegibilityPipeline(MultiAgentEnv& env, std::vector<Learner*> learners, Topology topology,
                                       ShapingConfig shaping, std::vector<Rng> exploration)
    : env_(&env),
      learners_(std::move(learners)),
      topology_(std::move(topology)),
      shaping_(std::move(shaping)),
      rngs_(std::move(exploration)) {
  const std::size_t n = env.num_agents();
  if (learners_.size() != n || rngs_.size() != n || topology_.knows_goal.size() != n) {
    throw ConfigError("pipeline needs one learner, one RNG and one role per agent");
  }
  for (const auto* l : learners_) {
    if (l == nullptr || l->num_actions() != env.num_actions()) throw ConfigError("learner/action count mismatch");
  }
  if (!(shaping_.beta >= 0.0)) throw ConfigError("beta must be non-negative");
  validate_mode(shaping_.mode, env.num_goals());

  primary_link_.assign(n, -1);
  recognizers_.reserve(topology_.links.size());
  for (std::size_t k = 0; k < topology_.links.size(); ++k) {
    const auto& link = topology_.links[k];
    if (link.observer >= n || link.observed >= n || link.observer == link.observed) {
      throw ConfigError("invalid recognition link");
    }
    if (link.backend == nullptr || link.backend->num_goals() != env.num_goals() ||
        link.backend->num_actions() != env.num_actions()) {
      throw ConfigError("recognition backend shape does not match the environment");
    }
    recognizers_.emplace_back(*link.backend, link.observed);
    if (primary_link_[link.observer] < 0) primary_link_[link.observer] = static_cast<int>(k);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!topology_.knows_goal[i] && primary_link_[i] < 0) {
      throw ConfigError("goal-less agent must observe someone to estimate a goal");
    }
  }

  estimators_.resize(n);
  for (std::size_t agent : shaping_.shaped_agents) {
    if (agent >= n) throw ConfigError("shaped agent out of range");
    SelfBeliefEstimator est;
    for (std::size_t k = 0; k < topology_.links.size(); ++k) {
      if (topology_.links[k].observed != agent) continue;
      auto w = shaping_.omega.find({agent, topology_.links[k].observer});
      est.add_observer(recognizers_[k], w == shaping_.omega.end() ? 1.0 : w->second);
    }
    if (est.num_observers() == 0) throw ConfigError("shaped agent is not observed by anyone");
    estimators_[agent] = std::move(est);
  }
  trajectories_.resize(topology_.links.size());
}

void LegibilityPipeline::begin_episode() {
  for (auto& r : recognizers_) r.reset();
  for (auto& tr : trajectories_) tr.clear();
  for (std::size_t agent : shaping_.shaped_agents) {
    if (!env_->goal_of(agent)) throw ConfigError("shaped agent has no goal this episode");
  }
  t_ = 0;
  active_ = true;
  prev_aug_.clear();
  prev_actions_.clear();
  prev_rewards_.clear();
  prev_keys_.clear();
  prev_self_.clear();
}

std::vector<std::optional<GoalDistribution>> LegibilityPipeline::self_beliefs() const {
  std::vector<std::optional<GoalDistribution>> out(estimators_.size());
  if (!shaping_.enabled) return out;
  for (std::size_t i = 0; i < estimators_.size(); ++i) {
    if (estimators_[i]) out[i] = estimators_[i]->estimate();
  }
  return out;
}

void LegibilityPipeline::update_recognizers(std::span<const ObservationKey> keys,
                                            std::span<const std::size_t> actions, StepOutput& out) {
  std::vector<GoalDistribution> round;
  round.reserve(recognizers_.size());
  for (std::size_t k = 0; k < recognizers_.size(); ++k) {
    const std::size_t observed = topology_.links[k].observed;
    recognizers_[k].step(keys[k], actions[observed]);
    trajectories_[k].push_back({keys[k], actions[observed]});
    round.push_back(recognizers_[k].belief());
  }
  out.belief_rounds.push_back(std::move(round));
}

AugmentedObservation LegibilityPipeline::build_augmented(std::size_t agent) const {
  const std::size_t n_goals = env_->num_goals();
  std::size_t goal = 0;
  if (topology_.knows_goal[agent]) {
    const auto g = env_->goal_of(agent);
    if (!g) throw ConfigError("agent marked as knowing its goal has none");
    goal = *g;
  } else {
    goal = recognizers_[static_cast<std::size_t>(primary_link_[agent])].belief().argmax();
  }
  std::vector<GoalDistribution> beliefs;
  beliefs.reserve(env_->num_agents() - 1);
  for (std::size_t j = 0; j < env_->num_agents(); ++j) {
    if (j == agent) continue;
    const GoalDistribution* found = nullptr;
    for (std::size_t k = 0; k < topology_.links.size(); ++k) {
      if (topology_.links[k].observer == agent && topology_.links[k].observed == j) {
        found = &recognizers_[k].belief();
        break;
      }
    }
    beliefs.push_back(found ? *found : uniform(n_goals));
  }
  return augment(env_->observe(agent), OneHotGoal{goal}, n_goals, beliefs);
}

double LegibilityPipeline::klg_for(std::size_t agent, const std::optional<GoalDistribution>& before,
                                   const std::optional<GoalDistribution>& after) const {
  if (!shaping_.enabled || !before || !after) return 0.0;
  const auto goal = env_->goal_of(agent);
  return kl_gain(*before, *after, OneHotGoal{*goal}, shaping_.mode);
}

StepOutput LegibilityPipeline::step(double epsilon) {
  if (!active_) throw StateError("pipeline episode is not active");
  const std::size_t n = env_->num_agents();
  StepOutput out;
  out.klg.assign(n, 0.0);

  if (t_ > 0) update_recognizers(prev_keys_, prev_actions_, out);
  auto self_now = self_beliefs();

  std::vector<AugmentedObservation> aug_now;
  aug_now.reserve(n);
  std::vector<double> q(env_->num_actions());
  out.actions.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    aug_now.push_back(build_augmented(i));
    learners_[i]->action_values(aug_now.back(), q);
    out.actions[i] = select_action(q, epsilon, rngs_[i]);
  }
  std::vector<ObservationKey> keys_now(topology_.links.size());
  for (std::size_t k = 0; k < keys_now.size(); ++k) {
    keys_now[k] = env_->observation_key(topology_.links[k].observer, topology_.links[k].observed);
  }

  const EnvStep env_step = env_->step(out.actions);
  out.rewards_raw = env_step.rewards;
  out.done = env_step.done;
  out.success = env_step.success;

  auto emit = [&](std::size_t i, AugmentedObservation s, std::size_t a, AugmentedObservation s_next,
                  std::size_t a_next, bool done, double raw, double klg) {
    ShapedTransition tr;
    tr.agent = i;
    tr.s_aug = std::move(s);
    tr.action = a;
    tr.s_aug_next = std::move(s_next);
    tr.action_next = a_next;
    tr.done = done;
    tr.reward_raw = raw;
    tr.klg = klg;
    tr.reward_shaped = shaping_.enabled ? shape_reward(raw, klg, shaping_.beta) : raw;
    out.transitions.push_back(std::move(tr));
  };

  if (t_ > 0) {
    for (std::size_t i = 0; i < n; ++i) {
      out.klg[i] = klg_for(i, prev_self_[i], self_now[i]);
      emit(i, std::move(prev_aug_[i]), prev_actions_[i], aug_now[i], out.actions[i], false, prev_rewards_[i],
           out.klg[i]);
    }
  }

  if (env_step.done) {
    update_recognizers(keys_now, out.actions, out);
    const auto self_next = self_beliefs();
    for (std::size_t i = 0; i < n; ++i) {
      const double klg = klg_for(i, self_now[i], self_next[i]);
      emit(i, std::move(aug_now[i]), out.actions[i], build_augmented(i), out.actions[i], true,
           env_step.rewards[i], klg);
    }
    active_ = false;
  } else {
    prev_aug_ = std::move(aug_now);
    prev_actions_ = out.actions;
    prev_rewards_ = env_step.rewards;
    prev_keys_ = std::move(keys_now);
    prev_self_ = std::move(self_now);
  }
  ++t_;
  return out;
}

}  // namespace maal
