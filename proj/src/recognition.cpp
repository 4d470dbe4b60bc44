#include "maal/recognition.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>

#include "maal/errors.hpp"

namespace maal {

EmpiricalPolicyModel::EmpiricalPolicyModel(std::size_t n_goals, std::size_t n_actions,
                                           double laplace_alpha)
    : n_goals_(n_goals), n_actions_(n_actions), alpha_(laplace_alpha) {
  if (n_goals < 2) throw ConfigError("empirical model needs at least two goals");
  if (n_actions < 1) throw ConfigError("empirical model needs at least one action");
  if (!(laplace_alpha > 0.0) || !std::isfinite(laplace_alpha)) {
    throw ConfigError("laplace_alpha must be positive");
  }
}

std::vector<double> EmpiricalPolicyModel::likelihood(ObservationKey key, std::size_t action) const {
  if (action >= n_actions_) throw ConfigError("action index out of range");
  const double actions = static_cast<double>(n_actions_);
  auto it = counts_.find(key);
  if (it == counts_.end()) return std::vector<double>(n_goals_, 1.0 / actions);
  std::vector<double> out(n_goals_);
  const auto& c = it->second;
  for (std::size_t g = 0; g < n_goals_; ++g) {
    std::uint64_t row_total = 0;
    for (std::size_t a = 0; a < n_actions_; ++a) row_total += c[g * n_actions_ + a];
    const double hit = static_cast<double>(c[g * n_actions_ + action]);
    out[g] = std::max((hit + alpha_) / (static_cast<double>(row_total) + alpha_ * actions), kProbFloor);
  }
  return out;
}

void EmpiricalPolicyModel::add(ObservationKey key, std::size_t goal, std::size_t action,
                               std::uint64_t count) {
  if (goal >= n_goals_) throw ConfigError("goal index out of range");
  if (action >= n_actions_) throw ConfigError("action index out of range");
  auto& row = counts_[key];
  if (row.empty()) row.assign(n_goals_ * n_actions_, 0);
  row[goal * n_actions_ + action] += static_cast<std::uint32_t>(count);
  total_ += count;
}

std::uint64_t EmpiricalPolicyModel::count(ObservationKey key, std::size_t goal,
                                          std::size_t action) const {
  auto it = counts_.find(key);
  if (it == counts_.end() || goal >= n_goals_ || action >= n_actions_) return 0;
  return it->second[goal * n_actions_ + action];
}

void EmpiricalPolicyModel::write_csv(std::ostream& out) const {
  std::vector<std::tuple<ObservationKey, std::size_t, std::size_t, std::uint32_t>> rows;
  for (const auto& [key, c] : counts_) {
    for (std::size_t g = 0; g < n_goals_; ++g) {
      for (std::size_t a = 0; a < n_actions_; ++a) {
        if (c[g * n_actions_ + a] != 0) rows.emplace_back(key, g, a, c[g * n_actions_ + a]);
      }
    }
  }
  std::sort(rows.begin(), rows.end());
  out << "observation_key,goal,action,count\n";
  for (const auto& [key, g, a, n] : rows) out << key << ',' << g << ',' << a << ',' << n << '\n';
}

EmpiricalPolicyModel EmpiricalPolicyModel::read_csv(std::istream& in, std::size_t n_goals,
                                                    std::size_t n_actions, double laplace_alpha) {
  EmpiricalPolicyModel model(n_goals, n_actions, laplace_alpha);
  std::string line;
  if (!std::getline(in, line) || line != "observation_key,goal,action,count") {
    throw ConfigError("empirical model CSV: bad header");
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    ObservationKey key = 0;
    std::size_t goal = 0;
    std::size_t action = 0;
    std::uint64_t n = 0;
    char c1 = 0, c2 = 0, c3 = 0;
    if (!(row >> key >> c1 >> goal >> c2 >> action >> c3 >> n) || c1 != ',' || c2 != ',' || c3 != ',') {
      throw ConfigError("empirical model CSV: malformed line " + std::to_string(line_no));
    }
    model.add(key, goal, action, n);
  }
  return model;
}

TabularGoalValues::TabularGoalValues(std::size_t n_goals, std::size_t n_actions)
    : n_goals_(n_goals), n_actions_(n_actions) {
  if (n_goals < 2 || n_actions < 1) throw ConfigError("invalid goal-value table shape");
}

void TabularGoalValues::values(ObservationKey key, std::span<double> out) const {
  auto it = table_.find(key);
  if (it == table_.end()) {
    std::fill(out.begin(), out.end(), 0.0);
  } else {
    std::copy(it->second.begin(), it->second.end(), out.begin());
  }
}

void TabularGoalValues::set(ObservationKey key, std::size_t goal, std::size_t action, double value) {
  if (goal >= n_goals_ || action >= n_actions_) throw ConfigError("goal/action out of range");
  if (!std::isfinite(value)) throw NumericError("non-finite goal value");
  auto& row = table_[key];
  if (row.empty()) row.assign(n_goals_ * n_actions_, 0.0);
  row[goal * n_actions_ + action] = value;
}

MaxEntLikelihoodModel::MaxEntLikelihoodModel(std::shared_ptr<const GoalActionValues> q_source,
                                             double temperature)
    : q_(std::move(q_source)), temperature_(temperature) {
  if (!q_) throw ConfigError("max-entropy model needs a value source");
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw ConfigError("temperature must be positive");
  }
}

std::vector<double> MaxEntLikelihoodModel::likelihood(ObservationKey key, std::size_t action) const {
  const std::size_t n_goals = q_->num_goals();
  const std::size_t n_actions = q_->num_actions();
  if (action >= n_actions) throw ConfigError("action index out of range");
  std::vector<double> q(n_goals * n_actions);
  q_->values(key, q);
  std::vector<double> out(n_goals);
  for (std::size_t g = 0; g < n_goals; ++g) {
    const double* row = q.data() + g * n_actions;
    const double top = *std::max_element(row, row + n_actions);
    double z = 0.0;
    for (std::size_t a = 0; a < n_actions; ++a) z += std::exp(temperature_ * (row[a] - top));
    out[g] = std::max(std::exp(temperature_ * (row[action] - top)) / z, kProbFloor);
  }
  return out;
}

BayesResult bayes_update(const GoalDistribution& prior, std::span<const double> likelihood) {
  const std::size_t n = prior.size();
  if (likelihood.size() != n) throw ConfigError("likelihood size does not match belief");
  std::vector<double> joint(n);
  double z = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double l = likelihood[k];
    if (!std::isfinite(l) || l < 0.0) throw ConfigError("likelihood entries must be finite and non-negative");
    joint[k] = l * prior[k];
    z += joint[k];
  }
  if (!(z >= 1e-300)) return {prior, true};
  for (double& j : joint) j /= z;
  return {GoalDistribution::from_probs(std::move(joint)), false};
}

Recognizer::Recognizer(const ActionLikelihood& backend, std::size_t observed_agent)
    : backend_(&backend), observed_(observed_agent), belief_(uniform(backend.num_goals())) {}

void Recognizer::reset() {
  belief_ = uniform(backend_->num_goals());
  degenerate_ = false;
}

const GoalDistribution& Recognizer::step(ObservationKey key, std::size_t action) {
  const auto like = backend_->likelihood(key, action);
  auto result = bayes_update(belief_, like);
  degenerate_ = result.degenerate;
  // Keep every goal recoverable after long runs of contrary evidence.
  belief_ = result.posterior.floored(kProbFloor);
  return belief_;
}

void train_empirical(EmpiricalPolicyModel& model, std::span<const ObservedStep> trajectory,
                     OneHotGoal true_goal) {
  for (const auto& s : trajectory) model.add(s.key, true_goal.index, s.action);
}

void train_empirical(EmpiricalPolicyModel& model, const EpisodeRecord& episode) {
  train_empirical(model, episode.observed_trajectory, make_goal(episode.true_goal, model.num_goals()));
}

void SelfBeliefEstimator::add_observer(const Recognizer& recognizer_of_me, double weight) {
  if (!std::isfinite(weight) || weight < 0.0) throw ConfigError("observer weight must be non-negative");
  observers_.push_back(&recognizer_of_me);
  weights_.push_back(weight);
}

GoalDistribution SelfBeliefEstimator::estimate() const {
  if (observers_.empty()) throw ConfigError("self-belief undefined: nobody observes this agent");
  if (observers_.size() == 1 && weights_.front() > 0.0) return observers_.front()->belief();
  std::vector<GoalDistribution> beliefs;
  beliefs.reserve(observers_.size());
  for (const auto* r : observers_) beliefs.push_back(r->belief());
  return aggregate_self_belief(beliefs, weights_);
}

}  // namespace maal
