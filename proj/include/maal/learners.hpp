#pragma once

// Value learners fed by shaped transitions: tabular Q-learning and SARSA over a
// compressed discrete key, and a tile-coded linear learner for continuous inputs.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <span>
#include <unordered_map>
#include <vector>

#include "maal/transition.hpp"

namespace maal {

using Rng = std::mt19937_64;

/// Epsilon-greedy over action values; ties go to the lowest index.
std::size_t select_action(std::span<const double> q_values, double epsilon, Rng& rng);
std::size_t greedy_action(std::span<const double> q_values);

struct LearnerConfig {
  double alpha = 0.1;
  double gamma = 0.95;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  double epsilon_decay_fraction = 0.8;

  void validate() const;
  /// Linear decay from start to end over the first decay_fraction of the episodes.
  double epsilon_at(std::size_t episode, std::size_t total_episodes) const;
};

/// Confidence bins for the belief on the estimated goal: [0,.5), [.5,.8), [.8,1].
int confidence_bin(double p);

/// (state code, goal or estimate index, confidence bin) packed into one integer.
struct DiscreteKey {
  std::uint64_t state = 0;
  std::uint8_t goal = 0;
  std::uint8_t confidence = 0;

  std::uint64_t packed() const noexcept {
    return (state << 8) | (static_cast<std::uint64_t>(goal) << 2) | confidence;
  }
  static DiscreteKey unpack(std::uint64_t packed) noexcept {
    return {packed >> 8, static_cast<std::uint8_t>((packed >> 2) & 0x3f),
            static_cast<std::uint8_t>(packed & 0x3)};
  }
};

/// Sparse action-value table; absent entries read as 0.
class QTable {
 public:
  explicit QTable(std::size_t n_actions);

  std::size_t num_actions() const noexcept { return n_actions_; }
  std::size_t num_keys() const noexcept { return rows_.size(); }
  double get(std::uint64_t key, std::size_t action) const;
  /// All action values for key (zeros when absent).
  std::span<const double> row(std::uint64_t key) const;
  double max_value(std::uint64_t key) const;
  void set(std::uint64_t key, std::size_t action, double value);

  /// Rows `key,action,value` sorted by key then action; values with 17 significant digits.
  void write_csv(std::ostream& out) const;
  static QTable read_csv(std::istream& in, std::size_t n_actions);

  friend bool operator==(const QTable&, const QTable&) = default;

 private:
  std::size_t n_actions_;
  std::unordered_map<std::uint64_t, std::vector<double>> rows_;
  std::vector<double> zeros_;
};

/// Q(k,a) += alpha * (r + gamma * max_a' Q(k',a') * (1 - done) - Q(k,a)).
void q_update(QTable& table, std::uint64_t key, std::size_t action, double reward, std::uint64_t key_next,
              bool done, const LearnerConfig& cfg);
/// As q_update with the bootstrap Q(k', a_next).
void sarsa_update(QTable& table, std::uint64_t key, std::size_t action, double reward,
                  std::uint64_t key_next, std::size_t action_next, bool done, const LearnerConfig& cfg);

/// Tile coding over a bounded box, with a separate weight block per (context, action).
class TileCoder {
 public:
  struct Shape {
    std::vector<double> lower;
    std::vector<double> upper;
    std::size_t tilings = 8;
    std::size_t tiles_per_dim = 8;
    std::size_t contexts = 1;
    std::size_t actions = 5;
  };

  explicit TileCoder(Shape shape);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t dims() const noexcept { return shape_.lower.size(); }
  std::size_t tiles_per_tiling() const noexcept { return tiles_per_tiling_; }
  std::size_t num_weights() const noexcept { return weights_.size(); }

  /// Exactly `tilings` feature indices (within one context/action block); inputs are clipped.
  std::vector<std::size_t> active_tiles(std::span<const double> x) const;
  double q(std::span<const double> x, std::size_t context, std::size_t action) const;
  double q(std::span<const std::size_t> tiles, std::size_t context, std::size_t action) const;
  /// Adds `delta` to every active weight of (context, action).
  void add(std::span<const std::size_t> tiles, std::size_t context, std::size_t action, double delta);
  double weight(std::size_t context, std::size_t action, std::size_t tile) const;
  double& weight(std::size_t context, std::size_t action, std::size_t tile);

  /// 16-byte header (magic "MTC1", u16 version, u16 dims, u16 tilings, u16 tiles, u16 contexts,
  /// u16 actions) then little-endian float64 weights.
  void write_binary(std::ostream& out) const;
  void read_binary(std::istream& in);

 private:
  std::size_t block(std::size_t context, std::size_t action) const;
  Shape shape_;
  std::size_t tiles_per_tiling_ = 0;
  std::vector<double> weights_;
};

/// One semi-gradient TD(0) step toward r + gamma * Q(x', a') * (1 - done); step size alpha / tilings.
void tile_update(TileCoder& coder, std::span<const double> x, std::size_t context, std::size_t action,
                 double reward, std::span<const double> x_next, std::size_t context_next,
                 std::size_t action_next, bool done, const LearnerConfig& cfg);

/// Fixed-capacity ring of transitions with uniform sampling.
template <typename T>
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 50000, std::size_t batch_size = 64)
      : capacity_(capacity), batch_(batch_size) {
    items_.reserve(std::min<std::size_t>(capacity, 4096));
  }
  void push(T item) {
    if (capacity_ == 0) return;
    if (items_.size() < capacity_) {
      items_.push_back(std::move(item));
    } else {
      items_[next_] = std::move(item);
    }
    next_ = (next_ + 1) % capacity_;
  }
  std::size_t size() const noexcept { return items_.size(); }
  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t batch_size() const noexcept { return batch_; }
  /// min(batch_size, size()) items drawn uniformly with replacement.
  std::vector<const T*> sample(Rng& rng) const {
    std::vector<const T*> out;
    if (items_.empty()) return out;
    const std::size_t n = std::min(batch_, items_.size());
    std::uniform_int_distribution<std::size_t> pick(0, items_.size() - 1);
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(&items_[pick(rng)]);
    return out;
  }

 private:
  std::size_t capacity_;
  std::size_t batch_;
  std::size_t next_ = 0;
  std::vector<T> items_;
};

/// What the shaping pipeline needs from a policy.
class Learner {
 public:
  virtual ~Learner() = default;
  virtual std::size_t num_actions() const = 0;
  virtual void action_values(const AugmentedObservation& obs, std::span<double> out) const = 0;
  virtual void learn(const ShapedTransition& transition) = 0;
};

enum class TabularRule { QLearning, Sarsa };

/// Tabular learner over a caller-supplied key encoder.
class TabularLearner final : public Learner {
 public:
  using KeyEncoder = std::function<std::uint64_t(const AugmentedObservation&)>;
  TabularLearner(std::size_t n_actions, KeyEncoder encoder, LearnerConfig cfg, TabularRule rule);

  std::size_t num_actions() const override { return table_.num_actions(); }
  void action_values(const AugmentedObservation& obs, std::span<double> out) const override;
  void learn(const ShapedTransition& t) override;

  const QTable& table() const noexcept { return table_; }
  QTable& table() noexcept { return table_; }
  std::uint64_t key(const AugmentedObservation& obs) const { return encoder_(obs); }

 private:
  QTable table_;
  KeyEncoder encoder_;
  LearnerConfig cfg_;
  TabularRule rule_;
};

/// Tile-coded learner: a projection picks the continuous inputs, the goal block picks the context.
class TileLearner final : public Learner {
 public:
  using Projection = std::function<std::vector<double>(const AugmentedObservation&)>;
  TileLearner(TileCoder coder, Projection projection, LearnerConfig cfg, std::size_t replay_capacity = 0,
              std::size_t replay_batch = 0, std::uint64_t replay_seed = 0);

  std::size_t num_actions() const override { return coder_.shape().actions; }
  void action_values(const AugmentedObservation& obs, std::span<double> out) const override;
  void learn(const ShapedTransition& t) override;
  const TileCoder& coder() const noexcept { return coder_; }

 private:
  struct Sample {
    std::vector<double> x;
    std::size_t context;
    std::size_t action;
    double reward;
    std::vector<double> x_next;
    std::size_t context_next;
    std::size_t action_next;
    bool done;
  };
  void apply(const Sample& s);

  TileCoder coder_;
  Projection projection_;
  LearnerConfig cfg_;
  ReplayBuffer<Sample> replay_;
  Rng replay_rng_;
};

}  // namespace maal
