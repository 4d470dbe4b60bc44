#include "maal/learners.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>

#include "maal/errors.hpp"

namespace maal {

std::vector<double> AugmentedObservation::flat() const {
  std::vector<double> out;
  out.reserve(size());
  out.insert(out.end(), obs.begin(), obs.end());
  out.insert(out.end(), own_goal.begin(), own_goal.end());
  out.insert(out.end(), others_beliefs.begin(), others_beliefs.end());
  return out;
}

std::size_t AugmentedObservation::goal_index() const {
  if (own_goal.empty()) return 0;
  return static_cast<std::size_t>(std::max_element(own_goal.begin(), own_goal.end()) - own_goal.begin());
}

double AugmentedObservation::belief_confidence() const {
  if (others_beliefs.empty()) return 0.0;
  return *std::max_element(others_beliefs.begin(), others_beliefs.end());
}

std::size_t greedy_action(std::span<const double> q) {
  if (q.empty()) throw ConfigError("no actions to choose from");
  return static_cast<std::size_t>(std::max_element(q.begin(), q.end()) - q.begin());
}

std::size_t select_action(std::span<const double> q, double epsilon, Rng& rng) {
  if (q.empty()) throw ConfigError("no actions to choose from");
  for (double v : q) {
    if (!std::isfinite(v)) throw NumericError("non-finite action value");
  }
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  if (coin(rng) < epsilon) {
    std::uniform_int_distribution<std::size_t> pick(0, q.size() - 1);
    return pick(rng);
  }
  return greedy_action(q);
}

void LearnerConfig::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in (0, 1]");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in (0, 1]");
  if (!(epsilon_start >= 0.0 && epsilon_start <= 1.0) || !(epsilon_end >= 0.0 && epsilon_end <= 1.0)) {
    throw ConfigError("epsilon must lie in [0, 1]");
  }
  if (!(epsilon_decay_fraction >= 0.0 && epsilon_decay_fraction <= 1.0)) {
    throw ConfigError("epsilon_decay_fraction must lie in [0, 1]");
  }
}

double LearnerConfig::epsilon_at(std::size_t episode, std::size_t total_episodes) const {
  const double horizon = epsilon_decay_fraction * static_cast<double>(total_episodes);
  if (horizon <= 0.0 || static_cast<double>(episode) >= horizon) return epsilon_end;
  const double frac = static_cast<double>(episode) / horizon;
  return epsilon_start + (epsilon_end - epsilon_start) * frac;
}

int confidence_bin(double p) {
  if (p < 0.5) return 0;
  if (p < 0.8) return 1;
  return 2;
}

QTable::QTable(std::size_t n_actions) : n_actions_(n_actions), zeros_(n_actions, 0.0) {
  if (n_actions == 0) throw ConfigError("Q-table needs at least one action");
}

double QTable::get(std::uint64_t key, std::size_t action) const { return row(key)[action]; }

std::span<const double> QTable::row(std::uint64_t key) const {
  auto it = rows_.find(key);
  return it == rows_.end() ? std::span<const double>(zeros_) : std::span<const double>(it->second);
}

double QTable::max_value(std::uint64_t key) const {
  const auto r = row(key);
  return *std::max_element(r.begin(), r.end());
}

void QTable::set(std::uint64_t key, std::size_t action, double value) {
  if (action >= n_actions_) throw ConfigError("action index out of range");
  if (!std::isfinite(value)) throw NumericError("non-finite Q-value");
  auto& r = rows_[key];
  if (r.empty()) r.assign(n_actions_, 0.0);
  r[action] = value;
}

void QTable::write_csv(std::ostream& out) const {
  std::vector<std::uint64_t> keys;
  keys.reserve(rows_.size());
  for (const auto& kv : rows_) keys.push_back(kv.first);
  std::sort(keys.begin(), keys.end());
  out << "key,action,value\n";
  char buf[64];
  for (auto k : keys) {
    const auto& r = rows_.at(k);
    for (std::size_t a = 0; a < n_actions_; ++a) {
      std::snprintf(buf, sizeof buf, "%.17g", r[a]);
      out << k << ',' << a << ',' << buf << '\n';
    }
  }
}

QTable QTable::read_csv(std::istream& in, std::size_t n_actions) {
  QTable t(n_actions);
  std::string line;
  if (!std::getline(in, line) || line != "key,action,value") throw ConfigError("Q-table CSV: bad header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::uint64_t key = 0;
    std::size_t action = 0;
    std::string value;
    char c1 = 0, c2 = 0;
    if (!(row >> key >> c1 >> action >> c2 >> value) || c1 != ',' || c2 != ',') {
      throw ConfigError("Q-table CSV: malformed line");
    }
    t.set(key, action, std::stod(value));
  }
  return t;
}

namespace {

void td_step(QTable& table, std::uint64_t key, std::size_t action, double reward, double bootstrap,
             bool done, const LearnerConfig& cfg) {
  const double current = table.get(key, action);
  const double target = reward + (done ? 0.0 : cfg.gamma * bootstrap);
  const double updated = current + cfg.alpha * (target - current);
  if (!std::isfinite(updated)) throw NumericError("TD update diverged");
  table.set(key, action, updated);
}

}  // namespace

void q_update(QTable& table, std::uint64_t key, std::size_t action, double reward, std::uint64_t key_next,
              bool done, const LearnerConfig& cfg) {
  if (!std::isfinite(reward)) throw NumericError("non-finite reward");
  td_step(table, key, action, reward, done ? 0.0 : table.max_value(key_next), done, cfg);
}

void sarsa_update(QTable& table, std::uint64_t key, std::size_t action, double reward,
                  std::uint64_t key_next, std::size_t action_next, bool done, const LearnerConfig& cfg) {
  if (!std::isfinite(reward)) throw NumericError("non-finite reward");
  td_step(table, key, action, reward, done ? 0.0 : table.get(key_next, action_next), done, cfg);
}

TileCoder::TileCoder(Shape shape) : shape_(std::move(shape)) {
  const std::size_t d = shape_.lower.size();
  if (d == 0 || shape_.upper.size() != d) throw ConfigError("tile coder bounds must be non-empty and paired");
  for (std::size_t i = 0; i < d; ++i) {
    if (!(shape_.upper[i] > shape_.lower[i])) throw ConfigError("tile coder upper bound must exceed lower");
  }
  if (shape_.tilings == 0 || shape_.tiles_per_dim == 0 || shape_.contexts == 0 || shape_.actions == 0) {
    throw ConfigError("tile coder sizes must be positive");
  }
  tiles_per_tiling_ = 1;
  for (std::size_t i = 0; i < d; ++i) tiles_per_tiling_ *= shape_.tiles_per_dim + 1;
  weights_.assign(shape_.contexts * shape_.actions * shape_.tilings * tiles_per_tiling_, 0.0);
}

std::vector<std::size_t> TileCoder::active_tiles(std::span<const double> x) const {
  const std::size_t d = dims();
  if (x.size() != d) throw ConfigError("tile coder input has wrong dimension");
  const auto k = static_cast<double>(shape_.tiles_per_dim);
  const auto t_count = static_cast<double>(shape_.tilings);
  std::vector<double> scaled(d);
  for (std::size_t i = 0; i < d; ++i) {
    if (!std::isfinite(x[i])) throw NumericError("non-finite tile coder input");
    const double u = std::clamp((x[i] - shape_.lower[i]) / (shape_.upper[i] - shape_.lower[i]), 0.0, 1.0);
    scaled[i] = u * k;
  }
  std::vector<std::size_t> out(shape_.tilings);
  for (std::size_t t = 0; t < shape_.tilings; ++t) {
    std::size_t index = 0;
    std::size_t stride = 1;
    for (std::size_t i = 0; i < d; ++i) {
      // asymmetric displacement (1, 3, 5, ...) per dimension
      double offset = static_cast<double>(t) * static_cast<double>(2 * i + 1) / t_count;
      offset -= std::floor(offset);
      auto cell = static_cast<std::size_t>(std::floor(scaled[i] + offset));
      cell = std::min(cell, shape_.tiles_per_dim);
      index += cell * stride;
      stride *= shape_.tiles_per_dim + 1;
    }
    out[t] = t * tiles_per_tiling_ + index;
  }
  return out;
}

std::size_t TileCoder::block(std::size_t context, std::size_t action) const {
  if (context >= shape_.contexts || action >= shape_.actions) throw ConfigError("tile coder context/action out of range");
  return (context * shape_.actions + action) * shape_.tilings * tiles_per_tiling_;
}

double TileCoder::q(std::span<const double> x, std::size_t context, std::size_t action) const {
  const auto tiles = active_tiles(x);
  return q(tiles, context, action);
}

double TileCoder::q(std::span<const std::size_t> tiles, std::size_t context, std::size_t action) const {
  const std::size_t base = block(context, action);
  double sum = 0.0;
  for (auto t : tiles) sum += weights_[base + t];
  return sum;
}

void TileCoder::add(std::span<const std::size_t> tiles, std::size_t context, std::size_t action, double delta) {
  const std::size_t base = block(context, action);
  for (auto t : tiles) {
    const double w = weights_[base + t] + delta;
    if (!std::isfinite(w)) throw NumericError("tile coder weight went non-finite");
    weights_[base + t] = w;
  }
}

double TileCoder::weight(std::size_t context, std::size_t action, std::size_t tile) const {
  return weights_.at(block(context, action) + tile);
}

double& TileCoder::weight(std::size_t context, std::size_t action, std::size_t tile) {
  return weights_.at(block(context, action) + tile);
}

namespace {

constexpr std::array<char, 4> kTileMagic{'M', 'T', 'C', '1'};
constexpr std::uint16_t kTileVersion = 1;

void put_u16(std::ostream& out, std::uint16_t v) {
  const std::array<char, 2> b{static_cast<char>(v & 0xff), static_cast<char>(v >> 8)};
  out.write(b.data(), 2);
}

std::uint16_t get_u16(std::istream& in) {
  std::array<unsigned char, 2> b{};
  in.read(reinterpret_cast<char*>(b.data()), 2);
  return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

std::uint16_t narrow16(std::size_t v) {
  if (v > 0xffff) throw ConfigError("tile coder dimension too large for checkpoint header");
  return static_cast<std::uint16_t>(v);
}

}  // namespace

void TileCoder::write_binary(std::ostream& out) const {
  static_assert(std::endian::native == std::endian::little, "checkpoint writer assumes little-endian");
  out.write(kTileMagic.data(), 4);
  put_u16(out, kTileVersion);
  put_u16(out, narrow16(dims()));
  put_u16(out, narrow16(shape_.tilings));
  put_u16(out, narrow16(shape_.tiles_per_dim));
  put_u16(out, narrow16(shape_.contexts));
  put_u16(out, narrow16(shape_.actions));
  out.write(reinterpret_cast<const char*>(weights_.data()),
            static_cast<std::streamsize>(weights_.size() * sizeof(double)));
}

void TileCoder::read_binary(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), 4);
  if (!in || magic != kTileMagic) throw ConfigError("tile checkpoint: bad magic");
  if (get_u16(in) != kTileVersion) throw ConfigError("tile checkpoint: unsupported version");
  const std::array<std::size_t, 5> expect{dims(), shape_.tilings, shape_.tiles_per_dim, shape_.contexts,
                                          shape_.actions};
  for (std::size_t e : expect) {
    if (get_u16(in) != e) throw ConfigError("tile checkpoint: shape mismatch");
  }
  std::vector<double> w(weights_.size());
  in.read(reinterpret_cast<char*>(w.data()), static_cast<std::streamsize>(w.size() * sizeof(double)));
  if (!in) throw ConfigError("tile checkpoint: truncated weights");
  weights_ = std::move(w);
}

void tile_update(TileCoder& coder, std::span<const double> x, std::size_t context, std::size_t action,
                 double reward, std::span<const double> x_next, std::size_t context_next,
                 std::size_t action_next, bool done, const LearnerConfig& cfg) {
  if (!std::isfinite(reward)) throw NumericError("non-finite reward");
  const auto tiles = coder.active_tiles(x);
  const double current = coder.q(tiles, context, action);
  const double bootstrap = done ? 0.0 : coder.q(x_next, context_next, action_next);
  const double delta = reward + cfg.gamma * bootstrap - current;
  coder.add(tiles, context, action, cfg.alpha / static_cast<double>(coder.shape().tilings) * delta);
}

TabularLearner::TabularLearner(std::size_t n_actions, KeyEncoder encoder, LearnerConfig cfg, TabularRule rule)
    : table_(n_actions), encoder_(std::move(encoder)), cfg_(cfg), rule_(rule) {
  cfg_.validate();
  if (!encoder_) throw ConfigError("tabular learner needs a key encoder");
}

void TabularLearner::action_values(const AugmentedObservation& obs, std::span<double> out) const {
  const auto r = table_.row(encoder_(obs));
  std::copy(r.begin(), r.end(), out.begin());
}

void TabularLearner::learn(const ShapedTransition& t) {
  const auto k = encoder_(t.s_aug);
  const auto k_next = encoder_(t.s_aug_next);
  if (rule_ == TabularRule::QLearning) {
    q_update(table_, k, t.action, t.reward_shaped, k_next, t.done, cfg_);
  } else {
    sarsa_update(table_, k, t.action, t.reward_shaped, k_next, t.action_next, t.done, cfg_);
  }
}

TileLearner::TileLearner(TileCoder coder, Projection projection, LearnerConfig cfg,
                         std::size_t replay_capacity, std::size_t replay_batch, std::uint64_t replay_seed)
    : coder_(std::move(coder)),
      projection_(std::move(projection)),
      cfg_(cfg),
      replay_(replay_capacity, replay_batch),
      replay_rng_(replay_seed) {
  cfg_.validate();
  if (!projection_) throw ConfigError("tile learner needs a projection");
}

void TileLearner::action_values(const AugmentedObservation& obs, std::span<double> out) const {
  const auto x = projection_(obs);
  const auto tiles = coder_.active_tiles(x);
  const std::size_t ctx = obs.goal_index();
  for (std::size_t a = 0; a < coder_.shape().actions; ++a) out[a] = coder_.q(tiles, ctx, a);
}

void TileLearner::apply(const Sample& s) {
  tile_update(coder_, s.x, s.context, s.action, s.reward, s.x_next, s.context_next, s.action_next, s.done,
              cfg_);
}

void TileLearner::learn(const ShapedTransition& t) {
  Sample s{projection_(t.s_aug),      t.s_aug.goal_index(), t.action,   t.reward_shaped,
           projection_(t.s_aug_next), t.s_aug_next.goal_index(), t.action_next, t.done};
  apply(s);
  if (replay_.capacity() == 0 || replay_.batch_size() == 0) return;
  replay_.push(std::move(s));
  for (const Sample* r : replay_.sample(replay_rng_)) apply(*r);
}

}  // namespace maal
