#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>
#include <vector>

#include "maal/errors.hpp"
#include "maal/harness.hpp"
#include "maal/learners.hpp"

using namespace maal;

TEST_CASE("greedy selection and ties") {
  Rng rng(1);
  std::vector<double> q{0, 1, 0, 0, 0};
  CHECK(select_action(q, 0.0, rng) == 1);
  std::vector<double> flat(5, 0.3);
  CHECK(select_action(flat, 0.0, rng) == 0);
  std::vector<double> tie{0, 2, 2, 1};
  CHECK(greedy_action(tie) == 1);
  std::vector<double> bad{0, NAN};
  CHECK_THROWS_AS(select_action(bad, 0.0, rng), NumericError);
}

TEST_CASE("epsilon one is uniform within 3 sigma") {
  Rng rng(77);
  std::vector<double> q{5, 0, 0, 0, 0};
  const int n = 10000;
  std::vector<int> counts(5, 0);
  for (int i = 0; i < n; ++i) ++counts[select_action(q, 1.0, rng)];
  const double p = 0.2, sigma = std::sqrt(n * p * (1 - p));
  for (int c : counts) CHECK(std::abs(c - n * p) <= 3 * sigma);
}

TEST_CASE("selection is reproducible from the rng state") {
  Rng a(3), b(3);
  std::vector<double> q{0.1, 0.5, 0.2};
  for (int i = 0; i < 200; ++i) CHECK(select_action(q, 0.4, a) == select_action(q, 0.4, b));
}

TEST_CASE("epsilon schedule") {
  LearnerConfig c;
  CHECK(c.epsilon_at(0, 1000) == 1.0);
  CHECK(c.epsilon_at(400, 1000) == doctest::Approx(0.525));
  CHECK(c.epsilon_at(800, 1000) == doctest::Approx(0.05));
  CHECK(c.epsilon_at(999, 1000) == doctest::Approx(0.05));
  c.alpha = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c.alpha = 0.1;
  c.gamma = 1.5;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("q_update examples") {
  LearnerConfig cfg;
  QTable t(5);
  q_update(t, 1, 2, 1.0, 9, true, cfg);
  CHECK(t.get(1, 2) == doctest::Approx(0.1).epsilon(1e-15));

  QTable z(5);
  q_update(z, 1, 0, 0.0, 2, false, cfg);
  CHECK(z.get(1, 0) == 0.0);

  // Q_n = 1 - 0.9^n
  QTable f(5);
  for (int n = 1; n <= 200; ++n) {
    q_update(f, 3, 1, 1.0, 0, true, cfg);
    CHECK(f.get(3, 1) == doctest::Approx(1.0 - std::pow(0.9, n)).epsilon(1e-12));
  }
  CHECK(std::abs(f.get(3, 1) - 1.0) < 1e-9);
}

TEST_CASE("q_update bootstraps from the next max") {
  LearnerConfig cfg;
  QTable t(3);
  t.set(7, 0, -1.0);
  t.set(7, 2, 2.0);
  q_update(t, 1, 0, 0.5, 7, false, cfg);
  CHECK(t.get(1, 0) == doctest::Approx(0.1 * (0.5 + 0.95 * 2.0)).epsilon(1e-14));
  QTable u(3);
  u.set(7, 2, 2.0);
  q_update(u, 1, 0, 0.5, 7, true, cfg);
  CHECK(u.get(1, 0) == doctest::Approx(0.05).epsilon(1e-14));
  CHECK_THROWS_AS(q_update(u, 1, 0, NAN, 7, true, cfg), NumericError);
  QTable big(2);
  big.set(4, 0, 1e308);
  LearnerConfig hot;
  hot.alpha = 1.0;
  hot.gamma = 1.0;
  CHECK_THROWS_AS(q_update(big, 4, 0, 1e308, 4, false, hot), NumericError);
}

TEST_CASE("sarsa_update examples") {
  LearnerConfig cfg;
  QTable t(5);
  sarsa_update(t, 1, 0, -0.1, 2, 4, false, cfg);
  CHECK(t.get(1, 0) == doctest::Approx(-0.01).epsilon(1e-14));

  QTable a(3), b(3);
  for (auto* tab : {&a, &b}) {
    tab->set(7, 1, 0.8);
    tab->set(7, 2, 0.3);
  }
  q_update(a, 1, 0, 0.2, 7, false, cfg);
  sarsa_update(b, 1, 0, 0.2, 7, 1, false, cfg);
  CHECK(a.get(1, 0) == b.get(1, 0));

  QTable s(5);
  for (int i = 0; i < 100; ++i) sarsa_update(s, 0, 4, 0.0, 0, 4, false, cfg);
  CHECK(s.get(0, 4) == 0.0);
  CHECK(s.num_keys() <= 1);
}

TEST_CASE("distinct keys update independently of order") {
  LearnerConfig cfg;
  QTable a(3), b(3);
  struct U { std::uint64_t k; std::size_t act; double r; };
  std::vector<U> batch{{1, 0, 0.3}, {2, 1, -0.2}, {3, 2, 1.0}, {4, 0, 0.7}};
  for (auto& u : batch) q_update(a, u.k, u.act, u.r, 99, true, cfg);
  for (auto it = batch.rbegin(); it != batch.rend(); ++it) q_update(b, it->k, it->act, it->r, 99, true, cfg);
  CHECK(a == b);
}

TEST_CASE("qtable reads and checkpoint") {
  QTable t(4);
  CHECK(t.get(12345, 3) == 0.0);
  CHECK(t.max_value(12345) == 0.0);
  t.set(5, 1, 0.1 + 0.2);
  t.set(1ull << 50, 3, -1.0 / 3.0);
  std::stringstream ss;
  t.write_csv(ss);
  CHECK(ss.str().rfind("key,action,value\n", 0) == 0);
  auto back = QTable::read_csv(ss, 4);
  CHECK(back == t);
  std::stringstream bad("k,a,v\n");
  CHECK_THROWS_AS(QTable::read_csv(bad, 4), ConfigError);
  CHECK_THROWS_AS(t.set(0, 4, 1.0), ConfigError);
  CHECK_THROWS_AS(t.set(0, 0, INFINITY), NumericError);
}

TEST_CASE("discrete key packing") {
  CHECK(confidence_bin(0.0) == 0);
  CHECK(confidence_bin(0.4999) == 0);
  CHECK(confidence_bin(0.5) == 1);
  CHECK(confidence_bin(0.7999) == 1);
  CHECK(confidence_bin(0.8) == 2);
  CHECK(confidence_bin(1.0) == 2);
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 50; ++s)
    for (std::uint8_t g = 0; g < 6; ++g)
      for (std::uint8_t c = 0; c < 3; ++c) {
        DiscreteKey k{s, g, c};
        CHECK(seen.insert(k.packed()).second);
        auto u = DiscreteKey::unpack(k.packed());
        CHECK((u.state == s && u.goal == g && u.confidence == c));
      }
}

namespace {

TileCoder::Shape box2(std::size_t contexts = 1) {
  TileCoder::Shape s;
  s.lower = {-1, -1};
  s.upper = {1, 1};
  s.contexts = contexts;
  return s;
}

}  // namespace

TEST_CASE("tile coder basics") {
  TileCoder c(box2());
  std::vector<double> x{0.3, -0.4};
  CHECK(c.active_tiles(x).size() == 8);
  CHECK(c.q(x, 0, 2) == 0.0);
  std::vector<double> outside{5.0, -7.0}, corner{1.0, -1.0};
  CHECK(c.active_tiles(outside) == c.active_tiles(corner));
  std::vector<double> wrong{0.0};
  CHECK_THROWS_AS(c.active_tiles(wrong), ConfigError);
  std::vector<double> nan{NAN, 0.0};
  CHECK_THROWS_AS(c.active_tiles(nan), NumericError);
  TileCoder::Shape inverted = box2();
  inverted.upper[0] = -2;
  CHECK_THROWS_AS(TileCoder{inverted}, ConfigError);
}

TEST_CASE("tile gradient is one per active weight") {
  TileCoder c(box2(2));
  std::vector<double> x{-0.2, 0.7};
  auto tiles = c.active_tiles(x);
  for (std::size_t t = 0; t < c.tiles_per_tiling() * 8; t += 37) c.weight(1, 3, t) = 0.01 * t;
  const double h = 1e-3;
  for (std::size_t i = 0; i < tiles.size(); ++i) {
    double base = c.q(x, 1, 3);
    c.weight(1, 3, tiles[i]) += h;
    CHECK(std::abs((c.q(x, 1, 3) - base) / h - 1.0) <= 1e-9);
    c.weight(1, 3, tiles[i]) -= h;
  }
  // A weight outside the active set has zero gradient.
  std::set<std::size_t> active(tiles.begin(), tiles.end());
  std::size_t other = 0;
  while (active.count(other)) ++other;
  double base = c.q(x, 1, 3);
  c.weight(1, 3, other) += 1.0;
  CHECK(c.q(x, 1, 3) == base);
}

TEST_CASE("tile TD converges to the target at one point") {
  TileCoder c(box2());
  LearnerConfig cfg;
  std::vector<double> x{0.1, 0.2};
  for (int i = 0; i < 2000; ++i) tile_update(c, x, 0, 1, 2.5, x, 0, 1, true, cfg);
  CHECK(std::abs(c.q(x, 0, 1) - 2.5) <= 1e-6);
  // Non-terminal self-loop: fixed point r / (1 - gamma).
  TileCoder d(box2());
  for (int i = 0; i < 20000; ++i) tile_update(d, x, 0, 0, 0.1, x, 0, 0, false, cfg);
  CHECK(std::abs(d.q(x, 0, 0) - 0.1 / (1 - 0.95)) <= 1e-6);
}

TEST_CASE("points in disjoint tiles train independently") {
  TileCoder c(box2());
  LearnerConfig cfg;
  std::vector<double> a{-0.95, -0.95}, b{0.95, 0.95};
  auto ta = c.active_tiles(a), tb = c.active_tiles(b);
  std::set<std::size_t> sa(ta.begin(), ta.end());
  for (auto t : tb) REQUIRE_FALSE(sa.count(t));
  for (int i = 0; i < 50; ++i) tile_update(c, a, 0, 0, 1.0, a, 0, 0, true, cfg);
  CHECK(c.q(b, 0, 0) == 0.0);
  CHECK(c.q(a, 0, 0) > 0.9);
}

TEST_CASE("tile checkpoint round trip") {
  TileCoder c(box2(3));
  LearnerConfig cfg;
  std::vector<double> x{0.5, -0.5};
  for (int i = 0; i < 10; ++i) tile_update(c, x, 2, 4, -0.3, x, 2, 4, false, cfg);
  std::stringstream ss;
  c.write_binary(ss);
  auto bytes = ss.str();
  CHECK(bytes.substr(0, 4) == "MTC1");
  CHECK(bytes.size() == 16 + 8 * c.num_weights());
  TileCoder back(box2(3));
  back.read_binary(ss);
  CHECK(back.q(x, 2, 4) == c.q(x, 2, 4));
  std::stringstream junk("XXXX");
  CHECK_THROWS_AS(back.read_binary(junk), ConfigError);
  std::stringstream again(bytes);
  TileCoder mismatched(box2(2));
  CHECK_THROWS_AS(mismatched.read_binary(again), ConfigError);
}

TEST_CASE("replay buffer") {
  ReplayBuffer<int> buf(4, 3);
  Rng rng(1);
  CHECK(buf.sample(rng).empty());
  buf.push(1);
  CHECK(buf.sample(rng).size() == 1);
  for (int i = 2; i <= 10; ++i) buf.push(i);
  CHECK(buf.size() == 4);
  std::vector<int> counts(11, 0);
  for (int i = 0; i < 4000; ++i)
    for (auto* p : buf.sample(rng)) ++counts[*p];
  for (int v = 1; v <= 6; ++v) CHECK(counts[v] == 0);
  for (int v = 7; v <= 10; ++v) CHECK(std::abs(counts[v] - 3000) < 200);
  ReplayBuffer<int> off(0, 8);
  off.push(3);
  CHECK(off.size() == 0);
}

TEST_CASE("oracle follower baseline reaches 0.9 success within 20k episodes") {
  // Sanity baseline at the default learner settings, independent of legibility.
  ExperimentConfig cfg;
  cfg.oracle_follower = true;
  cfg.episodes = 20000;
  cfg.betas = {0.0};
  cfg.seeds = {1};
  auto r = run_cell(cfg, {0.0, 1});
  REQUIRE(r.rows.size() == 20000);
  double succ = 0.0;
  for (std::size_t i = r.rows.size() - 1000; i < r.rows.size(); ++i) succ += r.rows[i].success;
  succ /= 1000.0;
  MESSAGE("oracle follower success over episodes 19001-20000: " << succ);
  CHECK(succ >= 0.9);
}
