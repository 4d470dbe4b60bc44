#include <doctest.h>

#include <boost/multiprecision/cpp_dec_float.hpp>

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "maal/belief.hpp"
#include "maal/errors.hpp"

using namespace maal;
using boost::multiprecision::cpp_dec_float_50;

namespace {

// Frozen from a 50-digit evaluation; the oracle below re-derives them.
constexpr double kLn4 = 1.3862943611198906;
constexpr double kLn2 = 0.6931471805599453;

double oracle_neg_log(double p) {
  cpp_dec_float_50 x(p);
  return static_cast<double>(-boost::multiprecision::log(x));
}

GoalDistribution random_belief(std::mt19937_64& rng, std::size_t n) {
  std::gamma_distribution<double> g(0.7, 1.0);
  std::vector<double> p(n);
  double s = 0.0;
  for (auto& v : p) s += v = g(rng) + 1e-6;
  for (auto& v : p) v /= s;
  return GoalDistribution::from_probs(p);
}

double mass(const GoalDistribution& b) {
  return std::accumulate(b.probs().begin(), b.probs().end(), 0.0);
}

}  // namespace

TEST_CASE("uniform fills 1/n") {
  for (std::size_t n : {2u, 4u, 6u}) {
    auto u = uniform(n);
    REQUIRE(u.size() == n);
    for (std::size_t i = 0; i < n; ++i) CHECK(u[i] == doctest::Approx(1.0 / n).epsilon(1e-15));
    CHECK(std::abs(mass(u) - 1.0) < 1e-12);
  }
  GoalSet four({"A", "B", "C", "D"});
  CHECK(uniform(four)[3] == 0.25);
}

TEST_CASE("uniform rejects degenerate sets") {
  CHECK_THROWS_AS(uniform(std::size_t{0}), ConfigError);
  CHECK_THROWS_AS(uniform(std::size_t{1}), ConfigError);
  CHECK_THROWS_AS(GoalSet({"A"}), ConfigError);
  CHECK_THROWS_AS(GoalSet({"A", "A"}), ConfigError);
}

TEST_CASE("goal set keeps its order") {
  GoalSet g({"A", "B", "C"});
  CHECK(g.index_of("C") == 2);
  CHECK_FALSE(g.index_of("Z").has_value());
  CHECK(g.label(1) == "B");
  CHECK_THROWS_AS(make_goal(3, 3), ConfigError);
}

TEST_CASE("from_probs validation") {
  CHECK_THROWS_AS(GoalDistribution::from_probs({0.5, 0.6}), ConfigError);
  CHECK_THROWS_AS(GoalDistribution::from_probs({1.5, -0.5}), ConfigError);
  CHECK_NOTHROW(GoalDistribution::from_probs({0.5, 0.5 + 1e-11}));
}

TEST_CASE("reverse KL examples") {
  CHECK(kLn4 == doctest::Approx(oracle_neg_log(0.25)).epsilon(1e-15));
  CHECK(kLn2 == doctest::Approx(oracle_neg_log(0.5)).epsilon(1e-15));

  auto u = uniform(4);
  for (std::size_t g = 0; g < 4; ++g)
    CHECK(divergence_to_goal(u, {g}).value == doctest::Approx(kLn4).epsilon(1e-14));

  CHECK(divergence_to_goal(GoalDistribution::one_hot(4, 2), {2}).value == 0.0);

  auto b = GoalDistribution::from_probs({0.5, 0.25, 0.125, 0.125});
  CHECK(divergence_to_goal(b, {0}).value == doctest::Approx(kLn2).epsilon(1e-14));
}

TEST_CASE("reverse KL clamps a zero on the goal") {
  auto b = GoalDistribution::one_hot(3, 0);
  auto d = divergence_to_goal(b, {1});
  CHECK(d.clamped);
  CHECK(d.value == doctest::Approx(-std::log(kProbFloor)));
}

TEST_CASE("smoothed forward KL") {
  DivergenceMode m = SmoothedForwardKL{0.01};
  // Zero exactly at the smoothed target itself.
  auto target = GoalDistribution::from_probs({0.97, 0.01, 0.01, 0.01});
  CHECK(divergence_to_goal(target, {0}, m).value == doctest::Approx(0.0).epsilon(1e-12));
  auto d = divergence_to_goal(uniform(4), {0}, m).value;
  double expect = 0.25 * std::log(0.25 / 0.97) + 3 * 0.25 * std::log(0.25 / 0.01);
  CHECK(d == doctest::Approx(expect).epsilon(1e-12));
  CHECK_THROWS_AS(validate_mode(SmoothedForwardKL{0.2}, 4), ConfigError);
  CHECK_THROWS_AS(validate_mode(SmoothedForwardKL{0.0}, 4), ConfigError);
  CHECK_NOTHROW(validate_mode(SmoothedForwardKL{0.1}, 4));
}

TEST_CASE("kl_gain examples") {
  auto quarter = GoalDistribution::from_probs({0.25, 0.25, 0.25, 0.25});
  auto half = GoalDistribution::from_probs({0.5, 0.25, 0.125, 0.125});
  CHECK(kl_gain(quarter, half, {0}) == doctest::Approx(kLn2).epsilon(1e-14));
  CHECK(kl_gain(half, quarter, {0}) == doctest::Approx(-kLn2).epsilon(1e-14));
  CHECK(kl_gain(half, half, {0}) == 0.0);
}

TEST_CASE("kl_gain antisymmetry and divergence monotonicity") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 500; ++i) {
    auto a = random_belief(rng, 5), b = random_belief(rng, 5);
    for (DivergenceMode m : {DivergenceMode{ReverseKL{}}, DivergenceMode{SmoothedForwardKL{0.01}}})
      CHECK(std::abs(kl_gain(a, b, {2}, m) + kl_gain(b, a, {2}, m)) <= 1e-12);
  }
  double prev = -1.0;
  for (double p = 1.0; p > 0.01; p -= 0.05) {
    double rest = (1.0 - p) / 3.0;
    auto b = GoalDistribution::from_probs({p, rest, rest, rest});
    double d = divergence_to_goal(b, {0}).value;
    CHECK(d > prev);
    CHECK(d >= 0.0);
    prev = d;
  }
}

TEST_CASE("telescoping over random sequences") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t n = 2 + trial % 5, len = 1 + trial % 30;
    std::vector<GoalDistribution> seq;
    for (std::size_t t = 0; t <= len; ++t) seq.push_back(random_belief(rng, n));
    OneHotGoal g{trial % n};
    double sum = 0.0;
    for (std::size_t t = 1; t <= len; ++t) sum += kl_gain(seq[t - 1], seq[t], g);
    double direct = divergence_to_goal(seq.front(), g).value - divergence_to_goal(seq.back(), g).value;
    CHECK(std::abs(sum - direct) <= 1e-9);
  }
}

TEST_CASE("concat_beliefs") {
  std::vector<GoalDistribution> two{GoalDistribution::from_probs({0.5, 0.5}),
                                    GoalDistribution::from_probs({0.9, 0.1})};
  CHECK(concat_beliefs(two) == std::vector<double>{0.5, 0.5, 0.9, 0.1});
  CHECK(concat_beliefs(std::span(two).first(1)) == std::vector<double>{0.5, 0.5});
  CHECK(concat_beliefs({}).empty());
  std::vector<GoalDistribution> mixed{uniform(2), uniform(3)};
  CHECK_THROWS_AS(concat_beliefs(mixed), ConfigError);
}

TEST_CASE("aggregate_self_belief") {
  auto a = GoalDistribution::from_probs({0.8, 0.2});
  auto b = GoalDistribution::from_probs({0.4, 0.6});
  std::vector<GoalDistribution> ab{a, b};
  std::vector<double> w31{3.0, 1.0};
  auto r = aggregate_self_belief(ab, w31);
  CHECK(r[0] == doctest::Approx(0.7).epsilon(1e-14));
  CHECK(r[1] == doctest::Approx(0.3).epsilon(1e-14));

  std::vector<GoalDistribution> opposite{GoalDistribution::one_hot(2, 0), GoalDistribution::one_hot(2, 1)};
  std::vector<double> ones{1.0, 1.0};
  auto h = aggregate_self_belief(opposite, ones);
  CHECK(h[0] == 0.5);
  CHECK(h[1] == 0.5);

  std::vector<double> single{2.5};
  CHECK(aggregate_self_belief(std::span(ab).first(1), single) == a);

  std::vector<double> zeros{0.0, 0.0};
  CHECK_THROWS_AS(aggregate_self_belief(ab, zeros), ConfigError);
  std::vector<double> neg{1.0, -1.0};
  CHECK_THROWS_AS(aggregate_self_belief(ab, neg), ConfigError);
  CHECK_THROWS_AS(aggregate_self_belief(ab, single), ConfigError);
}

TEST_CASE("equal weights give the plain mean") {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 200; ++i) {
    std::size_t k = 1 + i % 4;
    std::vector<GoalDistribution> parts;
    for (std::size_t j = 0; j < k; ++j) parts.push_back(random_belief(rng, 4));
    std::vector<double> w(k, 0.3 + i % 3);
    auto r = aggregate_self_belief(parts, w);
    CHECK(std::abs(mass(r) - 1.0) <= 1e-9);
    for (std::size_t g = 0; g < 4; ++g) {
      double m = 0.0;
      for (auto& p : parts) m += p[g];
      CHECK(std::abs(r[g] - m / k) <= 1e-12);
    }
  }
}

TEST_CASE("floored keeps the simplex") {
  auto b = GoalDistribution::one_hot(4, 1).floored();
  CHECK(std::abs(mass(b) - 1.0) <= 1e-9);
  for (double p : b.probs()) CHECK(p >= kProbFloor * 0.999);
  CHECK(b.argmax() == 1);
}

TEST_CASE("argmax ties go to the lowest index") {
  auto t = GoalDistribution::from_probs({0.2, 0.4, 0.4});
  CHECK(t.argmax() == 1);
  CHECK_FALSE(t.has_unique_max());
  CHECK(uniform(3).argmax() == 0);
  CHECK(GoalDistribution::from_probs({0.1, 0.9}).has_unique_max());
}
