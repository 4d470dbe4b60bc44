#include <doctest.h>

#include <memory>
#include <random>
#include <sstream>
#include <vector>

#include "maal/errors.hpp"
#include "maal/metrics.hpp"

using namespace maal;

namespace {

// One observer link; `hits[t]` says whether step t's belief points at the true goal (index 0).
EpisodeRecord trace(const std::vector<int>& hits) {
  EpisodeRecord r;
  r.true_goal = 0;
  for (int h : hits) {
    auto b = h == 1   ? GoalDistribution::from_probs({0.7, 0.1, 0.1, 0.1})
             : h == 0 ? GoalDistribution::from_probs({0.1, 0.7, 0.1, 0.1})
                      : uniform(4);  // -1: tie
    r.beliefs.push_back({b});
  }
  r.steps = hits.size();
  return r;
}

EpisodeRecord correct_from(std::size_t start, std::size_t T) {
  std::vector<int> h(T, 0);
  for (std::size_t t = start; t < T; ++t) h[t] = 1;
  return trace(h);
}

}  // namespace

TEST_CASE("prediction_correct") {
  EpisodeRecord onehot;
  onehot.true_goal = 2;
  onehot.beliefs = {{GoalDistribution::one_hot(4, 2)}};
  onehot.steps = 1;
  CHECK(prediction_correct(onehot));
  CHECK_FALSE(prediction_correct(trace({1, 1, -1})));
  CHECK_FALSE(prediction_correct(trace({1, 1, 1, 0})));
  CHECK(prediction_correct(trace({0, 0, 1})));
}

TEST_CASE("pcr examples") {
  auto flags = std::make_unique<bool[]>(1000);
  for (std::size_t i = 0; i < 415; ++i) flags[i * 2] = true;
  CHECK(pcr(std::span<const bool>(flags.get(), 1000)) == 0.415);

  std::vector<EpisodeRecord> all{correct_from(0, 5), correct_from(2, 5)};
  CHECK(pcr(all) == 1.0);
  std::vector<EpisodeRecord> none{trace({0, 0}), trace({1, -1})};
  CHECK(pcr(none) == 0.0);
  CHECK_THROWS_AS(pcr(std::span<const EpisodeRecord>{}), ConfigError);
}

TEST_CASE("pcr over disjoint windows composes") {
  std::mt19937_64 rng(5);
  const std::size_t n = 5000;
  auto f = std::make_unique<bool[]>(n);
  for (std::size_t i = 0; i < n; ++i) f[i] = rng() % 3 == 0;
  auto as_bool = [&](std::size_t a, std::size_t b) { return std::span<const bool>(f.get() + a, b - a); };
  double whole = pcr(as_bool(0, n));
  std::vector<std::size_t> cuts{0, 17, 1000, 1001, 3333, 5000};
  double weighted = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    weighted += pcr(as_bool(cuts[i], cuts[i + 1])) * double(cuts[i + 1] - cuts[i]);
  CHECK(std::abs(weighted / n - whole) <= 1e-12);
}

TEST_CASE("ptr examples") {
  CHECK(ptr(correct_from(15, 50)) == 0.3);
  CHECK(ptr(correct_from(0, 50)) == 0.0);
  CHECK(ptr(trace(std::vector<int>(50, 0))) == 1.0);
  // Correct early, lost, regained: only the final run counts.
  CHECK(ptr(trace({1, 1, 0, 1, 1})) == doctest::Approx(3.0 / 5.0));
  // Correct mid-episode but wrong at the end.
  CHECK(ptr(trace({0, 1, 1, 0})) == 1.0);
}

TEST_CASE("ptr bounds and the never-correct convention") {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 500; ++i) {
    std::vector<int> h(1 + rng() % 50);
    for (auto& v : h) v = static_cast<int>(rng() % 3) - 1;
    auto r = trace(h);
    double p = ptr(r);
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
    if (!prediction_correct(r)) CHECK(p == 1.0);
  }
}

TEST_CASE("metric row carries the shaped/raw identity") {
  auto r = correct_from(3, 10);
  r.return_raw = -0.7;
  r.klg_sum = 1.2;
  r.return_shaped = -0.7 + 0.1 * 1.2;
  r.success = true;
  auto row = make_metric_row(r, 42, 3, 0.1);
  CHECK(row.episode == 42);
  CHECK(row.seed == 3);
  CHECK(row.ptr == doctest::Approx(0.3));
  CHECK(row.prediction_correct);
  CHECK(row.steps == 10);
  CHECK(std::abs(row.return_shaped - row.return_raw - row.beta * row.klg_sum) <= 1e-9);
}

namespace {

std::vector<MetricRow> rows_from(const std::vector<double>& rewards) {
  std::vector<MetricRow> rows;
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    MetricRow m;
    m.episode = i;
    m.return_raw = m.return_shaped = rewards[i];
    m.success = rewards[i] > 0;
    m.prediction_correct = rewards[i] > 0;
    m.ptr = rewards[i] > 0 ? 0.2 : 1.0;
    m.steps = 10;
    rows.push_back(m);
  }
  return rows;
}

}  // namespace

TEST_CASE("aggregate rolling means") {
  auto constant = rows_from(std::vector<double>(100, 0.25));
  for (const auto& r : aggregate(constant, 7)) CHECK(r.return_raw == doctest::Approx(0.25).epsilon(1e-15));

  std::mt19937_64 rng(1);
  std::vector<double> noise(300);
  for (auto& v : noise) v = (rng() % 1000) / 1000.0 - 0.5;
  auto rows = rows_from(noise);
  auto ident = aggregate(rows, 1);
  for (std::size_t i = 0; i < rows.size(); ++i) CHECK(ident[i].return_raw == rows[i].return_raw);

  std::vector<double> step(200, -1.0);
  for (std::size_t i = 100; i < 200; ++i) step[i] = 1.0;
  auto agg = aggregate(rows_from(step), 25);
  CHECK(agg[123].return_raw < 1.0);
  CHECK(agg[124].return_raw == 1.0);
  CHECK(agg[124].pcr == 1.0);
  CHECK(agg[124].ptr == doctest::Approx(0.2));
  CHECK(agg[99].success == 0.0);

  // Long streams stay exact against a direct window mean.
  std::vector<double> longer(5000);
  for (auto& v : longer) v = (rng() % 1000) / 1000.0;
  auto la = aggregate(rows_from(longer), 1000);
  double direct = 0.0;
  for (std::size_t i = 4000; i < 5000; ++i) direct += longer[i];
  CHECK(std::abs(la.back().return_raw - direct / 1000.0) <= 1e-12);
  CHECK_THROWS_AS(aggregate(rows, 0), ConfigError);
}

TEST_CASE("csv format") {
  CHECK(format_real(0.1) == "0.1");
  CHECK(format_real(-0.0) == "0");
  CHECK(format_real(1.0 / 3.0) == "0.333333333");
  CHECK(format_real(-0.09306852819) == "-0.0930685282");
  CHECK(format_real(12345678901.0) == "1.23456789e+10");

  std::ostringstream out;
  write_metric_header(out);
  MetricRow m;
  m.episode = 3;
  m.seed = 2;
  m.beta = 0.01;
  m.return_raw = -0.4;
  m.return_shaped = -0.39;
  m.success = true;
  m.ptr = 0.3;
  m.prediction_correct = true;
  m.steps = 50;
  write_metric_row(out, m);
  CHECK(out.str() == "episode,seed,beta,return_raw,return_shaped,success,ptr,pred_correct,steps\n"
                     "3,2,0.01,-0.4,-0.39,1,0.3,1,50\n");
  std::istringstream in(out.str());
  auto back = read_metric_csv(in);
  REQUIRE(back.size() == 1);
  CHECK(back[0].episode == 3);
  CHECK(back[0].beta == 0.01);
  CHECK(back[0].success);
  CHECK(back[0].steps == 50);
  std::istringstream bad("nope\n");
  CHECK_THROWS_AS(read_metric_csv(bad), ConfigError);
}
