#include "maal/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <ostream>
#include <random>
#include <sstream>

#include <boost/multiprecision/cpp_dec_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "maal/env_adapters.hpp"
#include "maal/errors.hpp"
#include "maal/legibility.hpp"
#include "maal/metrics.hpp"
#include "maal/recognition.hpp"

#ifndef MAAL_CONFIG_DIR
#define MAAL_CONFIG_DIR "configs"
#endif

namespace maal {

namespace mp = boost::multiprecision;
using Rational = mp::cpp_rational;
using Dec = mp::cpp_dec_float_50;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// Exact value of a finite double as a rational.
Rational exact(double x) {
  if (x == 0.0) return Rational(0);
  int e = 0;
  const double m = std::frexp(x, &e);
  const auto mant = static_cast<long long>(std::ldexp(m, 53));
  mp::cpp_int num(mant);
  mp::cpp_int den(1);
  const int shift = e - 53;
  if (shift >= 0) {
    num <<= shift;
  } else {
    den <<= -shift;
  }
  return Rational(num, den);
}

// High-precision divergence of a double-valued belief; same conventions as the library.
Dec oracle_divergence(std::span<const double> b, std::size_t goal, const DivergenceMode& mode) {
  if (std::holds_alternative<ReverseKL>(mode)) {
    const Dec p(b[goal]);
    const Dec floor(kProbFloor);
    if (p < floor) return -mp::log(floor);
    return -mp::log(p);
  }
  const Dec eps(std::get<SmoothedForwardKL>(mode).eps_smooth);
  const Dec on = Dec(1) - eps * Dec(static_cast<double>(b.size() - 1));
  Dec d = 0;
  for (std::size_t k = 0; k < b.size(); ++k) {
    if (b[k] <= 0.0) continue;
    const Dec bk(b[k]);
    d += bk * mp::log(bk / (k == goal ? on : eps));
  }
  return d < 0 ? Dec(0) : d;
}

GoalDistribution random_belief(std::size_t n, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> style(0, 3);
  std::vector<double> w(n);
  const int s = style(rng);
  for (auto& x : w) {
    const double v = u(rng);
    if (s == 0) x = v;                              // broad
    else if (s == 1) x = std::pow(10.0, -15.0 * v);  // spans the clamp
    else if (s == 2) x = v < 0.3 ? 0.0 : v;          // exact zeros
    else x = std::exp(8.0 * v);                      // peaked
  }
  if (std::all_of(w.begin(), w.end(), [](double x) { return x == 0.0; })) w[0] = 1.0;
  double sum = 0.0;
  for (double x : w) sum += x;
  for (auto& x : w) x /= sum;
  return GoalDistribution::from_probs(w);
}

}  // namespace

bool SuiteReport::all_passed() const {
  return std::none_of(results.begin(), results.end(), [](const auto& r) { return r.verdict == Verdict::Fail; });
}

void print_result(std::ostream& out, const CriterionResult& r) {
  const char* tag = r.verdict == Verdict::Pass ? "PASS" : r.verdict == Verdict::Fail ? "FAIL" : "SKIP";
  char secs[32];
  std::snprintf(secs, sizeof secs, "%.2f", r.seconds);
  out << "criterion " << r.id << " [" << tag << "] " << r.name;
  if (!r.detail.empty()) out << ": " << r.detail;
  if (r.verdict != Verdict::Skip) out << " (" << secs << " s)";
  out << std::endl;
}

CriterionResult check_bayes_oracle(std::size_t instances, std::uint64_t seed) {
  const auto t0 = Clock::now();
  CriterionResult r{1, "Bayes oracle equivalence", Verdict::Pass, "", 0.0};
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> size(2, 6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (std::size_t i = 0; i < instances; ++i) {
    const std::size_t n = size(rng);
    const GoalDistribution prior = random_belief(n, rng);
    std::vector<double> lik(n);
    for (auto& l : lik) l = std::max(kProbFloor, i % 2 == 0 ? u(rng) : std::pow(10.0, -12.0 * u(rng)));
    const BayesResult got = bayes_update(prior, lik);

    Rational z = 0;
    std::vector<Rational> joint(n);
    for (std::size_t k = 0; k < n; ++k) {
      joint[k] = exact(prior[k]) * exact(lik[k]);
      z += joint[k];
    }
    for (std::size_t k = 0; k < n; ++k) {
      const double want = (joint[k] / z).convert_to<double>();
      worst = std::max(worst, std::abs(got.posterior[k] - want));
    }
    if (got.degenerate) worst = std::max(worst, 1.0);
  }
  r.seconds = seconds_since(t0);
  r.detail = std::to_string(instances) + " instances, max |error| = " + fmt("%.3g", worst) + " (tol 1e-9)";
  if (!(worst <= 1e-9) || r.seconds >= 5.0) r.verdict = Verdict::Fail;
  return r;
}

CriterionResult check_telescoping(std::size_t sequences, std::uint64_t seed) {
  const auto t0 = Clock::now();
  CriterionResult r{2, "telescoping KLG", Verdict::Pass, "", 0.0};
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> size(2, 6);
  std::uniform_int_distribution<std::size_t> length(1, 100);
  double worst = 0.0;
  for (std::size_t i = 0; i < sequences; ++i) {
    const std::size_t n = size(rng);
    const DivergenceMode mode =
        i % 2 == 0 ? DivergenceMode{ReverseKL{}} : DivergenceMode{SmoothedForwardKL{0.4 / static_cast<double>(n)}};
    const OneHotGoal goal{std::uniform_int_distribution<std::size_t>(0, n - 1)(rng)};
    const std::size_t len = length(rng);
    std::vector<GoalDistribution> seq;
    for (std::size_t t = 0; t <= len; ++t) seq.push_back(random_belief(n, rng));
    double sum = 0.0;
    for (std::size_t t = 1; t <= len; ++t) sum += kl_gain(seq[t - 1], seq[t], goal, mode);
    const Dec want = oracle_divergence(seq.front().probs(), goal.index, mode) -
                     oracle_divergence(seq.back().probs(), goal.index, mode);
    worst = std::max(worst, std::abs(sum - want.convert_to<double>()));
  }
  r.seconds = seconds_since(t0);
  r.detail = std::to_string(sequences) + " sequences, max |sum klg - (D0 - DT)| = " + fmt("%.3g", worst) +
             " (tol 1e-9)";
  if (!(worst <= 1e-9) || r.seconds >= 5.0) r.verdict = Verdict::Fail;
  return r;
}

CriterionResult check_loop_property(std::size_t states, std::size_t max_len, std::uint64_t seed) {
  const auto t0 = Clock::now();
  CriterionResult r{3, "loop property", Verdict::Pass, "", 0.0};
  const auto layout = MazeLayout::load(ExperimentConfig{}.map_path());
  std::vector<std::vector<int>> dist;
  for (std::size_t e = 0; e < kMazeExits; ++e) dist.push_back(maze_distances(layout, layout.exit(e)));
  std::vector<Cell> free_cells;
  for (int y = 0; y < MazeLayout::kHeight; ++y) {
    for (int x = 0; x < MazeLayout::kWidth; ++x) {
      if (layout.passable({x, y})) free_cells.push_back({x, y});
    }
  }
  // Frozen, state-consistent recognizer: belief depends on the leader's cell only.
  const auto belief_at = [&](Cell c) {
    std::vector<double> w(kMazeExits);
    double z = 0.0;
    for (std::size_t g = 0; g < kMazeExits; ++g) {
      w[g] = std::exp(-static_cast<double>(dist[g][c.y * MazeLayout::kWidth + c.x]));
      z += w[g];
    }
    for (auto& x : w) x /= z;
    return GoalDistribution::from_probs(w);
  };

  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, free_cells.size() - 1);
  std::uniform_int_distribution<std::size_t> goal_pick(0, kMazeExits - 1);
  const double gammas[] = {0.5, 0.9, 0.99};
  double worst_undiscounted = 0.0;
  double worst_excess = -1e300;
  std::size_t loops = 0;
  for (std::size_t s = 0; s < states; ++s) {
    const Cell start = free_cells[pick(rng)];
    const Cell follower = free_cells[pick(rng)];
    (void)follower;  // held fixed; the frozen belief ignores it
    const OneHotGoal goal{goal_pick(rng)};
    const double d0 = divergence_to_goal(belief_at(start), goal).value;
    for (std::size_t len = 1; len <= max_len; ++len) {
      std::size_t total = 1;
      for (std::size_t k = 0; k < len; ++k) total *= kMazeActions;
      for (std::size_t code = 0; code < total; ++code) {
        std::vector<Cell> path{start};
        std::size_t c = code;
        for (std::size_t k = 0; k < len; ++k) {
          Cell next = apply_move(path.back(), static_cast<MazeAction>(c % kMazeActions));
          c /= kMazeActions;
          if (!layout.passable(next)) next = path.back();
          path.push_back(next);
        }
        if (path.back() != start) continue;
        ++loops;
        double undiscounted = 0.0;
        double discounted[3] = {0.0, 0.0, 0.0};
        for (std::size_t k = 0; k < len; ++k) {
          const double klg = kl_gain(belief_at(path[k]), belief_at(path[k + 1]), goal);
          undiscounted += klg;
          for (int gi = 0; gi < 3; ++gi) discounted[gi] += std::pow(gammas[gi], static_cast<double>(k)) * klg;
        }
        worst_undiscounted = std::max(worst_undiscounted, std::abs(undiscounted));
        for (double d : discounted) worst_excess = std::max(worst_excess, d - d0);
      }
    }
  }
  r.seconds = seconds_since(t0);
  r.detail = std::to_string(loops) + " loops, max |bonus| at gamma=1 = " + fmt("%.3g", worst_undiscounted) +
             ", max(discounted - D0) = " + fmt("%.3g", worst_excess);
  if (!(worst_undiscounted <= 1e-9) || !(worst_excess <= 1e-9) || loops == 0 || r.seconds >= 60.0) {
    r.verdict = Verdict::Fail;
  }
  return r;
}

CriterionResult check_metric_fixtures() {
  const auto t0 = Clock::now();
  CriterionResult r{4, "metric fixtures", Verdict::Pass, "", 0.0};
  const std::size_t goals = 4;
  std::vector<EpisodeRecord> window(1000);
  for (std::size_t i = 0; i < window.size(); ++i) {
    auto& rec = window[i];
    rec.true_goal = i % goals;
    const std::size_t said = i < 415 ? rec.true_goal : (rec.true_goal + 1) % goals;
    rec.beliefs = {{GoalDistribution::one_hot(goals, said)}};
    rec.steps = 1;
  }
  const double p = pcr(window);

  EpisodeRecord trace;
  trace.true_goal = 2;
  trace.steps = 50;
  for (std::size_t t = 0; t < 50; ++t) {
    trace.beliefs.push_back({GoalDistribution::one_hot(goals, t >= 15 ? 2 : (t % 2 == 0 ? 0 : 2))});
  }
  const double q = ptr(trace);
  r.seconds = seconds_since(t0);
  r.detail = "PCR(415/1000) = " + format_real(p) + ", PTR(step 15 of 50) = " + format_real(q);
  if (p != 0.415 || q != 0.3) r.verdict = Verdict::Fail;
  return r;
}

std::vector<std::vector<std::vector<std::size_t>>> run_maze_bypass(const ExperimentConfig& cfg,
                                                                   std::uint64_t seed) {
  cfg.validate();
  if (!cfg.is_maze()) throw ConfigError("bypass loop is defined for the maze");
  auto layout = std::make_shared<const MazeLayout>(MazeLayout::load(cfg.map_path()));
  MazeConfig mc = cfg.maze;
  mc.max_steps = cfg.resolved_max_steps();
  MazeEnv env(layout, mc, cfg.oracle_follower);
  std::unique_ptr<EmpiricalPolicyModel> empirical;
  std::unique_ptr<ActionLikelihood> maxent;
  if (cfg.resolved_recognizer() == "empirical") {
    empirical = std::make_unique<EmpiricalPolicyModel>(kMazeExits, kMazeActions, cfg.laplace_alpha);
  } else {
    maxent = std::make_unique<MaxEntLikelihoodModel>(std::make_shared<MazeGoalValues>(*layout), cfg.temperature);
  }
  const ActionLikelihood& backend = empirical ? *empirical : *maxent;
  Recognizer follower_view(backend, kLeader);
  const auto rule = cfg.algo == "sarsa" ? TabularRule::Sarsa : TabularRule::QLearning;
  TabularLearner learners[2] = {TabularLearner(kMazeActions, maze_learner_key, cfg.learner, rule),
                                TabularLearner(kMazeActions, maze_learner_key, cfg.learner, rule)};
  Rng goals = make_stream(seed, "goals");
  Rng explore[2] = {make_stream(seed, "agent0.explore"), make_stream(seed, "agent1.explore")};
  std::uniform_int_distribution<std::size_t> pick(0, kMazeExits - 1);

  const auto observe = [&](std::size_t agent) {
    AugmentedObservation a;
    a.obs = env.observe(agent);
    a.own_goal.assign(kMazeExits, 0.0);
    const GoalDistribution& b = follower_view.belief();
    std::size_t g = env.world().target_exit;
    if (agent == kFollower && !cfg.oracle_follower) g = b.argmax();
    a.own_goal[g] = 1.0;
    const auto blocks = agent == kLeader ? uniform(kMazeExits) : b;
    a.others_beliefs.assign(blocks.probs().begin(), blocks.probs().end());
    return a;
  };
  const auto learn = [&](std::size_t i, AugmentedObservation s, std::size_t a, AugmentedObservation s2,
                         std::size_t a2, bool done, double r) {
    ShapedTransition t;
    t.agent = i;
    t.s_aug = std::move(s);
    t.action = a;
    t.s_aug_next = std::move(s2);
    t.action_next = a2;
    t.done = done;
    t.reward_raw = r;
    t.reward_shaped = r;
    learners[i].learn(t);
  };

  std::vector<std::vector<std::vector<std::size_t>>> episodes;
  std::vector<double> q(kMazeActions);
  for (std::size_t ep = 0; ep < cfg.episodes; ++ep) {
    const std::size_t goal = pick(goals);
    env.reset(seed, goal);
    follower_view.reset();
    std::vector<ObservedStep> seen;
    const double eps = cfg.learner.epsilon_at(ep, cfg.episodes);
    std::vector<std::vector<std::size_t>> joint;
    bool have_prev = false;
    AugmentedObservation prev_obs[2];
    std::size_t prev_act[2] = {0, 0};
    double prev_rew[2] = {0.0, 0.0};
    ObservationKey prev_key = 0;
    while (!env.done()) {
      if (have_prev) {
        follower_view.step(prev_key, prev_act[kLeader]);
        seen.push_back({prev_key, prev_act[kLeader]});
      }
      AugmentedObservation now[2] = {observe(0), observe(1)};
      std::vector<std::size_t> acts(2);
      for (std::size_t i = 0; i < 2; ++i) {
        learners[i].action_values(now[i], q);
        acts[i] = select_action(q, eps, explore[i]);
      }
      const ObservationKey key = env.observation_key(kFollower, kLeader);
      const EnvStep st = env.step(acts);
      if (have_prev) {
        for (std::size_t i = 0; i < 2; ++i) learn(i, prev_obs[i], prev_act[i], now[i], acts[i], false, prev_rew[i]);
      }
      if (st.done) {
        follower_view.step(key, acts[kLeader]);
        seen.push_back({key, acts[kLeader]});
        for (std::size_t i = 0; i < 2; ++i) learn(i, now[i], acts[i], observe(i), acts[i], true, st.rewards[i]);
      } else {
        for (std::size_t i = 0; i < 2; ++i) {
          prev_obs[i] = now[i];
          prev_act[i] = acts[i];
          prev_rew[i] = st.rewards[i];
        }
        prev_key = key;
        have_prev = true;
      }
      joint.push_back(std::move(acts));
    }
    if (empirical) train_empirical(*empirical, seen, OneHotGoal{goal});
    episodes.push_back(std::move(joint));
  }
  return episodes;
}

CriterionResult check_behavioral_identity(std::size_t episodes, std::uint64_t seed) {
  const auto t0 = Clock::now();
  CriterionResult r{8, "beta=0 behavioral identity", Verdict::Pass, "", 0.0};
  ExperimentConfig cfg = desk_maze_config();
  cfg.episodes = episodes;
  const auto reference = run_maze_bypass(cfg, seed);

  const auto collect = [&](const ExperimentConfig& c, double beta) {
    std::vector<std::vector<std::vector<std::size_t>>> eps;
    run_cell(c, {beta, seed}, nullptr, [&](std::size_t, const EpisodeRecord& rec) { eps.push_back(rec.actions); });
    return eps;
  };
  ExperimentConfig disabled = cfg;
  disabled.shaping = false;
  const auto off = collect(disabled, 0.0);
  const auto off_high = collect(disabled, 0.1);
  const auto zero = collect(cfg, 0.0);
  std::size_t steps = 0;
  for (const auto& e : reference) steps += e.size();
  const bool same_off = off == reference;
  const bool same_off_high = off_high == reference;
  const bool same_zero = zero == reference;
  r.seconds = seconds_since(t0);
  r.detail = std::to_string(episodes) + " episodes / " + std::to_string(steps) +
             " joint actions vs bypass loop: shaping off " + (same_off ? "identical" : "DIFFERENT") +
             ", shaping off at beta=0.1 " + (same_off_high ? "identical" : "DIFFERENT") + ", beta=0 shaped " +
             (same_zero ? "identical" : "DIFFERENT");
  if (!same_off || !same_off_high || !same_zero) r.verdict = Verdict::Fail;
  return r;
}

CellSummary summarize(const RunCell& cell, const std::vector<MetricRow>& rows, std::size_t window) {
  CellSummary s{cell.beta, cell.seed};
  const std::size_t n = rows.size();
  const std::size_t w = std::min(window, n);
  if (w == 0) return s;
  for (std::size_t i = n - w; i < n; ++i) {
    s.pcr += rows[i].prediction_correct ? 1.0 : 0.0;
    s.ptr += rows[i].ptr;
    s.reward += rows[i].return_raw;
    s.success += rows[i].success ? 1.0 : 0.0;
  }
  const double d = static_cast<double>(w);
  s.pcr /= d;
  s.ptr /= d;
  s.reward /= d;
  s.success /= d;
  return s;
}

std::vector<CellSummary> train_and_summarize(const ExperimentConfig& cfg, std::size_t window) {
  const auto cells = cells_of(cfg);
  std::vector<CellSummary> out(cells.size());
  std::vector<std::string> errors(cells.size());
  const long n = static_cast<long>(cells.size());
  [[maybe_unused]] const int threads = thread_cap();
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (long i = 0; i < n; ++i) {
    try {
      out[i] = summarize(cells[i], run_cell(cfg, cells[i]).rows, window);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw std::runtime_error(e);
  }
  return out;
}

namespace {

const CellSummary& find(const std::vector<CellSummary>& all, double beta, std::uint64_t seed) {
  for (const auto& s : all) {
    if (s.beta == beta && s.seed == seed) return s;
  }
  throw StateError("missing cell in sweep");
}

std::string per_seed(const std::vector<CellSummary>& all, const std::vector<double>& betas,
                     const std::vector<std::uint64_t>& seeds, double CellSummary::*field) {
  std::ostringstream o;
  for (std::size_t b = 0; b < betas.size(); ++b) {
    o << (b ? " | " : "") << "beta=" << format_real(betas[b]) << ":";
    for (auto s : seeds) o << ' ' << fmt("%.3f", find(all, betas[b], s).*field);
  }
  return o.str();
}

}  // namespace

std::vector<CriterionResult> check_maze_sweep(const ExperimentConfig& cfg) {
  const auto t0 = Clock::now();
  const std::size_t window = 5000;
  const auto all = train_and_summarize(cfg, window);
  const double secs = seconds_since(t0);
  const std::vector<double> betas{0.0, 0.01, 0.1};
  const auto& seeds = cfg.seeds;

  std::size_t ordered = 0, improved = 0;
  std::vector<double> r01, r1;
  for (auto s : seeds) {
    const auto& a = find(all, 0.0, s);
    const auto& b = find(all, 0.01, s);
    const auto& c = find(all, 0.1, s);
    if (c.pcr > b.pcr && b.pcr > a.pcr && c.ptr < b.ptr && b.ptr < a.ptr) ++ordered;
    if (b.reward >= a.reward + 0.1) ++improved;
    r01.push_back(b.reward);
    r1.push_back(c.reward);
  }
  const auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
  };
  const std::size_t need = seeds.size() >= 5 ? seeds.size() - 1 : seeds.size();

  CriterionResult c5{5, "beta-monotone legibility trend", Verdict::Pass, "", secs};
  c5.detail = std::to_string(ordered) + "/" + std::to_string(seeds.size()) +
              " seeds strictly ordered (need " + std::to_string(need) + "); PCR " +
              per_seed(all, betas, seeds, &CellSummary::pcr) + "; PTR " +
              per_seed(all, betas, seeds, &CellSummary::ptr);
  if (ordered < need || secs > 20 * 60) c5.verdict = Verdict::Fail;

  CriterionResult c6{6, "reward improvement", Verdict::Pass, "", secs};
  c6.detail = std::to_string(improved) + "/" + std::to_string(seeds.size()) +
              " seeds with reward(0.01) >= reward(0) + 0.1 (need " + std::to_string(need) + "); reward " +
              per_seed(all, betas, seeds, &CellSummary::reward) + "; success " +
              per_seed(all, betas, seeds, &CellSummary::success);
  if (improved < need) c6.verdict = Verdict::Fail;

  const double m01 = median(r01);
  const double m1 = median(r1);
  CriterionResult c7{7, "over-legibility degradation", Verdict::Pass, "", secs};
  c7.detail = "median reward(0.01) = " + fmt("%.4f", m01) + ", median reward(0.1) = " + fmt("%.4f", m1);
  if (!(m01 >= m1)) c7.verdict = Verdict::Fail;
  return {c5, c6, c7};
}

CriterionResult check_particle(bool learning, std::size_t random_steps, std::uint64_t seed) {
  const auto t0 = Clock::now();
  CriterionResult r{9, "particle-world physics", Verdict::Pass, "", 0.0};

  // Closed form under constant force with no damping and no clamps.
  double kin_err = 0.0;
  {
    Rng rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    ParticlePhysics ph;
    ph.damping = 0.0;
    ph.max_speed = 1e9;
    ph.max_force = 1e9;
    ph.max_steps = 1000;
    for (int trial = 0; trial < 50; ++trial) {
      ParticleWorld w = nav_reset(rng, 0, ph);
      // spawn in the usual arena, then lift the walls and obstacles
      w.physics.arena_half_width = 1e9;
      w.obstacles.clear();
      std::array<Vec2, kNavAgents> p0 = w.pos, v0, f;
      for (std::size_t i = 0; i < kNavAgents; ++i) {
        v0[i] = {u(rng), u(rng)};
        f[i] = {u(rng), u(rng)};
        w.vel[i] = v0[i];
      }
      const double dt = ph.dt;
      const double m = ph.mass;
      for (int k = 1; k <= 40; ++k) {
        nav_step(w, f);
        for (std::size_t i = 0; i < kNavAgents; ++i) {
          const double kk = static_cast<double>(k);
          const Vec2 a{f[i].x / m, f[i].y / m};
          const Vec2 want_v{v0[i].x + kk * a.x * dt, v0[i].y + kk * a.y * dt};
          const double tri = kk * (kk + 1.0) / 2.0;
          const Vec2 want_p{p0[i].x + kk * v0[i].x * dt + a.x * dt * dt * tri,
                            p0[i].y + kk * v0[i].y * dt + a.y * dt * dt * tri};
          kin_err = std::max({kin_err, std::abs(w.pos[i].x - want_p.x), std::abs(w.pos[i].y - want_p.y),
                              std::abs(w.vel[i].x - want_v.x), std::abs(w.vel[i].y - want_v.y)});
        }
        if (w.done) break;
      }
    }
  }

  // Random forces on the canonical world.
  double worst_pen = 0.0;
  double worst_speed = 0.0;
  {
    Rng rng(seed + 1);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    std::uniform_int_distribution<std::size_t> goal(0, kNavLandmarks - 1);
    const ParticlePhysics ph;
    ParticleWorld w = nav_reset(rng, goal(rng), ph);
    for (std::size_t s = 0; s < random_steps; ++s) {
      if (w.done) w = nav_reset(rng, goal(rng), ph);
      std::array<Vec2, kNavAgents> f;
      for (auto& x : f) x = {u(rng), u(rng)};
      nav_step(w, f);
      for (std::size_t i = 0; i < kNavAgents; ++i) {
        worst_speed = std::max(worst_speed, norm(w.vel[i]) - ph.max_speed);
        for (const auto& o : w.obstacles) {
          worst_pen = std::max(worst_pen, (o.radius + ph.agent_radius) - norm(w.pos[i] - o.center));
        }
      }
    }
  }
  const double physics_secs = seconds_since(t0);
  r.detail = "kinematics max err " + fmt("%.3g", kin_err) + ", max penetration " + fmt("%.3g", worst_pen) +
             ", max speed excess " + fmt("%.3g", worst_speed) + " over " + std::to_string(random_steps) +
             " steps (" + fmt("%.2f", physics_secs) + " s)";
  if (!(kin_err <= 1e-9) || !(worst_pen <= 1e-6) || !(worst_speed <= 1e-12) || physics_secs >= 10.0) {
    r.verdict = Verdict::Fail;
  }

  if (learning) {
    ExperimentConfig cfg = desk_nav_config();
    cfg.betas = {0.0, 0.01};
    const auto all = train_and_summarize(cfg, cfg.window);
    std::size_t better = 0;
    std::ostringstream o;
    for (auto s : cfg.seeds) {
      const auto& a = find(all, 0.0, s);
      const auto& b = find(all, 0.01, s);
      if (b.reward >= a.reward) ++better;
      o << ' ' << fmt("%.3f", a.reward) << "->" << fmt("%.3f", b.reward);
    }
    r.detail += "; tile_td reward beta 0->0.01:" + o.str() + " (" + std::to_string(better) + "/" +
                std::to_string(cfg.seeds.size()) + " seeds, need 3)";
    if (better < 3) r.verdict = Verdict::Fail;
  } else {
    r.detail += "; tile_td comparison runs in the desk suite";
  }
  r.seconds = seconds_since(t0);
  return r;
}

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

CriterionResult check_determinism() {
  const auto t0 = Clock::now();
  CriterionResult r{10, "determinism", Verdict::Pass, "", 0.0};
  const auto base = std::filesystem::temp_directory_path() /
                    ("maal_determinism_" + std::to_string(static_cast<unsigned long long>(
                                               Clock::now().time_since_epoch().count())));
  std::size_t compared = 0;
  std::size_t differing = 0;

  ExperimentConfig maze = desk_maze_config();
  maze.episodes = 2000;
  ExperimentConfig nav = desk_nav_config();
  nav.episodes = 100;
  for (const auto* cfg : {&maze, &nav}) {
    const RunCell cell{0.01, 3};
    const auto a = base / (cfg->env + "_a");
    const auto b = base / (cfg->env + "_b");
    run_cell_to_disk(*cfg, cell, a);
    run_cell_to_disk(*cfg, cell, b);
    ++compared;
    if (slurp(cell_dir(a, cell) / "metrics.csv") != slurp(cell_dir(b, cell) / "metrics.csv")) ++differing;
  }

  ExperimentConfig grid = maze;
  grid.episodes = 300;
  grid.betas = {0.0, 0.1};
  grid.seeds = {1, 2};
  run_cells_serial(grid, base / "serial");
  run_cells_parallel(grid, base / "parallel");
  for (const auto& cell : cells_of(grid)) {
    ++compared;
    if (slurp(cell_dir(base / "serial", cell) / "metrics.csv") !=
        slurp(cell_dir(base / "parallel", cell) / "metrics.csv")) {
      ++differing;
    }
  }
  std::error_code ec;
  std::filesystem::remove_all(base, ec);
  r.seconds = seconds_since(t0);
  r.detail = std::to_string(compared) + " CSV pairs compared (reruns and serial vs parallel), " +
             std::to_string(differing) + " differ";
  if (differing != 0) r.verdict = Verdict::Fail;
  return r;
}

ExperimentConfig desk_maze_config() { return load_config(std::string(MAAL_CONFIG_DIR) + "/lfm_desk.json"); }
ExperimentConfig desk_nav_config() { return load_config(std::string(MAAL_CONFIG_DIR) + "/nav_desk.json"); }

SuiteReport run_suite(const std::string& suite, std::ostream& out) {
  if (suite != "unit" && suite != "properties" && suite != "desk") {
    throw ConfigError("suite must be unit, properties or desk");
  }
  const bool props = suite != "unit";
  const bool desk = suite == "desk";
  SuiteReport report;
  const auto add = [&](CriterionResult r) {
    print_result(out, r);
    report.results.push_back(std::move(r));
  };
  const auto skip = [&](int id, const char* name) {
    add({id, name, Verdict::Skip, std::string("not part of the ") + suite + " suite", 0.0});
  };

  add(check_bayes_oracle());
  add(check_telescoping());
  if (props) add(check_loop_property()); else skip(3, "loop property");
  add(check_metric_fixtures());
  if (desk) {
    for (auto& r : check_maze_sweep(desk_maze_config())) add(std::move(r));
  } else {
    skip(5, "beta-monotone legibility trend");
    skip(6, "reward improvement");
    skip(7, "over-legibility degradation");
  }
  if (props) add(check_behavioral_identity()); else skip(8, "beta=0 behavioral identity");
  if (props) add(check_particle(desk)); else skip(9, "particle-world physics");
  if (props) add(check_determinism()); else skip(10, "determinism");

  std::size_t pass = 0, fail = 0, skipped = 0;
  for (const auto& r : report.results) {
    if (r.verdict == Verdict::Pass) ++pass;
    else if (r.verdict == Verdict::Fail) ++fail;
    else ++skipped;
  }
  out << "suite " << suite << ": " << pass << " passed, " << fail << " failed, " << skipped << " skipped"
      << std::endl;
  return report;
}

}  // namespace maal
