#include "maal/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "maal/env_adapters.hpp"
#include "maal/errors.hpp"
#include "maal/legibility.hpp"
#include "maal/recognition.hpp"

#ifndef MAAL_DATA_DIR
#define MAAL_DATA_DIR "data"
#endif

namespace maal {

using nlohmann::json;

void ExperimentConfig::validate() const {
  if (env != "lfm" && env != "simple_navigation") throw ConfigError("env must be lfm or simple_navigation");
  if (algo != "q_learning" && algo != "sarsa" && algo != "tile_td") {
    throw ConfigError("algo must be q_learning, sarsa or tile_td");
  }
  if (is_maze() && algo == "tile_td") throw ConfigError("tile_td is for simple_navigation");
  if (!is_maze() && algo != "tile_td") throw ConfigError("simple_navigation is trained with tile_td");
  if (betas.empty()) throw ConfigError("at least one beta");
  for (double b : betas) {
    if (!(b >= 0.0) || !std::isfinite(b)) throw ConfigError("betas must be finite and non-negative");
  }
  if (episodes < 1) throw ConfigError("episodes must be at least 1");
  if (seeds.empty()) throw ConfigError("at least one seed");
  const auto rec = resolved_recognizer();
  if (rec != "empirical" && rec != "maxent") throw ConfigError("recognizer must be empirical or maxent");
  if (!(temperature > 0.0)) throw ConfigError("temperature must be positive");
  if (!(laplace_alpha > 0.0)) throw ConfigError("laplace_alpha must be positive");
  if (window < 1) throw ConfigError("window must be at least 1");
  if (tilings < 1 || tiles_per_dim < 1) throw ConfigError("tile coder needs tilings and tiles");
  if (replay_capacity > 0 && replay_batch == 0) throw ConfigError("replay needs a batch size");
  learner.validate();
  validate_mode(divergence_mode(), is_maze() ? kMazeExits : kNavLandmarks);
}

std::string ExperimentConfig::resolved_recognizer() const {
  if (!recognizer.empty()) return recognizer;
  return is_maze() ? "empirical" : "maxent";
}

std::size_t ExperimentConfig::resolved_max_steps() const {
  if (max_steps > 0) return max_steps;
  return is_maze() ? maze.max_steps : physics.max_steps;
}

DivergenceMode ExperimentConfig::divergence_mode() const {
  if (divergence == "reverse_kl") return ReverseKL{};
  if (divergence == "smoothed_forward_kl") return SmoothedForwardKL{eps_smooth};
  throw ConfigError("divergence must be reverse_kl or smoothed_forward_kl");
}

std::string ExperimentConfig::map_path() const {
  return map.empty() ? std::string(MAAL_DATA_DIR) + "/maps/lfm_v1.txt" : map;
}

namespace {

template <typename T>
void take(const json& j, const char* key, T& into) {
  if (j.contains(key)) into = j.at(key).get<T>();
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig c;
  try {
    take(j, "env", c.env);
    take(j, "algo", c.algo);
    take(j, "betas", c.betas);
    take(j, "episodes", c.episodes);
    take(j, "max_steps", c.max_steps);
    take(j, "seeds", c.seeds);
    take(j, "divergence", c.divergence);
    take(j, "eps_smooth", c.eps_smooth);
    take(j, "recognizer", c.recognizer);
    take(j, "temperature", c.temperature);
    take(j, "laplace_alpha", c.laplace_alpha);
    take(j, "shaping", c.shaping);
    take(j, "oracle_follower", c.oracle_follower);
    take(j, "map", c.map);
    take(j, "window", c.window);
    take(j, "out", c.out);
    if (j.contains("maze")) {
      const auto& m = j.at("maze");
      take(m, "max_steps", c.maze.max_steps);
      take(m, "move_cost", c.maze.move_cost);
      take(m, "success_bonus", c.maze.success_bonus);
    }
    if (j.contains("physics")) {
      const auto& p = j.at("physics");
      take(p, "dt", c.physics.dt);
      take(p, "damping", c.physics.damping);
      take(p, "mass", c.physics.mass);
      take(p, "max_speed", c.physics.max_speed);
      take(p, "max_force", c.physics.max_force);
      take(p, "agent_radius", c.physics.agent_radius);
      take(p, "capture_radius", c.physics.capture_radius);
      take(p, "success_bonus", c.physics.success_bonus);
      take(p, "max_steps", c.physics.max_steps);
    }
    if (j.contains("learner")) {
      const auto& l = j.at("learner");
      take(l, "alpha", c.learner.alpha);
      take(l, "gamma", c.learner.gamma);
      take(l, "epsilon_start", c.learner.epsilon_start);
      take(l, "epsilon_end", c.learner.epsilon_end);
      take(l, "epsilon_decay_fraction", c.learner.epsilon_decay_fraction);
    }
    if (j.contains("tile")) {
      const auto& t = j.at("tile");
      take(t, "tilings", c.tilings);
      take(t, "tiles_per_dim", c.tiles_per_dim);
      take(t, "replay_capacity", c.replay_capacity);
      take(t, "replay_batch", c.replay_batch);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  return json{
      {"env", c.env},
      {"algo", c.algo},
      {"betas", c.betas},
      {"episodes", c.episodes},
      {"max_steps", c.resolved_max_steps()},
      {"seeds", c.seeds},
      {"divergence", c.divergence},
      {"eps_smooth", c.eps_smooth},
      {"recognizer", c.resolved_recognizer()},
      {"temperature", c.temperature},
      {"laplace_alpha", c.laplace_alpha},
      {"shaping", c.shaping},
      {"oracle_follower", c.oracle_follower},
      {"map", c.map_path()},
      {"window", c.window},
      {"out", c.out},
      {"maze", {{"max_steps", c.maze.max_steps}, {"move_cost", c.maze.move_cost},
                {"success_bonus", c.maze.success_bonus}}},
      {"physics", {{"dt", c.physics.dt}, {"damping", c.physics.damping}, {"mass", c.physics.mass},
                   {"max_speed", c.physics.max_speed}, {"max_force", c.physics.max_force},
                   {"agent_radius", c.physics.agent_radius}, {"capture_radius", c.physics.capture_radius},
                   {"success_bonus", c.physics.success_bonus}, {"max_steps", c.physics.max_steps}}},
      {"learner", {{"alpha", c.learner.alpha}, {"gamma", c.learner.gamma},
                   {"epsilon_start", c.learner.epsilon_start}, {"epsilon_end", c.learner.epsilon_end},
                   {"epsilon_decay_fraction", c.learner.epsilon_decay_fraction}}},
      {"tile", {{"tilings", c.tilings}, {"tiles_per_dim", c.tiles_per_dim},
                {"replay_capacity", c.replay_capacity}, {"replay_batch", c.replay_batch}}},
  };
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config " + path + ": " + e.what());
  }
  return config_from_json(j);
}

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t stream_seed(std::uint64_t seed, std::string_view consumer) {
  std::uint64_t s = seed;
  std::uint64_t mixed = splitmix64(s) ^ fnv1a64(consumer);
  return splitmix64(mixed);
}

Rng make_stream(std::uint64_t seed, std::string_view consumer) { return Rng(stream_seed(seed, consumer)); }

std::vector<RunCell> cells_of(const ExperimentConfig& c) {
  std::vector<RunCell> out;
  for (double b : c.betas) {
    for (auto s : c.seeds) out.push_back({b, s});
  }
  return out;
}

std::filesystem::path cell_dir(const std::filesystem::path& root, const RunCell& cell) {
  return root / ("beta=" + format_real(cell.beta)) / ("seed=" + std::to_string(cell.seed));
}

namespace {

// Everything one cell owns; nothing here is shared between cells.
struct CellRig {
  std::unique_ptr<MultiAgentEnv> env;
  std::unique_ptr<EmpiricalPolicyModel> empirical;
  std::unique_ptr<ActionLikelihood> maxent;
  std::vector<std::unique_ptr<Learner>> learners;
  std::unique_ptr<LegibilityPipeline> pipeline;
  std::shared_ptr<const MazeLayout> layout;
  Rng goals;
  Rng spawn;
  std::size_t n_goals = 0;
};

const ActionLikelihood* backend_of(const CellRig& rig) {
  return rig.empirical ? static_cast<const ActionLikelihood*>(rig.empirical.get()) : rig.maxent.get();
}

CellRig build_rig(const ExperimentConfig& cfg, const RunCell& cell) {
  CellRig rig;
  rig.goals = make_stream(cell.seed, "goals");
  rig.spawn = make_stream(cell.seed, "spawn");
  const bool empirical = cfg.resolved_recognizer() == "empirical";
  ShapingConfig shaping;
  shaping.beta = cell.beta;
  shaping.mode = cfg.divergence_mode();
  shaping.enabled = cfg.shaping;
  Topology topo;
  std::vector<Rng> explore;

  if (cfg.is_maze()) {
    rig.layout = std::make_shared<const MazeLayout>(MazeLayout::load(cfg.map_path()));
    MazeConfig mc = cfg.maze;
    mc.max_steps = cfg.resolved_max_steps();
    rig.env = std::make_unique<MazeEnv>(rig.layout, mc, cfg.oracle_follower);
    rig.n_goals = kMazeExits;
    if (empirical) {
      rig.empirical = std::make_unique<EmpiricalPolicyModel>(kMazeExits, kMazeActions, cfg.laplace_alpha);
    } else {
      rig.maxent = std::make_unique<MaxEntLikelihoodModel>(std::make_shared<MazeGoalValues>(*rig.layout),
                                                           cfg.temperature);
    }
    const auto rule = cfg.algo == "sarsa" ? TabularRule::Sarsa : TabularRule::QLearning;
    for (int i = 0; i < 2; ++i) {
      rig.learners.push_back(std::make_unique<TabularLearner>(kMazeActions, maze_learner_key, cfg.learner, rule));
    }
    topo.knows_goal = {true, cfg.oracle_follower};
    topo.links = {{kFollower, kLeader, backend_of(rig)}};
    shaping.shaped_agents = {kLeader};
  } else {
    ParticlePhysics ph = cfg.physics;
    ph.max_steps = cfg.resolved_max_steps();
    NavKeyGrid grid;
    rig.env = std::make_unique<NavEnv>(ph, grid);
    rig.n_goals = kNavLandmarks;
    if (empirical) {
      rig.empirical = std::make_unique<EmpiricalPolicyModel>(kNavLandmarks, kNavActions, cfg.laplace_alpha);
    } else {
      rig.maxent = std::make_unique<MaxEntLikelihoodModel>(std::make_shared<NavGoalValues>(ph, grid),
                                                           cfg.temperature);
    }
    const double hw = ph.arena_half_width;
    for (std::size_t i = 0; i < kNavAgents; ++i) {
      TileCoder::Shape shape{{-hw, -hw}, {hw, hw}, cfg.tilings, cfg.tiles_per_dim, kNavLandmarks, kNavActions};
      rig.learners.push_back(std::make_unique<TileLearner>(
          TileCoder(shape), nav_learner_projection, cfg.learner, cfg.replay_capacity, cfg.replay_batch,
          stream_seed(cell.seed, "agent" + std::to_string(i) + ".replay")));
    }
    topo.knows_goal = {true, false, false};
    topo.links = {{1, 0, backend_of(rig)}, {2, 1, backend_of(rig)}};
    shaping.shaped_agents = {0, 1};
  }

  std::vector<Learner*> raw;
  for (std::size_t i = 0; i < rig.learners.size(); ++i) {
    raw.push_back(rig.learners[i].get());
    explore.push_back(make_stream(cell.seed, "agent" + std::to_string(i) + ".explore"));
  }
  rig.pipeline = std::make_unique<LegibilityPipeline>(*rig.env, std::move(raw), std::move(topo),
                                                      std::move(shaping), std::move(explore));
  return rig;
}

std::size_t reset_episode(CellRig& rig, const ExperimentConfig& cfg, std::uint64_t seed) {
  std::uniform_int_distribution<std::size_t> pick(0, rig.n_goals - 1);
  const std::size_t goal = pick(rig.goals);
  if (cfg.is_maze()) {
    static_cast<MazeEnv&>(*rig.env).reset(seed, goal);
  } else {
    static_cast<NavEnv&>(*rig.env).reset(rig.spawn, goal);
  }
  rig.pipeline->begin_episode();
  return goal;
}

}  // namespace

CellResult run_cell(const ExperimentConfig& cfg, const RunCell& cell, const std::atomic<bool>* stop,
                    const EpisodeObserver& observer) {
  cfg.validate();
  CellRig rig = build_rig(cfg, cell);
  CellResult result;
  result.rows.reserve(cfg.episodes);
  std::vector<double> team(rig.env->num_agents());
  for (std::size_t ep = 0; ep < cfg.episodes; ++ep) {
    if (stop != nullptr && stop->load()) return result;
    EpisodeRecord rec;
    rec.true_goal = reset_episode(rig, cfg, cell.seed);
    const double eps = cfg.learner.epsilon_at(ep, cfg.episodes);
    while (rig.pipeline->active()) {
      StepOutput out = rig.pipeline->step(eps);
      double raw = 0.0;
      for (double r : out.rewards_raw) raw += r;
      rec.rewards_raw.push_back(raw);
      rec.return_raw += raw;
      double shaped = 0.0;
      for (const auto& tr : out.transitions) {
        shaped += tr.reward_shaped;
        rec.klg_sum += tr.klg;
        rig.learners[tr.agent]->learn(tr);
      }
      rec.rewards_shaped.push_back(shaped);
      rec.return_shaped += shaped;
      for (auto& round : out.belief_rounds) rec.beliefs.push_back(std::move(round));
      rec.actions.push_back(std::move(out.actions));
      if (out.done) rec.success = out.success;
    }
    rec.steps = rec.actions.size();
    rec.observed_trajectory = rig.pipeline->link_trajectory(0);
    if (rig.empirical) train_empirical(*rig.empirical, rec.observed_trajectory, OneHotGoal{rec.true_goal});
    result.rows.push_back(make_metric_row(rec, ep, cell.seed, cell.beta));
    if (observer) observer(ep, rec);
  }
  result.complete = true;
  return result;
}

namespace {

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace

json make_manifest(const ExperimentConfig& config, const RunCell& cell, const std::string& status) {
  std::uint64_t map_hash = 0;
  if (config.is_maze()) map_hash = MazeLayout::load(config.map_path()).hash();
  char hash_hex[17];
  std::snprintf(hash_hex, sizeof hash_hex, "%016llx", static_cast<unsigned long long>(map_hash));
  return json{{"config", config_to_json(config)},
              {"cell", {{"beta", cell.beta}, {"seed", cell.seed}}},
              {"map_hash", config.is_maze() ? std::string(hash_hex) : std::string()},
              {"version", kVersion},
              {"started_at", utc_timestamp()},
              {"status", status}};
}

bool run_cell_to_disk(const ExperimentConfig& config, const RunCell& cell, const std::filesystem::path& root,
                      const std::atomic<bool>* stop) {
  const auto dir = cell_dir(root, cell);
  std::filesystem::create_directories(dir);
  json manifest = make_manifest(config, cell, "running");
  write_json(dir / "manifest.json", manifest);

  const CellResult result = run_cell(config, cell, stop);
  {
    std::ofstream csv(dir / "metrics.csv", std::ios::binary | std::ios::trunc);
    write_metric_header(csv);
    for (const auto& row : result.rows) write_metric_row(csv, row);
    csv.flush();
    if (!csv) throw std::runtime_error("cannot write " + (dir / "metrics.csv").string());
  }
  manifest["status"] = result.complete ? "complete" : "incomplete";
  manifest["episodes_written"] = result.rows.size();
  write_json(dir / "manifest.json", manifest);
  return result.complete;
}

bool run_cells_serial(const ExperimentConfig& config, const std::filesystem::path& root,
                      const std::atomic<bool>* stop) {
  config.validate();
  bool all = true;
  for (const auto& cell : cells_of(config)) all = run_cell_to_disk(config, cell, root, stop) && all;
  return all;
}

int thread_cap() {
  int n = 1;
#ifdef _OPENMP
  n = omp_get_max_threads();
#endif
  if (const char* env = std::getenv("LEGIBLE_MARL_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) n = std::min(n, cap);
  }
  return std::max(n, 1);
}

bool run_cells_parallel(const ExperimentConfig& config, const std::filesystem::path& root,
                        const std::atomic<bool>* stop) {
  config.validate();
  const auto cells = cells_of(config);
  std::vector<char> ok(cells.size(), 0);
  std::vector<std::string> errors(cells.size());
  const long n = static_cast<long>(cells.size());
  [[maybe_unused]] const int threads = thread_cap();
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (long i = 0; i < n; ++i) {
    try {
      ok[i] = run_cell_to_disk(config, cells[i], root, stop) ? 1 : 0;
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw std::runtime_error(e);
  }
  return std::all_of(ok.begin(), ok.end(), [](char c) { return c != 0; });
}

std::vector<LoadedCell> load_run(const std::filesystem::path& root) {
  std::vector<LoadedCell> out;
  if (!std::filesystem::is_directory(root)) return out;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file() || entry.path().filename() != "manifest.json") continue;
    std::ifstream in(entry.path());
    json m;
    try {
      in >> m;
    } catch (const json::exception&) {
      continue;
    }
    if (m.value("status", "") != "complete") continue;
    std::ifstream csv(entry.path().parent_path() / "metrics.csv");
    if (!csv) continue;
    LoadedCell cell;
    cell.cell.beta = m.at("cell").at("beta").get<double>();
    cell.cell.seed = m.at("cell").at("seed").get<std::uint64_t>();
    cell.rows = read_metric_csv(csv);
    if (!cell.rows.empty()) out.push_back(std::move(cell));
  }
  std::sort(out.begin(), out.end(), [](const LoadedCell& a, const LoadedCell& b) {
    return a.cell.beta != b.cell.beta ? a.cell.beta < b.cell.beta : a.cell.seed < b.cell.seed;
  });
  return out;
}

namespace {

struct Series {
  double beta = 0.0;
  std::vector<double> x, mean, lo, hi;
};

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};

std::string svg_chart(const std::string& title, const std::string& ylabel, const std::vector<Series>& series,
                      bool unit_range) {
  constexpr double W = 720, H = 420, L = 70, R = 150, T = 40, B = 50;
  double xmax = 1, ymin = unit_range ? 0.0 : 1e300, ymax = unit_range ? 1.0 : -1e300;
  for (const auto& s : series) {
    if (!s.x.empty()) xmax = std::max(xmax, s.x.back());
    if (unit_range) continue;
    for (double v : s.lo) ymin = std::min(ymin, v);
    for (double v : s.hi) ymax = std::max(ymax, v);
  }
  if (!(ymax > ymin)) {
    ymin -= 0.5;
    ymax += 0.5;
  }
  const auto px = [&](double x) { return L + (W - L - R) * x / xmax; };
  const auto py = [&](double y) { return T + (H - T - B) * (1.0 - (y - ymin) / (ymax - ymin)); };

  std::ostringstream o;
  o.setf(std::ios::fixed);
  o.precision(2);
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 "
    << W << ' ' << H << "\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">"
    << title << "</text>\n"
    << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
    << "\" stroke=\"black\"/>\n"
    << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double yv = ymin + (ymax - ymin) * k / 4.0;
    const double xv = xmax * k / 4.0;
    o << "<text x=\"" << L - 6 << "\" y=\"" << py(yv) + 4
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << format_real(std::round(yv * 1000) / 1000)
      << "</text>\n";
    o << "<text x=\"" << px(xv) << "\" y=\"" << H - B + 16
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << format_real(std::round(xv))
      << "</text>\n";
  }
  o << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 10
    << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">episode</text>\n"
    << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" transform=\"rotate(-90 16 " << (T + H - B) / 2
    << ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << ylabel << "</text>\n";

  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    const char* color = kPalette[i % std::size(kPalette)];
    o << "<g class=\"series\" data-beta=\"" << format_real(s.beta) << "\">\n";
    o << "<polygon fill=\"" << color << "\" fill-opacity=\"0.2\" stroke=\"none\" points=\"";
    for (std::size_t k = 0; k < s.x.size(); ++k) o << px(s.x[k]) << ',' << py(s.hi[k]) << ' ';
    for (std::size_t k = s.x.size(); k-- > 0;) o << px(s.x[k]) << ',' << py(s.lo[k]) << ' ';
    o << "\"/>\n<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t k = 0; k < s.x.size(); ++k) o << px(s.x[k]) << ',' << py(s.mean[k]) << ' ';
    o << "\"/>\n";
    const double ly = T + 20.0 * static_cast<double>(i);
    o << "<line x1=\"" << W - R + 12 << "\" y1=\"" << ly << "\" x2=\"" << W - R + 36 << "\" y2=\"" << ly
      << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n"
      << "<text x=\"" << W - R + 42 << "\" y=\"" << ly + 4 << "\" font-family=\"sans-serif\" font-size=\"12\">beta="
      << format_real(s.beta) << "</text>\n</g>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace

std::vector<std::filesystem::path> plot_run(const std::filesystem::path& root, std::size_t window) {
  const auto cells = load_run(root);
  if (cells.empty()) throw ConfigError("no complete metrics under " + root.string());

  std::map<double, std::vector<std::vector<RollingRow>>> by_beta;
  for (const auto& c : cells) {
    by_beta[c.cell.beta].push_back(aggregate(c.rows, std::min(window, c.rows.size())));
  }

  struct Metric {
    const char* file;
    const char* title;
    const char* ylabel;
    double RollingRow::*field;
    bool unit;
  };
  const Metric metrics[] = {
      {"reward.svg", "Rolling raw episode reward", "reward", &RollingRow::return_raw, false},
      {"pcr.svg", "Prediction correctness ratio", "PCR", &RollingRow::pcr, true},
      {"ptr.svg", "Prediction time ratio", "PTR", &RollingRow::ptr, true},
      {"success.svg", "Success rate", "success", &RollingRow::success, true},
  };

  std::vector<std::filesystem::path> written;
  for (const auto& m : metrics) {
    std::vector<Series> series;
    for (const auto& [beta, runs] : by_beta) {
      std::size_t n = runs.front().size();
      for (const auto& r : runs) n = std::min(n, r.size());
      const std::size_t stride = std::max<std::size_t>(1, n / 400);
      Series s;
      s.beta = beta;
      for (std::size_t k = 0; k < n; k += stride) {
        double sum = 0, sq = 0;
        for (const auto& r : runs) sum += r[k].*m.field;
        const double mean = sum / static_cast<double>(runs.size());
        for (const auto& r : runs) sq += (r[k].*m.field - mean) * (r[k].*m.field - mean);
        const double sd = runs.size() > 1 ? std::sqrt(sq / static_cast<double>(runs.size() - 1)) : 0.0;
        s.x.push_back(static_cast<double>(runs.front()[k].episode));
        s.mean.push_back(mean);
        s.lo.push_back(m.unit ? std::max(0.0, mean - sd) : mean - sd);
        s.hi.push_back(m.unit ? std::min(1.0, mean + sd) : mean + sd);
      }
      series.push_back(std::move(s));
    }
    const auto path = root / m.file;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << svg_chart(m.title, m.ylabel, series, m.unit);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    written.push_back(path);
  }
  return written;
}

}  // namespace maal
