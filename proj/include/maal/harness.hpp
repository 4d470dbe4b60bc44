#pragma once

// Experiment runner: resolved configuration, per-cell training loop, on-disk
// layout of a run and the SVG summaries drawn from it.

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "maal/belief.hpp"
#include "maal/learners.hpp"
#include "maal/maze.hpp"
#include "maal/metrics.hpp"
#include "maal/particle.hpp"

namespace maal {

inline constexpr const char* kVersion = "0.1.0";

struct ExperimentConfig {
  std::string env = "lfm";             // lfm | simple_navigation
  std::string algo = "q_learning";     // q_learning | sarsa | tile_td
  std::vector<double> betas{0.0, 0.01, 0.1};
  std::size_t episodes = 50000;
  std::size_t max_steps = 0;           // 0: the environment default (50 maze, 100 navigation)
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::string divergence = "reverse_kl";  // reverse_kl | smoothed_forward_kl
  double eps_smooth = 0.01;
  std::string recognizer = "";         // empirical | maxent; empty picks the environment default
  double temperature = 1.0;
  double laplace_alpha = 1.0;
  bool shaping = true;
  bool oracle_follower = false;
  std::string map;                     // empty: bundled maze
  MazeConfig maze;
  ParticlePhysics physics;
  LearnerConfig learner;
  std::size_t tilings = 8;
  std::size_t tiles_per_dim = 8;
  std::size_t replay_capacity = 0;
  std::size_t replay_batch = 0;
  std::size_t window = 1000;
  std::string out = "runs/default";

  void validate() const;
  bool is_maze() const { return env == "lfm"; }
  std::string resolved_recognizer() const;
  std::size_t resolved_max_steps() const;
  DivergenceMode divergence_mode() const;
  std::string map_path() const;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& c);
ExperimentConfig load_config(const std::string& path);

/// Independent 64-bit seed for (cell seed, consumer); new consumers never shift old streams.
std::uint64_t stream_seed(std::uint64_t seed, std::string_view consumer);
Rng make_stream(std::uint64_t seed, std::string_view consumer);

struct RunCell {
  double beta = 0.0;
  std::uint64_t seed = 0;
};

std::vector<RunCell> cells_of(const ExperimentConfig& c);
std::filesystem::path cell_dir(const std::filesystem::path& root, const RunCell& cell);

struct CellResult {
  std::vector<MetricRow> rows;
  bool complete = false;
};

/// Called once per finished episode with the full record (for tests and tooling).
using EpisodeObserver = std::function<void(std::size_t, const EpisodeRecord&)>;

/// Trains one (beta, seed) cell from scratch. Stops early, incomplete, when `stop` becomes true.
CellResult run_cell(const ExperimentConfig& config, const RunCell& cell, const std::atomic<bool>* stop = nullptr,
                    const EpisodeObserver& observer = {});

/// Runs a cell and writes `metrics.csv` and `manifest.json` under its directory.
bool run_cell_to_disk(const ExperimentConfig& config, const RunCell& cell, const std::filesystem::path& root,
                      const std::atomic<bool>* stop = nullptr);

/// Every cell in order on the calling thread. Returns true when all cells completed.
bool run_cells_serial(const ExperimentConfig& config, const std::filesystem::path& root,
                      const std::atomic<bool>* stop = nullptr);
/// Cells spread over OpenMP threads, capped by LEGIBLE_MARL_THREADS when set.
bool run_cells_parallel(const ExperimentConfig& config, const std::filesystem::path& root,
                        const std::atomic<bool>* stop = nullptr);
int thread_cap();

nlohmann::json make_manifest(const ExperimentConfig& config, const RunCell& cell, const std::string& status);

/// Reads every cell under `root` whose manifest says complete.
struct LoadedCell {
  RunCell cell;
  std::vector<MetricRow> rows;
};
std::vector<LoadedCell> load_run(const std::filesystem::path& root);

/// Writes reward.svg, pcr.svg, ptr.svg and success.svg into `root`; returns the paths.
std::vector<std::filesystem::path> plot_run(const std::filesystem::path& root, std::size_t window = 1000);

}  // namespace maal
