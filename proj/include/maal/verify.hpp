#pragma once

// Acceptance checks. Each criterion returns a measured value and a verdict;
// a suite runs a subset and reports the rest as skipped.

#include <iosfwd>
#include <string>
#include <vector>

#include "maal/harness.hpp"

namespace maal {

enum class Verdict { Pass, Fail, Skip };

struct CriterionResult {
  int id = 0;
  std::string name;
  Verdict verdict = Verdict::Skip;
  std::string detail;
  double seconds = 0.0;
};

struct SuiteReport {
  std::vector<CriterionResult> results;
  bool all_passed() const;
};

/// unit: 1, 2, 4. properties: adds 3, 8, 9 (physics), 10. desk: everything, including the training sweeps.
SuiteReport run_suite(const std::string& suite, std::ostream& out);
void print_result(std::ostream& out, const CriterionResult& r);

CriterionResult check_bayes_oracle(std::size_t instances = 1000, std::uint64_t seed = 11);
CriterionResult check_telescoping(std::size_t sequences = 1000, std::uint64_t seed = 12);
CriterionResult check_loop_property(std::size_t states = 20, std::size_t max_len = 6, std::uint64_t seed = 13);
CriterionResult check_metric_fixtures();
CriterionResult check_behavioral_identity(std::size_t episodes = 100, std::uint64_t seed = 7);
/// Physics properties; with `learning` also the tile_td beta comparison.
CriterionResult check_particle(bool learning, std::size_t random_steps = 10000, std::uint64_t seed = 14);
CriterionResult check_determinism();

/// Final-window summary of one trained cell.
struct CellSummary {
  double beta = 0.0;
  std::uint64_t seed = 0;
  double pcr = 0.0;
  double ptr = 0.0;
  double reward = 0.0;
  double success = 0.0;
};

CellSummary summarize(const RunCell& cell, const std::vector<MetricRow>& rows, std::size_t window);
/// Trains every cell of the config (OpenMP across cells) and summarizes the final window.
std::vector<CellSummary> train_and_summarize(const ExperimentConfig& cfg, std::size_t window);

/// Criteria 5-7 from one shared maze sweep.
std::vector<CriterionResult> check_maze_sweep(const ExperimentConfig& cfg);

/// Desk configs shipped with the repo.
ExperimentConfig desk_maze_config();
ExperimentConfig desk_nav_config();

/// Training loop with the legibility module removed: recognizers, learners and env wired
/// directly, raw rewards only. Returns each episode's joint-action sequence.
std::vector<std::vector<std::vector<std::size_t>>> run_maze_bypass(const ExperimentConfig& cfg,
                                                                   std::uint64_t seed);

}  // namespace maal
