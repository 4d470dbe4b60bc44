#include <atomic>
#include <csignal>
#include <iostream>

#include <CLI11.hpp>

#include "maal/errors.hpp"
#include "maal/harness.hpp"
#include "maal/verify.hpp"

namespace {

std::atomic<bool> g_stop{false};

extern "C" void on_interrupt(int) { g_stop.store(true); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiagent active legibility workbench"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "train every (beta, seed) cell of a config");
  std::string config_path;
  std::vector<double> betas;
  std::vector<std::uint64_t> seeds;
  std::string out_dir;
  std::size_t episodes = 0;
  bool serial = false;
  run->add_option("--config", config_path, "JSON experiment config")->required()->check(CLI::ExistingFile);
  run->add_option("--beta", betas, "override the beta list");
  run->add_option("--seed", seeds, "override the seed list");
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--episodes", episodes, "override the episode count");
  run->add_flag("--serial", serial, "run cells one after another on this thread");

  auto* plot = app.add_subcommand("plot", "draw SVG summaries of a run directory");
  std::string plot_dir;
  std::size_t window = 1000;
  plot->add_option("dir", plot_dir)->required();
  plot->add_option("--window", window, "rolling window in episodes");

  auto* verify = app.add_subcommand("verify", "run an acceptance suite");
  std::string suite;
  verify->add_option("suite", suite)->required()->check(CLI::IsMember({"unit", "properties", "desk"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      maal::ExperimentConfig cfg = maal::load_config(config_path);
      if (!betas.empty()) cfg.betas = betas;
      if (!seeds.empty()) cfg.seeds = seeds;
      if (!out_dir.empty()) cfg.out = out_dir;
      if (episodes > 0) cfg.episodes = episodes;
      cfg.validate();
      std::signal(SIGINT, on_interrupt);
      const bool complete = serial ? maal::run_cells_serial(cfg, cfg.out, &g_stop)
                                   : maal::run_cells_parallel(cfg, cfg.out, &g_stop);
      if (!complete) {
        std::cerr << "interrupted; partial metrics flushed and marked incomplete\n";
        return 130;
      }
      std::cout << "wrote " << maal::cells_of(cfg).size() << " cells under " << cfg.out << '\n';
      return 0;
    }
    if (*plot) {
      for (const auto& p : maal::plot_run(plot_dir, window)) std::cout << p.string() << '\n';
      return 0;
    }
    if (*verify) {
      const auto report = maal::run_suite(suite, std::cout);
      return report.all_passed() ? 0 : 1;
    }
  } catch (const maal::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
