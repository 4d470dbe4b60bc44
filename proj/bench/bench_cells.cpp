// Wall time of the same sweep run cell-by-cell and across OpenMP threads.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>

#include "maal/harness.hpp"

int main(int argc, char** argv) {
  maal::ExperimentConfig cfg = maal::load_config(std::string(MAAL_CONFIG_DIR) + "/lfm_desk.json");
  cfg.episodes = 3000;
  if (argc > 1) {
    char* end = nullptr;
    cfg.episodes = std::strtoull(argv[1], &end, 10);
    if (*end != '\0' || cfg.episodes == 0) {
      std::fprintf(stderr, "usage: %s [episodes]\n", argv[0]);
      return 2;
    }
  }
  const auto root = std::filesystem::temp_directory_path() / "maal_bench";
  std::filesystem::remove_all(root);

  using Clock = std::chrono::steady_clock;
  auto t0 = Clock::now();
  maal::run_cells_serial(cfg, root / "serial");
  const double serial = std::chrono::duration<double>(Clock::now() - t0).count();
  t0 = Clock::now();
  maal::run_cells_parallel(cfg, root / "parallel");
  const double parallel = std::chrono::duration<double>(Clock::now() - t0).count();

  std::printf("cells=%zu episodes=%zu threads=%d\n", maal::cells_of(cfg).size(), cfg.episodes, maal::thread_cap());
  std::printf("serial   %.2f s\nparallel %.2f s\nspeedup  %.2fx\n", serial, parallel, serial / parallel);
  std::filesystem::remove_all(root);
}
