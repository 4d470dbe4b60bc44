#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "maal/episode.hpp"

namespace maal {

/// Final-step argmax of the observer's belief equals the true goal; ties count as wrong.
bool prediction_correct(const EpisodeRecord& record, std::size_t link = 0);

/// Fraction of records whose final prediction is correct. Empty window is an error.
double pcr(std::span<const EpisodeRecord> window, std::size_t link = 0);
double pcr(std::span<const bool> correct_flags);

/// t*/T with t* the first step from which the prediction stays correct to the end; 1 if never.
double ptr(const EpisodeRecord& record, std::size_t link = 0);

struct MetricRow {
  std::size_t episode = 0;
  std::uint64_t seed = 0;
  double beta = 0.0;
  double return_raw = 0.0;
  double return_shaped = 0.0;
  bool success = false;
  double ptr = 1.0;
  bool prediction_correct = false;
  std::size_t steps = 0;
  double klg_sum = 0.0;  // not serialized; kept for the shaped/raw consistency check
};

MetricRow make_metric_row(const EpisodeRecord& record, std::size_t episode, std::uint64_t seed, double beta,
                          std::size_t link = 0);

/// Trailing-window means, one per input row.
struct RollingRow {
  std::size_t episode = 0;
  double return_raw = 0.0;
  double return_shaped = 0.0;
  double success = 0.0;
  double ptr = 0.0;
  double pcr = 0.0;
  double steps = 0.0;
};

std::vector<RollingRow> aggregate(std::span<const MetricRow> rows, std::size_t window = 1000);

inline constexpr const char* kMetricCsvHeader =
    "episode,seed,beta,return_raw,return_shaped,success,ptr,pred_correct,steps";

/// 9 significant digits, shortest form.
std::string format_real(double v);
void write_metric_header(std::ostream& out);
void write_metric_row(std::ostream& out, const MetricRow& row);
std::vector<MetricRow> read_metric_csv(std::istream& in);

}  // namespace maal
