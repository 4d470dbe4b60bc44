#include "maal/metrics.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "maal/errors.hpp"

namespace maal {

namespace {

bool correct_at(const EpisodeRecord& r, std::size_t t, std::size_t link) {
  const auto& b = r.beliefs[t].at(link);
  return b.has_unique_max() && b.argmax() == r.true_goal;
}

}  // namespace

bool prediction_correct(const EpisodeRecord& record, std::size_t link) {
  if (record.beliefs.empty()) return false;
  return correct_at(record, record.beliefs.size() - 1, link);
}

double pcr(std::span<const EpisodeRecord> window, std::size_t link) {
  if (window.empty()) throw ConfigError("PCR over an empty window");
  std::size_t hits = 0;
  for (const auto& r : window) hits += prediction_correct(r, link) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(window.size());
}

double pcr(std::span<const bool> flags) {
  if (flags.empty()) throw ConfigError("PCR over an empty window");
  std::size_t hits = 0;
  for (bool f : flags) hits += f ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(flags.size());
}

double ptr(const EpisodeRecord& record, std::size_t link) {
  const std::size_t steps = record.beliefs.size();
  if (steps == 0) return 1.0;
  std::size_t first = steps;
  for (std::size_t t = steps; t-- > 0;) {
    if (!correct_at(record, t, link)) break;
    first = t;
  }
  if (first == steps) return 1.0;
  return static_cast<double>(first) / static_cast<double>(steps);
}

MetricRow make_metric_row(const EpisodeRecord& record, std::size_t episode, std::uint64_t seed, double beta,
                          std::size_t link) {
  MetricRow row;
  row.episode = episode;
  row.seed = seed;
  row.beta = beta;
  row.return_raw = record.return_raw;
  row.return_shaped = record.return_shaped;
  row.success = record.success;
  row.ptr = ptr(record, link);
  row.prediction_correct = prediction_correct(record, link);
  row.steps = record.steps;
  row.klg_sum = record.klg_sum;
  return row;
}

std::vector<RollingRow> aggregate(std::span<const MetricRow> rows, std::size_t window) {
  if (window == 0) throw ConfigError("rolling window must be at least 1");
  std::vector<RollingRow> out;
  out.reserve(rows.size());
  RollingRow sum;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto add = [&](const MetricRow& r, double s) {
      sum.return_raw += s * r.return_raw;
      sum.return_shaped += s * r.return_shaped;
      sum.success += s * (r.success ? 1.0 : 0.0);
      sum.ptr += s * r.ptr;
      sum.pcr += s * (r.prediction_correct ? 1.0 : 0.0);
      sum.steps += s * static_cast<double>(r.steps);
    };
    add(rows[i], 1.0);
    if (i >= window) add(rows[i - window], -1.0);
    const double n = static_cast<double>(std::min(window, i + 1));
    // Recompute exactly at window boundaries so long streams do not accumulate drift.
    RollingRow r;
    if ((i + 1) % window == 0) {
      RollingRow exact;
      for (std::size_t j = i + 1 - window; j <= i; ++j) {
        exact.return_raw += rows[j].return_raw;
        exact.return_shaped += rows[j].return_shaped;
        exact.success += rows[j].success ? 1.0 : 0.0;
        exact.ptr += rows[j].ptr;
        exact.pcr += rows[j].prediction_correct ? 1.0 : 0.0;
        exact.steps += static_cast<double>(rows[j].steps);
      }
      sum = exact;
    }
    r.episode = rows[i].episode;
    r.return_raw = sum.return_raw / n;
    r.return_shaped = sum.return_shaped / n;
    r.success = sum.success / n;
    r.ptr = sum.ptr / n;
    r.pcr = sum.pcr / n;
    r.steps = sum.steps / n;
    out.push_back(r);
  }
  return out;
}

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v == 0.0 ? 0.0 : v);
  return buf;
}

void write_metric_header(std::ostream& out) { out << kMetricCsvHeader << '\n'; }

void write_metric_row(std::ostream& out, const MetricRow& r) {
  out << r.episode << ',' << r.seed << ',' << format_real(r.beta) << ',' << format_real(r.return_raw) << ','
      << format_real(r.return_shaped) << ',' << (r.success ? 1 : 0) << ',' << format_real(r.ptr) << ','
      << (r.prediction_correct ? 1 : 0) << ',' << r.steps << '\n';
}

std::vector<MetricRow> read_metric_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kMetricCsvHeader) throw ConfigError("metrics CSV: bad header");
  std::vector<MetricRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 9) throw ConfigError("metrics CSV: expected 9 fields");
    MetricRow r;
    r.episode = std::stoull(f[0]);
    r.seed = std::stoull(f[1]);
    r.beta = std::stod(f[2]);
    r.return_raw = std::stod(f[3]);
    r.return_shaped = std::stod(f[4]);
    r.success = f[5] == "1";
    r.ptr = std::stod(f[6]);
    r.prediction_correct = f[7] == "1";
    r.steps = std::stoull(f[8]);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace maal
