#pragma once

#include "alquery/experiment_log.hpp"
#include "alquery/types.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace alquery {

// Long-format series row for plotting: one (strategy, iteration, metric)
// value per line.
struct SeriesRow {
  std::string strategy;
  int iteration = 0;
  std::string metric;
  double value = 0.0;
  std::uint64_t seed = 0;
};

std::vector<SeriesRow> log_series(const ExperimentLog& log);
void write_series_csv(const std::filesystem::path& path, std::span<const SeriesRow> rows);

// Linear-interpolation quantile of a sample (p in [0, 1]).
double quantile(std::vector<double> values, double p);

struct DifferenceRow {
  int iteration = 0;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double mean = 0.0;
  int n = 0;
};

// Per-iteration quartile summary of metric differences (a - b) between two
// groups of logs matched by seed. Logs of unequal length truncate to the
// common range (`truncated` reports whether that happened).
std::vector<DifferenceRow> difference_table(std::span<const ExperimentLog> logs_a,
                                            std::span<const ExperimentLog> logs_b,
                                            const std::string& metric, bool* truncated = nullptr);

void write_difference_csv(const std::filesystem::path& path, std::span<const DifferenceRow> rows);

}  // namespace alquery
