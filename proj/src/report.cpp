#include "alquery/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>

namespace alquery {

namespace {

void append_double(std::string& out, double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, static_cast<std::size_t>(ptr - buf));
  (void)ec;
}

double metric_value(const IterationRecord& rec, const std::string& metric) {
  if (metric == "entropy" && rec.entropy) return *rec.entropy;
  if (metric == "mmd") return rec.mmd_value;
  if (metric == "n_annotated") return static_cast<double>(rec.n_annotated);
  if (metric == "dice" && rec.dice) return *rec.dice;
  if (metric == "msd" && rec.msd) return *rec.msd;
  throw ConfigError("report: metric '" + metric + "' not present in log");
}

}  // namespace

std::vector<SeriesRow> log_series(const ExperimentLog& log) {
  std::vector<SeriesRow> rows;
  const std::string strategy = strategy_name(log.config.strategy.kind);
  const std::uint64_t seed = log.config.strategy.seed;
  for (const IterationRecord& rec : log.iterations) {
    const auto add = [&](const char* metric, double value) {
      rows.push_back({strategy, rec.iter, metric, value, seed});
    };
    add("n_annotated", static_cast<double>(rec.n_annotated));
    add("mmd", rec.mmd_value);
    if (rec.entropy) add("entropy", *rec.entropy);
    if (rec.dice) add("dice", *rec.dice);
    if (rec.msd) add("msd", *rec.msd);
  }
  return rows;
}

void write_series_csv(const std::filesystem::path& path, std::span<const SeriesRow> rows) {
  std::string out = "strategy,iteration,metric,value,seed\n";
  for (const SeriesRow& row : rows) {
    out += row.strategy + ',' + std::to_string(row.iteration) + ',' + row.metric + ',';
    append_double(out, row.value);
    out += ',' + std::to_string(row.seed) + '\n';
  }
  std::ofstream file(path, std::ios::trunc);
  if (!file) throw IoError("report: cannot write " + path.string());
  file << out;
  if (!file) throw IoError("report: write failed for " + path.string());
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw ConfigError("quantile: empty sample");
  if (p < 0.0 || p > 1.0) throw ConfigError("quantile: p must be in [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = p * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = static_cast<std::size_t>(std::ceil(pos));
  const double frac = pos - std::floor(pos);
  return values[lo] + frac * (values[hi] - values[lo]);
}

std::vector<DifferenceRow> difference_table(std::span<const ExperimentLog> logs_a,
                                            std::span<const ExperimentLog> logs_b,
                                            const std::string& metric, bool* truncated) {
  if (logs_a.empty() || logs_b.empty()) throw ConfigError("report: need at least one log per side");

  std::map<std::uint64_t, const ExperimentLog*> by_seed_b;
  for (const ExperimentLog& log : logs_b) by_seed_b[log.config.strategy.seed] = &log;

  std::size_t common = std::numeric_limits<std::size_t>::max();
  std::size_t longest = 0;
  std::vector<std::pair<const ExperimentLog*, const ExperimentLog*>> pairs;
  for (const ExperimentLog& a : logs_a) {
    const auto it = by_seed_b.find(a.config.strategy.seed);
    if (it == by_seed_b.end()) continue;
    pairs.emplace_back(&a, it->second);
    common = std::min({common, a.iterations.size(), it->second->iterations.size()});
    longest = std::max({longest, a.iterations.size(), it->second->iterations.size()});
  }
  if (pairs.empty()) throw ConfigError("report: no seed-matched log pairs");
  if (truncated) *truncated = longest > common;

  std::vector<DifferenceRow> table;
  table.reserve(common);
  for (std::size_t t = 0; t < common; ++t) {
    std::vector<double> diffs;
    diffs.reserve(pairs.size());
    for (const auto& [a, b] : pairs) {
      diffs.push_back(metric_value(a->iterations[t], metric) - metric_value(b->iterations[t], metric));
    }
    DifferenceRow row;
    row.iteration = static_cast<int>(t);
    row.median = quantile(diffs, 0.5);
    row.q1 = quantile(diffs, 0.25);
    row.q3 = quantile(diffs, 0.75);
    double sum = 0.0;
    for (double d : diffs) sum += d;
    row.mean = sum / static_cast<double>(diffs.size());
    row.n = static_cast<int>(diffs.size());
    table.push_back(row);
  }
  return table;
}

void write_difference_csv(const std::filesystem::path& path, std::span<const DifferenceRow> rows) {
  std::string out = "iteration,median,q1,q3,mean,n\n";
  for (const DifferenceRow& row : rows) {
    out += std::to_string(row.iteration) + ',';
    append_double(out, row.median);
    out += ',';
    append_double(out, row.q1);
    out += ',';
    append_double(out, row.q3);
    out += ',';
    append_double(out, row.mean);
    out += ',' + std::to_string(row.n) + '\n';
  }
  std::ofstream file(path, std::ios::trunc);
  if (!file) throw IoError("report: cannot write " + path.string());
  file << out;
  if (!file) throw IoError("report: write failed for " + path.string());
}

}  // namespace alquery
