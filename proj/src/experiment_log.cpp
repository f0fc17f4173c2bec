#include "alquery/experiment_log.hpp"

#include "alquery/version.hpp"

#include <fstream>

namespace alquery {

namespace {

using nlohmann::json;

json vector_to_json(const Vector& v) {
  json arr = json::array();
  for (Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

Vector vector_from_json(const json& arr) {
  Vector v(static_cast<Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) v(static_cast<Index>(i)) = arr[i].get<double>();
  return v;
}

std::string mode_name(QueryMode mode) { return mode == QueryMode::group ? "group" : "sample"; }
std::string bsq_mode_name(BsqMode mode) {
  return mode == BsqMode::sequential_refit ? "sequential_refit" : "one_shot";
}
std::string reduce_name(GroupReduce reduce) {
  switch (reduce) {
    case GroupReduce::mean: return "mean";
    case GroupReduce::max: return "max";
    case GroupReduce::sum: return "sum";
  }
  return "mean";
}

}  // namespace

json log_to_json(const ExperimentLog& log) {
  json j;
  j["schema"] = kLogSchema;
  j["version"] = kVersion;
  j["exhausted"] = log.exhausted;

  json config;
  config["strategy"] = strategy_name(log.config.strategy.kind);
  config["n_unc"] = log.config.strategy.n_unc;
  config["n_rep"] = log.config.strategy.n_rep;
  config["mode"] = mode_name(log.config.strategy.mode);
  config["bsq_mode"] = bsq_mode_name(log.config.strategy.bsq_mode);
  config["group_reduce"] = reduce_name(log.config.strategy.group_reduce);
  config["seed"] = log.config.strategy.seed;
  config["n_iters"] = log.config.n_iters;
  config["mmd_sigma"] = log.config.mmd_sigma;
  config["mmd_kernel"] = log.config.mmd_squared_kernel ? "gaussian" : "laplacian";
  config["proxy_k"] = log.config.proxy.k;
  config["proxy_models"] = log.config.proxy.n_models;
  config["n_pool"] = log.n_pool;
  config["n_lat"] = log.n_lat;
  config["initial_ids"] = log.initial_ids;
  j["config"] = std::move(config);

  json iterations = json::array();
  for (const IterationRecord& rec : log.iterations) {
    json r;
    r["iter"] = rec.iter;
    r["queried_ids"] = rec.queried_ids;
    r["n_annotated"] = rec.n_annotated;
    r["entropy"] = rec.entropy ? json(*rec.entropy) : json(nullptr);
    r["g_an_mean"] = rec.g_an_mean ? vector_to_json(*rec.g_an_mean) : json(nullptr);
    r["g_an_std"] = rec.g_an_std ? vector_to_json(*rec.g_an_std) : json(nullptr);
    r["mmd"] = rec.mmd_value;
    if (rec.dice) r["dice"] = *rec.dice;
    if (rec.msd) r["msd"] = *rec.msd;
    iterations.push_back(std::move(r));
  }
  j["iterations"] = std::move(iterations);
  return j;
}

ExperimentLog log_from_json(const json& j) {
  if (!j.contains("schema") || j["schema"].get<std::string>() != kLogSchema) {
    throw FormatError("log: schema version mismatch");
  }
  ExperimentLog log;
  const json& config = j.at("config");
  log.config.strategy.kind = strategy_from_name(config.at("strategy").get<std::string>());
  log.config.strategy.n_unc = config.at("n_unc").get<Index>();
  log.config.strategy.n_rep = config.at("n_rep").get<Index>();
  log.config.strategy.mode = config.at("mode").get<std::string>() == "group" ? QueryMode::group : QueryMode::sample;
  log.config.strategy.bsq_mode = config.at("bsq_mode").get<std::string>() == "sequential_refit"
                                     ? BsqMode::sequential_refit
                                     : BsqMode::one_shot;
  const std::string reduce = config.at("group_reduce").get<std::string>();
  log.config.strategy.group_reduce = reduce == "max"   ? GroupReduce::max
                                     : reduce == "sum" ? GroupReduce::sum
                                                       : GroupReduce::mean;
  log.config.strategy.seed = config.at("seed").get<std::uint64_t>();
  log.config.n_iters = config.at("n_iters").get<int>();
  log.config.mmd_sigma = config.at("mmd_sigma").get<double>();
  log.config.mmd_squared_kernel = config.at("mmd_kernel").get<std::string>() == "gaussian";
  log.config.proxy.k = config.at("proxy_k").get<Index>();
  log.config.proxy.n_models = config.at("proxy_models").get<Index>();
  log.n_pool = config.at("n_pool").get<Index>();
  log.n_lat = config.at("n_lat").get<Index>();
  log.initial_ids = config.at("initial_ids").get<std::vector<SampleId>>();
  log.exhausted = j.at("exhausted").get<bool>();

  for (const json& r : j.at("iterations")) {
    IterationRecord rec;
    rec.iter = r.at("iter").get<int>();
    rec.queried_ids = r.at("queried_ids").get<std::vector<SampleId>>();
    rec.n_annotated = r.at("n_annotated").get<Index>();
    if (!r.at("entropy").is_null()) rec.entropy = r.at("entropy").get<double>();
    if (!r.at("g_an_mean").is_null()) rec.g_an_mean = vector_from_json(r.at("g_an_mean"));
    if (!r.at("g_an_std").is_null()) rec.g_an_std = vector_from_json(r.at("g_an_std"));
    rec.mmd_value = r.at("mmd").get<double>();
    if (r.contains("dice") && !r.at("dice").is_null()) rec.dice = r.at("dice").get<double>();
    if (r.contains("msd") && !r.at("msd").is_null()) rec.msd = r.at("msd").get<double>();
    log.iterations.push_back(std::move(rec));
  }
  return log;
}

std::string serialize_log(const ExperimentLog& log) { return log_to_json(log).dump(2) + "\n"; }

void write_log(const std::filesystem::path& path, const ExperimentLog& log) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("log: cannot write " + path.string());
  out << serialize_log(log);
  if (!out) throw IoError("log: write failed for " + path.string());
}

ExperimentLog read_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("log: cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw FormatError("log: invalid JSON in " + path.string() + ": " + e.what());
  }
  return log_from_json(j);
}

}  // namespace alquery
