// Command-line front end: synthesize pools, ingest IDX images, embed with
// linear encoders, run querying experiments, and condense logs into
// plot-ready CSV tables. Every command writes a replayable manifest next to
// its outputs. Exit codes: 0 success, 1 I/O or data error, 2 usage error.

#include <CLI11.hpp>

#include "alquery/csv.hpp"
#include "alquery/encoder.hpp"
#include "alquery/experiment_log.hpp"
#include "alquery/idx.hpp"
#include "alquery/manifest.hpp"
#include "alquery/report.hpp"
#include "alquery/rng.hpp"
#include "alquery/scoring.hpp"
#include "alquery/simulate.hpp"
#include "alquery/synth.hpp"
#include "alquery/version.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace alquery;

std::vector<SampleId> read_id_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open id file " + path.string());
  std::vector<SampleId> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    try {
      std::size_t used = 0;
      ids.push_back(std::stoll(line, &used));
      if (used != line.size()) throw std::invalid_argument(line);
    } catch (const std::exception&) {
      throw FormatError("id file " + path.string() + ": line " + std::to_string(line_no) +
                        " is not an integer");
    }
  }
  if (ids.empty()) throw FormatError("id file " + path.string() + " is empty");
  return ids;
}

std::vector<double> parse_prior_list(const std::string& text) {
  std::vector<double> priors;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      priors.push_back(std::stod(cell));
    } catch (const std::exception&) {
      throw ConfigError("priors: '" + cell + "' is not numeric");
    }
  }
  return priors;
}

// key=value overrides applied on top of built-in defaults
std::map<std::string, std::string> read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config: line '" + line + "' is not key=value");
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

struct RunOptions {
  std::string pool_path;
  std::string strategy;
  std::string init_file;
  int init_count = 0;
  std::string init_priors;
  int n_rep = 1;
  int n_unc = 0;
  int n_iters = 1;
  std::string mode = "sample";
  std::string bsq_mode = "one_shot";
  std::uint64_t seed = 0;
  std::string out;
  std::string config_file;
  std::string stacks_path;
  std::string eval_path;
};

void apply_run_config(RunConfig& config, const std::map<std::string, std::string>& kv) {
  for (const auto& [key, value] : kv) {
    try {
      if (key == "mmd_sigma") {
        config.mmd_sigma = std::stod(value);
      } else if (key == "mmd_kernel") {
        if (value != "gaussian" && value != "laplacian") throw ConfigError("config: unknown kernel " + value);
        config.mmd_squared_kernel = value == "gaussian";
      } else if (key == "group_reduce") {
        if (value == "mean") config.strategy.group_reduce = GroupReduce::mean;
        else if (value == "max") config.strategy.group_reduce = GroupReduce::max;
        else if (value == "sum") config.strategy.group_reduce = GroupReduce::sum;
        else throw ConfigError("config: unknown group_reduce " + value);
      } else if (key == "proxy_k") {
        config.proxy.k = std::stoll(value);
      } else if (key == "proxy_models") {
        config.proxy.n_models = std::stoll(value);
      } else {
        throw ConfigError("config: unknown key '" + key + "'");
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception&) {
      throw ConfigError("config: bad value for '" + key + "'");
    }
  }
}

int cmd_synth(int n_classes, int per_class, int dims, std::uint64_t seed, const std::string& out,
              const std::string& priors_text, const std::string& config_file) {
  SynthConfig config;
  config.n_classes = n_classes;
  config.per_class = per_class;
  config.dims = dims;
  config.seed = seed;
  if (!priors_text.empty()) config.class_priors = parse_prior_list(priors_text);
  if (!config_file.empty()) {
    for (const auto& [key, value] : read_config_file(config_file)) {
      if (key == "center_spread") config.center_spread = std::stod(value);
      else if (key == "blob_std") config.blob_std = std::stod(value);
      else throw ConfigError("config: unknown key '" + key + "'");
    }
  }
  const SamplePool pool = synth_clusters(config);
  write_matrix_csv(out, csv_from_pool(pool));

  RunManifest manifest;
  manifest.command = "synth";
  manifest.outputs = {out};
  manifest.seed = seed;
  manifest.config = {{"classes", std::to_string(n_classes)},
                     {"per_class", std::to_string(per_class)},
                     {"dims", std::to_string(dims)},
                     {"center_spread", std::to_string(config.center_spread)},
                     {"blob_std", std::to_string(config.blob_std)},
                     {"priors", priors_text.empty() ? "uniform" : priors_text}};
  write_manifest(out, manifest);
  return 0;
}

int cmd_ingest_idx(const std::string& images, const std::string& labels, const std::string& out,
                   long limit, bool standardize) {
  const RawTensor tensor = read_idx_file(images);
  Matrix values = tensor_to_matrix(tensor, standardize);
  std::optional<std::vector<int>> label_column;
  if (!labels.empty()) {
    const RawTensor label_tensor = read_idx_file(labels);
    if (label_tensor.dims.size() != 1 || label_tensor.dims[0] != tensor.dims[0]) {
      throw FormatError("ingest: label tensor must be one-dimensional with one entry per image");
    }
    label_column.emplace(label_tensor.data.begin(), label_tensor.data.end());
  }
  if (limit > 0 && limit < values.rows()) {
    values.conservativeResize(limit, Eigen::NoChange);
    if (label_column) label_column->resize(static_cast<std::size_t>(limit));
  }

  CsvMatrix csv;
  csv.values = std::move(values);
  csv.labels = std::move(label_column);
  csv.ids.resize(static_cast<std::size_t>(csv.values.rows()));
  for (Index i = 0; i < csv.values.rows(); ++i) csv.ids[static_cast<std::size_t>(i)] = i;
  write_matrix_csv(out, csv);

  RunManifest manifest;
  manifest.command = "ingest-idx";
  manifest.inputs = {images};
  if (!labels.empty()) manifest.inputs.push_back(labels);
  manifest.outputs = {out};
  manifest.config = {{"limit", std::to_string(limit)}, {"standardize", standardize ? "1" : "0"}};
  write_manifest(out, manifest);
  return 0;
}

int cmd_embed(const std::string& in, const std::string& method, int n_lat, std::uint64_t seed,
              const std::string& out) {
  const CsvMatrix input = read_matrix_csv(in);
  LinearEncoder encoder;
  if (method == "pca") {
    encoder = fit_pca(input.values, n_lat);
    if (encoder.zero_variance_warning) {
      std::cerr << "warning: requested components exceed the data rank; zero-variance directions padded\n";
    }
  } else if (method == "random") {
    encoder = fit_random_projection(input.values.cols(), n_lat, seed);
  } else {
    throw ConfigError("embed: unknown method '" + method + "'");
  }

  CsvMatrix output = input;
  output.values = encode(encoder, input.values);
  write_matrix_csv(out, output);

  RunManifest manifest;
  manifest.command = "embed";
  manifest.inputs = {in};
  manifest.outputs = {out};
  manifest.seed = seed;
  manifest.config = {{"method", method}, {"n_lat", std::to_string(n_lat)}};
  write_manifest(out, manifest);
  return 0;
}

int cmd_run(const RunOptions& opt) {
  const CsvMatrix csv = read_matrix_csv(opt.pool_path);
  const SamplePool pool = csv.to_pool();

  RunConfig config;
  config.strategy.kind = strategy_from_name(opt.strategy);
  config.strategy.n_rep = opt.n_rep;
  config.strategy.n_unc = opt.n_unc;
  config.strategy.seed = opt.seed;
  config.n_iters = opt.n_iters;
  if (opt.mode == "group") config.strategy.mode = QueryMode::group;
  else if (opt.mode != "sample") throw ConfigError("run: unknown mode '" + opt.mode + "'");
  if (opt.bsq_mode == "sequential_refit") config.strategy.bsq_mode = BsqMode::sequential_refit;
  else if (opt.bsq_mode != "one_shot") throw ConfigError("run: unknown bsq mode '" + opt.bsq_mode + "'");
  if (!opt.config_file.empty()) apply_run_config(config, read_config_file(opt.config_file));
  config.strategy.validate();

  std::vector<SampleId> initial;
  if (!opt.init_file.empty()) {
    initial = read_id_file(opt.init_file);
  } else if (opt.init_count > 0) {
    std::vector<double> priors;
    if (!opt.init_priors.empty()) priors = parse_prior_list(opt.init_priors);
    for (Index row : initial_draw(pool, opt.init_count, priors, rng::derive_seed(opt.seed, 0x1217))) {
      initial.push_back(pool.sample_ids[static_cast<std::size_t>(row)]);
    }
  } else {
    throw ConfigError("run: provide --init-file or --init-count");
  }

  if (!opt.stacks_path.empty()) {
    const auto stacks = read_prediction_stacks_csv(opt.stacks_path);
    Vector uncertainty(pool.size());
    for (Index i = 0; i < pool.size(); ++i) {
      const auto it = stacks.find(pool.sample_ids[static_cast<std::size_t>(i)]);
      if (it == stacks.end()) {
        throw ConfigError("run: no prediction stack for sample " +
                          std::to_string(pool.sample_ids[static_cast<std::size_t>(i)]));
      }
      uncertainty(i) = multiclass_uncertainty(it->second);
    }
    config.external_uncertainty = std::move(uncertainty);
  }

  if (!opt.eval_path.empty()) {
    const CsvMatrix eval_csv = read_matrix_csv(opt.eval_path);
    if (!eval_csv.labels) throw ConfigError("run: evaluation file needs a label column");
    config.eval = EvalSet{eval_csv.values, *eval_csv.labels};
  }

  const ExperimentLog log = run_experiment(pool, initial, config);
  write_log(opt.out, log);
  if (log.exhausted) std::cerr << "note: pool exhausted before the requested iteration count\n";

  RunManifest manifest;
  manifest.command = "run";
  manifest.inputs = {opt.pool_path};
  if (!opt.init_file.empty()) manifest.inputs.push_back(opt.init_file);
  if (!opt.stacks_path.empty()) manifest.inputs.push_back(opt.stacks_path);
  if (!opt.eval_path.empty()) manifest.inputs.push_back(opt.eval_path);
  if (!opt.config_file.empty()) manifest.inputs.push_back(opt.config_file);
  manifest.outputs = {opt.out};
  manifest.seed = opt.seed;
  manifest.config = {{"strategy", opt.strategy},
                     {"n_rep", std::to_string(opt.n_rep)},
                     {"n_unc", std::to_string(opt.n_unc)},
                     {"iters", std::to_string(opt.n_iters)},
                     {"mode", opt.mode},
                     {"bsq_mode", opt.bsq_mode},
                     {"init_count", std::to_string(opt.init_count)},
                     {"init_priors", opt.init_priors.empty() ? "uniform" : opt.init_priors},
                     {"mmd_sigma", std::to_string(config.mmd_sigma)},
                     {"mmd_kernel", config.mmd_squared_kernel ? "gaussian" : "laplacian"},
                     {"proxy_k", std::to_string(config.proxy.k)},
                     {"proxy_models", std::to_string(config.proxy.n_models)}};
  write_manifest(opt.out, manifest);
  return 0;
}

int cmd_report(const std::vector<std::string>& log_paths, const std::string& out_dir,
               const std::string& metric) {
  std::vector<ExperimentLog> logs;
  logs.reserve(log_paths.size());
  for (const std::string& path : log_paths) logs.push_back(read_log(path));

  std::filesystem::create_directories(out_dir);
  const std::filesystem::path series_path = std::filesystem::path(out_dir) / "series.csv";
  std::vector<SeriesRow> rows;
  for (const ExperimentLog& log : logs) {
    const std::vector<SeriesRow> r = log_series(log);
    rows.insert(rows.end(), r.begin(), r.end());
  }
  write_series_csv(series_path, rows);

  std::map<std::string, std::vector<ExperimentLog>> by_strategy;
  for (ExperimentLog& log : logs) by_strategy[strategy_name(log.config.strategy.kind)].push_back(std::move(log));

  std::vector<std::string> outputs{series_path.string()};
  std::vector<std::string> names;
  for (const auto& [name, group] : by_strategy) names.push_back(name);
  for (std::size_t a = 0; a < names.size(); ++a) {
    for (std::size_t b = a + 1; b < names.size(); ++b) {
      bool truncated = false;
      const std::vector<DifferenceRow> table =
          difference_table(by_strategy[names[a]], by_strategy[names[b]], metric, &truncated);
      if (truncated) {
        std::cerr << "warning: logs for " << names[a] << " vs " << names[b]
                  << " have unequal lengths; truncated to the common range\n";
      }
      const std::filesystem::path diff_path =
          std::filesystem::path(out_dir) / ("diff_" + names[a] + "_vs_" + names[b] + ".csv");
      write_difference_csv(diff_path, table);
      outputs.push_back(diff_path.string());
    }
  }

  RunManifest manifest;
  manifest.command = "report";
  manifest.inputs = log_paths;
  manifest.outputs = outputs;
  manifest.config = {{"metric", metric}};
  write_manifest(series_path, manifest);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"batch-mode active-learning query engine"};
  app.set_version_flag("--version", alquery::kVersion);
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "generate a labeled Gaussian-blob pool CSV");
  int classes = 10, per_class = 500, dims = 5;
  std::uint64_t synth_seed = 0;
  std::string synth_out, synth_priors, synth_config;
  synth->add_option("--classes", classes, "number of classes");
  synth->add_option("--per-class", per_class, "samples per class");
  synth->add_option("--dims", dims, "latent dimensionality");
  synth->add_option("--seed", synth_seed, "random seed");
  synth->add_option("--priors", synth_priors, "comma-separated class priors for initial draws");
  synth->add_option("--config", synth_config, "key=value overrides (center_spread, blob_std)");
  synth->add_option("--out", synth_out, "output CSV path")->required();

  // ingest-idx
  auto* ingest = app.add_subcommand("ingest-idx", "convert IDX images to a matrix CSV");
  std::string ingest_images, ingest_labels, ingest_out;
  long ingest_limit = 0;
  bool ingest_standardize = false;
  ingest->add_option("--images", ingest_images, "IDX image file")->required();
  ingest->add_option("--labels", ingest_labels, "IDX label file");
  ingest->add_option("--limit", ingest_limit, "keep only the first N samples");
  ingest->add_flag("--standardize", ingest_standardize, "per-image standardization");
  ingest->add_option("--out", ingest_out, "output CSV path")->required();

  // embed
  auto* embed = app.add_subcommand("embed", "project a matrix CSV onto a latent space");
  std::string embed_in, embed_method = "pca", embed_out;
  int embed_n_lat = 2;
  std::uint64_t embed_seed = 0;
  embed->add_option("--in", embed_in, "input matrix CSV")->required();
  embed->add_option("--method", embed_method, "pca | random");
  embed->add_option("--n-lat", embed_n_lat, "latent dimensionality");
  embed->add_option("--seed", embed_seed, "seed for the random projection");
  embed->add_option("--out", embed_out, "output CSV path")->required();

  // run
  auto* run = app.add_subcommand("run", "run an active-learning querying experiment");
  RunOptions opt;
  run->add_option("--pool", opt.pool_path, "pool CSV (embeddings with optional label/group)")->required();
  run->add_option("--strategy", opt.strategy, "random | uncertainty | setcover | bsq | upperbound")->required();
  run->add_option("--init-file", opt.init_file, "file with one initial annotated sample id per line");
  run->add_option("--init-count", opt.init_count, "draw this many initial samples instead");
  run->add_option("--init-priors", opt.init_priors, "comma-separated class priors for the initial draw");
  run->add_option("--batch", opt.n_rep, "samples (or groups) queried per iteration");
  run->add_option("--n-unc", opt.n_unc, "uncertainty pre-filter size (0 = all)");
  run->add_option("--iters", opt.n_iters, "number of query iterations");
  run->add_option("--mode", opt.mode, "sample | group");
  run->add_option("--bsq-mode", opt.bsq_mode, "one_shot | sequential_refit");
  run->add_option("--stacks", opt.stacks_path, "prediction-stack CSV for external uncertainty");
  run->add_option("--eval", opt.eval_path, "labeled CSV scored by the proxy learner each iteration");
  run->add_option("--seed", opt.seed, "random seed");
  run->add_option("--config", opt.config_file, "key=value overrides");
  run->add_option("--out", opt.out, "output JSON log path")->required();

  // report
  auto* report = app.add_subcommand("report", "condense experiment logs into CSV tables");
  std::vector<std::string> report_logs;
  std::string report_out_dir, report_metric = "entropy";
  report->add_option("logs", report_logs, "experiment log JSON files")->required();
  report->add_option("--out-dir", report_out_dir, "output directory")->required();
  report->add_option("--metric", report_metric, "metric for pairwise difference tables");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }

  try {
    if (synth->parsed()) return cmd_synth(classes, per_class, dims, synth_seed, synth_out, synth_priors, synth_config);
    if (ingest->parsed()) return cmd_ingest_idx(ingest_images, ingest_labels, ingest_out, ingest_limit, ingest_standardize);
    if (embed->parsed()) return cmd_embed(embed_in, embed_method, embed_n_lat, embed_seed, embed_out);
    if (run->parsed()) return cmd_run(opt);
    if (report->parsed()) return cmd_report(report_logs, report_out_dir, report_metric);
  } catch (const alquery::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const alquery::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
