#pragma once

#include "alquery/bsq.hpp"
#include "alquery/pool.hpp"
#include "alquery/scoring.hpp"
#include "alquery/types.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace alquery {

enum class StrategyKind { random, uncertainty, setcover, bsq, upperbound };
enum class QueryMode { sample, group };
enum class BsqMode { one_shot, sequential_refit };
enum class GroupReduce { mean, max, sum };

StrategyKind strategy_from_name(const std::string& name);
std::string strategy_name(StrategyKind kind);

struct StrategyConfig {
  StrategyKind kind = StrategyKind::random;
  Index n_unc = 0;  // uncertainty pre-filter size; 0 = keep all non-annotated
  Index n_rep = 1;  // samples (or groups) queried per iteration
  QueryMode mode = QueryMode::sample;
  BsqMode bsq_mode = BsqMode::one_shot;
  GroupReduce group_reduce = GroupReduce::mean;
  std::uint64_t seed = 0;

  void validate() const;
};

// One round of queries: pool row indices in selection order plus a
// per-selection score diagnostic (NaN where a strategy is score-free).
struct QueryBatch {
  int iteration = 0;
  std::vector<Index> selected;
  std::vector<double> scores;
};

// Bootstrap k-NN committee standing in for a trained segmentation model:
// each of n_models bootstrap resamples of the reference set votes a one-hot
// class prediction per query (k nearest by Euclidean distance, distance ties
// to the earlier draw, vote ties to the lower class id). Committee
// disagreement plays the role of stochastic-inference variance.
struct ProxyLearner {
  Matrix ref_embeddings;
  std::vector<int> ref_labels;
  Index n_classes = 0;
  Index k = 1;
  Index n_models = 2;
  std::uint64_t seed = 0;
};

ProxyLearner proxy_fit(Matrix ref_embeddings, std::vector<int> ref_labels, Index k, Index n_models,
                       std::uint64_t seed, Index n_classes = 0);

// One stack per query row, each n_models x 1 x n_classes.
std::vector<PredictionStack> proxy_predict(const ProxyLearner& learner, const Matrix& queries);

// Committee-mean argmax per query, ties to the lower class id.
std::vector<int> proxy_predict_labels(const ProxyLearner& learner, const Matrix& queries);

// Mean per-label variance of the committee votes, one value per query row.
Vector proxy_uncertainty(const ProxyLearner& learner, const Matrix& queries);

// Reduces per-sample scores to per-group scores; result ordered by ascending
// group id.
std::vector<std::pair<int, double>> group_aggregate(std::span<const double> per_sample_scores,
                                                    std::span<const int> groups, GroupReduce reduce);

// What a strategy may consume at one iteration. `uncertainty` holds one score
// per pool row (entries of annotated rows are ignored); `descriptors`
// defaults to the pool embeddings; `g_pool` is the cached whole-pool fit.
struct StepInputs {
  const Vector* uncertainty = nullptr;
  const Matrix* descriptors = nullptr;
  const DiagGaussian* g_pool = nullptr;
};

QueryBatch strategy_step(const StrategyConfig& strategy, const SamplePool& pool,
                         const AnnotationState& state, const StepInputs& inputs);

struct ProxyConfig {
  Index k = 1;
  Index n_models = 17;
};

struct EvalSet {
  Matrix embeddings;
  std::vector<int> labels;
};

struct RunConfig {
  StrategyConfig strategy;
  int n_iters = 1;
  double mmd_sigma = 1.0;
  bool mmd_squared_kernel = true;
  ProxyConfig proxy;
  std::optional<EvalSet> eval;                 // enables per-iteration proxy Dice
  std::optional<Vector> external_uncertainty;  // e.g. from ingested prediction stacks
};

struct IterationRecord {
  int iter = 0;
  std::vector<SampleId> queried_ids;
  Index n_annotated = 0;
  std::optional<double> entropy;
  std::optional<Vector> g_an_mean;
  std::optional<Vector> g_an_std;
  double mmd_value = 0.0;
  std::optional<double> dice;
  std::optional<double> msd;
};

struct ExperimentLog {
  RunConfig config;
  Index n_pool = 0;
  Index n_lat = 0;
  std::vector<SampleId> initial_ids;
  std::vector<IterationRecord> iterations;
  bool exhausted = false;
};

// Runs the querying loop: record 0 snapshots the initial annotated set, then
// each iteration queries one batch, annotates it with the pool's stored
// labels, and snapshots entropy / fitted-Gaussian / MMD diagnostics. Stops
// early with the exhausted flag when nothing is left to query.
ExperimentLog run_experiment(const SamplePool& pool, std::span<const SampleId> initial_annotated_ids,
                             const RunConfig& config);

// Seeded class-prior-weighted draw of an initial annotated set, by pool row.
std::vector<Index> initial_draw(const SamplePool& pool, Index n_init,
                                std::span<const double> class_priors, std::uint64_t seed);

}  // namespace alquery
