#include "alquery/simulate.hpp"

#include "alquery/metrics.hpp"
#include "alquery/parallel.hpp"
#include "alquery/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace alquery {

StrategyKind strategy_from_name(const std::string& name) {
  if (name == "random") return StrategyKind::random;
  if (name == "uncertainty") return StrategyKind::uncertainty;
  if (name == "setcover") return StrategyKind::setcover;
  if (name == "bsq") return StrategyKind::bsq;
  if (name == "upperbound") return StrategyKind::upperbound;
  throw ConfigError("unknown strategy '" + name + "'");
}

std::string strategy_name(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::random: return "random";
    case StrategyKind::uncertainty: return "uncertainty";
    case StrategyKind::setcover: return "setcover";
    case StrategyKind::bsq: return "bsq";
    case StrategyKind::upperbound: return "upperbound";
  }
  throw ConfigError("unknown strategy kind");
}

void StrategyConfig::validate() const {
  if (n_rep < 1) throw ConfigError("strategy: n_rep must be >= 1");
  if (n_unc < 0) throw ConfigError("strategy: n_unc must be >= 0");
  if (n_unc > 0 && n_rep > n_unc) throw ConfigError("strategy: n_rep must not exceed n_unc");
}

ProxyLearner proxy_fit(Matrix ref_embeddings, std::vector<int> ref_labels, Index k, Index n_models,
                       std::uint64_t seed, Index n_classes) {
  if (ref_embeddings.rows() == 0) throw ConfigError("proxy: empty reference set");
  if (static_cast<Index>(ref_labels.size()) != ref_embeddings.rows()) {
    throw ShapeError("proxy: label count does not match reference size");
  }
  if (k < 1 || k > ref_embeddings.rows()) throw ConfigError("proxy: need 1 <= k <= reference size");
  if (n_models < 1) throw ConfigError("proxy: need at least one model");
  Index max_label = 0;
  for (int l : ref_labels) {
    if (l < 0) throw DataError("proxy: labels must be non-negative");
    max_label = std::max<Index>(max_label, l);
  }
  if (n_classes == 0) n_classes = max_label + 1;
  if (n_classes <= max_label) throw ConfigError("proxy: n_classes too small for labels");

  ProxyLearner learner;
  learner.ref_embeddings = std::move(ref_embeddings);
  learner.ref_labels = std::move(ref_labels);
  learner.n_classes = n_classes;
  learner.k = k;
  learner.n_models = n_models;
  learner.seed = seed;
  return learner;
}

namespace {

// Majority label among the k resample entries nearest to one query.
// Distance ties go to the earlier draw, vote ties to the lower class id.
int committee_vote(const Vector& dist, std::span<const Index> draws, Index k,
                   const std::vector<int>& labels, Index n_classes) {
  const Index n = static_cast<Index>(draws.size());
  k = std::min(k, n);
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::nth_element(order.begin(), order.begin() + (k - 1), order.end(), [&](Index a, Index b) {
    const double da = dist(draws[static_cast<std::size_t>(a)]);
    const double db = dist(draws[static_cast<std::size_t>(b)]);
    if (da != db) return da < db;
    return a < b;  // earlier draw wins
  });
  std::vector<int> votes(static_cast<std::size_t>(n_classes), 0);
  for (Index i = 0; i < k; ++i) {
    const Index draw = draws[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
    ++votes[static_cast<std::size_t>(labels[static_cast<std::size_t>(draw)])];
  }
  int best = 0;
  for (Index c = 1; c < n_classes; ++c) {
    if (votes[static_cast<std::size_t>(c)] > votes[static_cast<std::size_t>(best)]) best = static_cast<int>(c);
  }
  return best;
}

// votes(m, q) = class voted by model m for query q.
Mat<int> committee_votes(const ProxyLearner& learner, const Matrix& queries) {
  if (queries.cols() != learner.ref_embeddings.cols()) throw ShapeError("proxy: query dimension mismatch");
  const Index n_ref = learner.ref_embeddings.rows();
  const Index n_query = queries.rows();

  // Squared distances query x reference, shared across models.
  const Vector ref2 = learner.ref_embeddings.rowwise().squaredNorm();
  Matrix d2 = (-2.0 * queries * learner.ref_embeddings.transpose()).rowwise() + ref2.transpose();
  d2.colwise() += Vector(queries.rowwise().squaredNorm());

  Mat<int> votes(learner.n_models, n_query);
  parallel_for(static_cast<std::size_t>(learner.n_models), [&](std::size_t begin, std::size_t end) {
    for (std::size_t m = begin; m < end; ++m) {
      rng::Engine eng(rng::derive_seed(learner.seed, 0xB007, m));
      std::vector<Index> draws(static_cast<std::size_t>(n_ref));
      for (Index i = 0; i < n_ref; ++i) {
        draws[static_cast<std::size_t>(i)] = static_cast<Index>(eng.below(static_cast<std::uint64_t>(n_ref)));
      }
      for (Index q = 0; q < n_query; ++q) {
        votes(static_cast<Index>(m), q) =
            committee_vote(d2.row(q).transpose(), draws, learner.k, learner.ref_labels, learner.n_classes);
      }
    }
  });
  return votes;
}

}  // namespace

std::vector<PredictionStack> proxy_predict(const ProxyLearner& learner, const Matrix& queries) {
  const Mat<int> votes = committee_votes(learner, queries);
  std::vector<PredictionStack> stacks;
  stacks.reserve(static_cast<std::size_t>(queries.rows()));
  for (Index q = 0; q < queries.rows(); ++q) {
    std::vector<Matrix> slices;
    slices.reserve(static_cast<std::size_t>(learner.n_models));
    for (Index m = 0; m < learner.n_models; ++m) {
      Matrix one_hot = Matrix::Zero(1, learner.n_classes);
      one_hot(0, votes(m, q)) = 1.0;
      slices.push_back(std::move(one_hot));
    }
    stacks.emplace_back(std::move(slices), static_cast<SampleId>(q));
  }
  return stacks;
}

std::vector<int> proxy_predict_labels(const ProxyLearner& learner, const Matrix& queries) {
  const Mat<int> votes = committee_votes(learner, queries);
  std::vector<int> labels(static_cast<std::size_t>(queries.rows()));
  for (Index q = 0; q < queries.rows(); ++q) {
    std::vector<int> counts(static_cast<std::size_t>(learner.n_classes), 0);
    for (Index m = 0; m < learner.n_models; ++m) ++counts[static_cast<std::size_t>(votes(m, q))];
    int best = 0;
    for (Index c = 1; c < learner.n_classes; ++c) {
      if (counts[static_cast<std::size_t>(c)] > counts[static_cast<std::size_t>(best)]) best = static_cast<int>(c);
    }
    labels[static_cast<std::size_t>(q)] = best;
  }
  return labels;
}

Vector proxy_uncertainty(const ProxyLearner& learner, const Matrix& queries) {
  if (learner.n_models < 2) throw ConfigError("proxy: uncertainty needs at least two models");
  const Mat<int> votes = committee_votes(learner, queries);
  Vector out(queries.rows());
  for (Index q = 0; q < queries.rows(); ++q) {
    // Mean over classes of the population variance of the one-hot votes.
    double total = 0.0;
    for (Index c = 0; c < learner.n_classes; ++c) {
      const double p = (votes.col(q).array() == static_cast<int>(c)).cast<double>().mean();
      total += p * (1.0 - p);
    }
    out(q) = total / static_cast<double>(learner.n_classes);
  }
  return out;
}

std::vector<std::pair<int, double>> group_aggregate(std::span<const double> per_sample_scores,
                                                    std::span<const int> groups, GroupReduce reduce) {
  if (per_sample_scores.size() != groups.size()) throw ShapeError("group aggregate: size mismatch");
  if (groups.empty()) throw ConfigError("group aggregate: missing group assignments");
  std::map<int, std::pair<double, Index>> acc;  // group -> (accumulated, count)
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const double s = per_sample_scores[i];
    auto [it, fresh] = acc.try_emplace(groups[i], s, 1);
    if (fresh) continue;
    switch (reduce) {
      case GroupReduce::mean:
      case GroupReduce::sum: it->second.first += s; break;
      case GroupReduce::max: it->second.first = std::max(it->second.first, s); break;
    }
    it->second.second += 1;
  }
  std::vector<std::pair<int, double>> out;
  out.reserve(acc.size());
  for (const auto& [group, entry] : acc) {
    double value = entry.first;
    if (reduce == GroupReduce::mean) value /= static_cast<double>(entry.second);
    out.emplace_back(group, value);
  }
  return out;
}

namespace {

Matrix rows_of(const Matrix& m, std::span<const Index> rows) {
  Matrix out(static_cast<Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = m.row(rows[i]);
  return out;
}

const Vector& require_uncertainty(const StepInputs& inputs, const char* strategy) {
  if (!inputs.uncertainty) {
    throw ConfigError(std::string(strategy) + " strategy needs per-sample uncertainty scores");
  }
  return *inputs.uncertainty;
}

// Top n candidates by score, descending, ties by ascending pool index.
// n == 0 disables the filter and keeps the candidate order.
std::vector<Index> filter_most_uncertain(const std::vector<Index>& candidates, const Vector& scores,
                                         Index n) {
  if (n == 0) return candidates;
  Vector cand_scores(static_cast<Index>(candidates.size()));
  for (std::size_t i = 0; i < candidates.size(); ++i) cand_scores(static_cast<Index>(i)) = scores(candidates[i]);
  const std::vector<Index> top = top_k_uncertain(cand_scores, n);
  std::vector<Index> out;
  out.reserve(top.size());
  for (Index pos : top) out.push_back(candidates[static_cast<std::size_t>(pos)]);
  return out;
}

struct GroupView {
  std::vector<int> ids;                         // candidate group ids, ascending
  std::vector<std::vector<Index>> members;      // non-annotated rows per group
  std::vector<double> uncertainty;              // aggregated, parallel to ids (may be empty)
};

GroupView build_group_view(const SamplePool& pool, const std::vector<Index>& candidates,
                           const StepInputs& inputs, GroupReduce reduce, bool need_uncertainty) {
  if (!pool.has_groups()) throw ConfigError("group mode requires group assignments");
  GroupView view;
  std::map<int, std::vector<Index>> by_group;
  for (Index row : candidates) by_group[pool.groups[static_cast<std::size_t>(row)]].push_back(row);
  for (auto& [gid, rows] : by_group) {
    view.ids.push_back(gid);
    view.members.push_back(std::move(rows));
  }
  if (need_uncertainty) {
    const Vector& unc = require_uncertainty(inputs, "group");
    view.uncertainty.reserve(view.ids.size());
    for (const auto& rows : view.members) {
      std::vector<double> scores;
      std::vector<int> tags;
      scores.reserve(rows.size());
      tags.reserve(rows.size());
      for (Index row : rows) {
        scores.push_back(unc(row));
        tags.push_back(0);
      }
      view.uncertainty.push_back(group_aggregate(scores, tags, reduce).front().second);
    }
  }
  return view;
}

// Positions of the n largest values, descending, ties by ascending position.
std::vector<std::size_t> top_positions(const std::vector<double>& values, Index n) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (values[a] != values[b]) return values[a] > values[b];
    return a < b;
  });
  order.resize(std::min<std::size_t>(order.size(), static_cast<std::size_t>(n)));
  return order;
}

QueryBatch sample_mode_step(const StrategyConfig& strategy, const SamplePool& pool,
                            const AnnotationState& state, const StepInputs& inputs,
                            const std::vector<Index>& candidates) {
  QueryBatch batch;
  batch.iteration = state.iteration() + 1;
  const Index n_rep = std::min<Index>(strategy.n_rep, static_cast<Index>(candidates.size()));

  switch (strategy.kind) {
    case StrategyKind::random: {
      rng::Engine eng(rng::derive_seed(strategy.seed, 0x5EED, static_cast<std::uint64_t>(state.iteration())));
      for (Index pos : rng::sample_without_replacement(static_cast<Index>(candidates.size()), n_rep, eng)) {
        batch.selected.push_back(candidates[static_cast<std::size_t>(pos)]);
        batch.scores.push_back(std::numeric_limits<double>::quiet_NaN());
      }
      break;
    }
    case StrategyKind::uncertainty: {
      const Vector& unc = require_uncertainty(inputs, "uncertainty");
      for (Index row : filter_most_uncertain(candidates, unc, n_rep)) {
        batch.selected.push_back(row);
        batch.scores.push_back(unc(row));
      }
      break;
    }
    case StrategyKind::setcover: {
      const Vector& unc = require_uncertainty(inputs, "setcover");
      const Matrix& desc = inputs.descriptors ? *inputs.descriptors : pool.embeddings;
      const std::vector<Index> s_unc = filter_most_uncertain(candidates, unc, strategy.n_unc);
      const Matrix cand_desc = rows_of(desc, s_unc);
      const Matrix universe = rows_of(desc, candidates);
      for (Index pos : greedy_set_cover(cand_desc, universe, n_rep)) {
        batch.selected.push_back(s_unc[static_cast<std::size_t>(pos)]);
        batch.scores.push_back(unc(s_unc[static_cast<std::size_t>(pos)]));
      }
      break;
    }
    case StrategyKind::bsq: {
      if (!inputs.g_pool) throw ConfigError("bsq strategy needs the fitted pool Gaussian");
      std::vector<Index> s_unc = candidates;
      if (strategy.n_unc > 0) {
        s_unc = filter_most_uncertain(candidates, require_uncertainty(inputs, "bsq"), strategy.n_unc);
      }
      const Matrix annotated = rows_of(pool.embeddings, state.annotated());
      const DiagGaussian g_an = fit_diag_gaussian(annotated);
      std::vector<Index> picks;
      if (strategy.bsq_mode == BsqMode::sequential_refit) {
        picks = select_bsq_sequential(s_unc, pool.embeddings, *inputs.g_pool, annotated, n_rep);
      } else {
        picks = select_bsq(s_unc, pool.embeddings, *inputs.g_pool, g_an, n_rep);
      }
      for (Index row : picks) {
        batch.selected.push_back(row);
        batch.scores.push_back(bsq_log_ratio(pool.embeddings.row(row).transpose(), *inputs.g_pool, g_an));
      }
      break;
    }
    case StrategyKind::upperbound: {
      for (Index row : candidates) {
        batch.selected.push_back(row);
        batch.scores.push_back(std::numeric_limits<double>::quiet_NaN());
      }
      break;
    }
  }
  return batch;
}

QueryBatch group_mode_step(const StrategyConfig& strategy, const SamplePool& pool,
                           const AnnotationState& state, const StepInputs& inputs,
                           const std::vector<Index>& candidates) {
  QueryBatch batch;
  batch.iteration = state.iteration() + 1;
  const bool need_uncertainty =
      strategy.kind == StrategyKind::uncertainty || strategy.kind == StrategyKind::setcover ||
      (strategy.kind == StrategyKind::bsq && strategy.n_unc > 0);
  GroupView view = build_group_view(pool, candidates, inputs, strategy.group_reduce, need_uncertainty);
  const Index n_groups = static_cast<Index>(view.ids.size());
  const Index n_rep = std::min<Index>(strategy.n_rep, n_groups);

  std::vector<std::size_t> chosen;
  std::vector<double> chosen_scores;
  switch (strategy.kind) {
    case StrategyKind::random: {
      rng::Engine eng(rng::derive_seed(strategy.seed, 0x5EED, static_cast<std::uint64_t>(state.iteration())));
      for (Index pos : rng::sample_without_replacement(n_groups, n_rep, eng)) {
        chosen.push_back(static_cast<std::size_t>(pos));
        chosen_scores.push_back(std::numeric_limits<double>::quiet_NaN());
      }
      break;
    }
    case StrategyKind::uncertainty: {
      for (std::size_t g : top_positions(view.uncertainty, n_rep)) {
        chosen.push_back(g);
        chosen_scores.push_back(view.uncertainty[g]);
      }
      break;
    }
    case StrategyKind::setcover: {
      std::vector<std::size_t> s_unc(view.ids.size());
      std::iota(s_unc.begin(), s_unc.end(), std::size_t{0});
      if (strategy.n_unc > 0 && strategy.n_unc < n_groups) s_unc = top_positions(view.uncertainty, strategy.n_unc);
      const Matrix& desc = inputs.descriptors ? *inputs.descriptors : pool.embeddings;
      Matrix group_desc(static_cast<Index>(view.ids.size()), desc.cols());
      for (std::size_t g = 0; g < view.members.size(); ++g) {
        group_desc.row(static_cast<Index>(g)) = rows_of(desc, view.members[g]).colwise().mean();
      }
      Matrix cand_desc(static_cast<Index>(s_unc.size()), desc.cols());
      for (std::size_t i = 0; i < s_unc.size(); ++i) {
        cand_desc.row(static_cast<Index>(i)) = group_desc.row(static_cast<Index>(s_unc[i]));
      }
      for (Index pos : greedy_set_cover(cand_desc, group_desc, n_rep)) {
        chosen.push_back(s_unc[static_cast<std::size_t>(pos)]);
        chosen_scores.push_back(view.uncertainty[s_unc[static_cast<std::size_t>(pos)]]);
      }
      break;
    }
    case StrategyKind::bsq: {
      if (!inputs.g_pool) throw ConfigError("bsq strategy needs the fitted pool Gaussian");
      const Matrix annotated = rows_of(pool.embeddings, state.annotated());
      std::vector<std::size_t> s_unc(view.ids.size());
      std::iota(s_unc.begin(), s_unc.end(), std::size_t{0});
      if (strategy.n_unc > 0 && strategy.n_unc < n_groups) s_unc = top_positions(view.uncertainty, strategy.n_unc);
      // Sequential refit appends whole groups between picks; one-shot ranks
      // all candidate groups against the current annotated fit.
      Matrix an = annotated;
      std::vector<std::size_t> remaining = s_unc;
      for (Index step = 0; step < n_rep && !remaining.empty(); ++step) {
        const DiagGaussian g_an = fit_diag_gaussian(an);
        std::vector<double> group_scores;
        group_scores.reserve(remaining.size());
        for (std::size_t g : remaining) {
          std::vector<double> member_scores;
          std::vector<int> tags;
          member_scores.reserve(view.members[g].size());
          tags.reserve(view.members[g].size());
          for (Index row : view.members[g]) {
            member_scores.push_back(bsq_log_ratio(pool.embeddings.row(row).transpose(), *inputs.g_pool, g_an));
            tags.push_back(0);
          }
          group_scores.push_back(group_aggregate(member_scores, tags, strategy.group_reduce).front().second);
        }
        if (strategy.bsq_mode == BsqMode::one_shot) {
          for (std::size_t pos : top_positions(group_scores, n_rep)) {
            chosen.push_back(remaining[pos]);
            chosen_scores.push_back(group_scores[pos]);
          }
          break;
        }
        const std::size_t pick = top_positions(group_scores, 1).front();
        chosen.push_back(remaining[pick]);
        chosen_scores.push_back(group_scores[pick]);
        for (Index row : view.members[remaining[pick]]) {
          an.conservativeResize(an.rows() + 1, Eigen::NoChange);
          an.row(an.rows() - 1) = pool.embeddings.row(row);
        }
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(pick));
      }
      break;
    }
    case StrategyKind::upperbound: {
      for (std::size_t g = 0; g < view.ids.size(); ++g) {
        chosen.push_back(g);
        chosen_scores.push_back(std::numeric_limits<double>::quiet_NaN());
      }
      break;
    }
  }

  for (std::size_t i = 0; i < chosen.size(); ++i) {
    for (Index row : view.members[chosen[i]]) {
      batch.selected.push_back(row);
      batch.scores.push_back(chosen_scores[i]);
    }
  }
  return batch;
}

}  // namespace

QueryBatch strategy_step(const StrategyConfig& strategy, const SamplePool& pool,
                         const AnnotationState& state, const StepInputs& inputs) {
  strategy.validate();
  const std::vector<Index> candidates = state.non_annotated();
  if (candidates.empty()) throw StateError("strategy: nothing left to query");
  if (strategy.mode == QueryMode::group) return group_mode_step(strategy, pool, state, inputs, candidates);
  return sample_mode_step(strategy, pool, state, inputs, candidates);
}

namespace {

std::optional<double> annotated_entropy(const SamplePool& pool, const AnnotationState& state) {
  if (!pool.has_labels()) return std::nullopt;
  std::vector<int> labels;
  labels.reserve(state.annotated().size());
  for (Index row : state.annotated()) labels.push_back(pool.labels[static_cast<std::size_t>(row)]);
  return class_entropy(labels);
}

// Macro-averaged per-class overlap of predicted vs true labels, computed as
// Dice between the per-class indicator masks over the evaluation set.
std::optional<double> eval_dice(const SamplePool& pool, const AnnotationState& state,
                                const RunConfig& config, int iteration) {
  if (!config.eval || !pool.has_labels()) return std::nullopt;
  const EvalSet& eval = *config.eval;
  Matrix ref = Matrix(state.n_annotated(), pool.embeddings.cols());
  std::vector<int> ref_labels;
  ref_labels.reserve(static_cast<std::size_t>(state.n_annotated()));
  Index r = 0;
  int max_label = 0;
  for (Index row : state.annotated()) {
    ref.row(r++) = pool.embeddings.row(row);
    ref_labels.push_back(pool.labels[static_cast<std::size_t>(row)]);
  }
  for (int l : pool.labels) max_label = std::max(max_label, l);
  for (int l : eval.labels) max_label = std::max(max_label, l);

  const ProxyLearner learner =
      proxy_fit(std::move(ref), std::move(ref_labels), std::min<Index>(config.proxy.k, state.n_annotated()),
                config.proxy.n_models, rng::derive_seed(config.strategy.seed, 0xD1CE, static_cast<std::uint64_t>(iteration)),
                max_label + 1);
  const std::vector<int> predicted = proxy_predict_labels(learner, eval.embeddings);

  const Index n = static_cast<Index>(eval.labels.size());
  double total = 0.0;
  int defined = 0;
  for (int c = 0; c <= max_label; ++c) {
    BinaryMask pred{{1, 1, n}, std::vector<std::uint8_t>(static_cast<std::size_t>(n), 0)};
    BinaryMask truth{{1, 1, n}, std::vector<std::uint8_t>(static_cast<std::size_t>(n), 0)};
    for (Index i = 0; i < n; ++i) {
      pred.voxels[static_cast<std::size_t>(i)] = predicted[static_cast<std::size_t>(i)] == c;
      truth.voxels[static_cast<std::size_t>(i)] = eval.labels[static_cast<std::size_t>(i)] == c;
    }
    if (const std::optional<double> d = dice(pred, truth)) {
      total += *d;
      ++defined;
    }
  }
  if (defined == 0) return std::nullopt;
  return total / static_cast<double>(defined);
}

IterationRecord snapshot(const SamplePool& pool, const AnnotationState& state, const RunConfig& config,
                         int iter, std::vector<SampleId> queried_ids, double pool_kernel_term) {
  IterationRecord rec;
  rec.iter = iter;
  rec.queried_ids = std::move(queried_ids);
  rec.n_annotated = state.n_annotated();
  rec.entropy = annotated_entropy(pool, state);
  Matrix annotated(state.n_annotated(), pool.embeddings.cols());
  Index r = 0;
  for (Index row : state.annotated()) annotated.row(r++) = pool.embeddings.row(row);
  if (state.n_annotated() >= 2) {
    const DiagGaussian g_an = fit_diag_gaussian(annotated);
    rec.g_an_mean = g_an.mean;
    rec.g_an_std = g_an.std;
  }
  // The pool-vs-pool kernel term never changes within a run.
  rec.mmd_value =
      mean_gaussian_kernel(annotated, annotated, config.mmd_sigma, config.mmd_squared_kernel) +
      pool_kernel_term -
      2.0 * mean_gaussian_kernel(annotated, pool.embeddings, config.mmd_sigma, config.mmd_squared_kernel);
  rec.dice = eval_dice(pool, state, config, iter);
  return rec;
}

}  // namespace

ExperimentLog run_experiment(const SamplePool& pool, std::span<const SampleId> initial_annotated_ids,
                             const RunConfig& config) {
  config.strategy.validate();
  if (initial_annotated_ids.empty()) throw ConfigError("run: initial annotated set must be non-empty");
  if (config.n_iters < 1) throw ConfigError("run: n_iters must be >= 1");
  if (config.external_uncertainty && config.external_uncertainty->size() != pool.size()) {
    throw ShapeError("run: external uncertainty size does not match pool");
  }

  std::vector<Index> initial_rows;
  initial_rows.reserve(initial_annotated_ids.size());
  for (SampleId id : initial_annotated_ids) initial_rows.push_back(pool.index_of(id));

  ExperimentLog log;
  log.config = config;
  log.n_pool = pool.size();
  log.n_lat = pool.latent_dim();
  log.initial_ids.assign(initial_annotated_ids.begin(), initial_annotated_ids.end());

  AnnotationState state = AnnotationState::initial(pool.size(), initial_rows);
  const double pool_kernel_term =
      mean_gaussian_kernel(pool.embeddings, pool.embeddings, config.mmd_sigma, config.mmd_squared_kernel);
  log.iterations.push_back(snapshot(pool, state, config, 0, {}, pool_kernel_term));

  const bool needs_uncertainty =
      config.strategy.kind == StrategyKind::uncertainty || config.strategy.kind == StrategyKind::setcover ||
      (config.strategy.kind == StrategyKind::bsq && config.strategy.n_unc > 0);
  DiagGaussian g_pool;
  if (config.strategy.kind == StrategyKind::bsq) g_pool = fit_diag_gaussian(pool.embeddings);

  for (int t = 1; t <= config.n_iters; ++t) {
    const std::vector<Index> candidates = state.non_annotated();
    if (candidates.empty()) {
      log.exhausted = true;
      break;
    }

    Vector uncertainty;
    StepInputs inputs;
    if (config.strategy.kind == StrategyKind::bsq) inputs.g_pool = &g_pool;
    if (needs_uncertainty) {
      if (config.external_uncertainty) {
        uncertainty = *config.external_uncertainty;
      } else {
        if (!pool.has_labels()) {
          throw ConfigError("run: " + strategy_name(config.strategy.kind) +
                            " needs pool labels (for the proxy learner) or external uncertainty scores");
        }
        Matrix ref(state.n_annotated(), pool.embeddings.cols());
        std::vector<int> ref_labels;
        ref_labels.reserve(static_cast<std::size_t>(state.n_annotated()));
        Index r = 0;
        for (Index row : state.annotated()) {
          ref.row(r++) = pool.embeddings.row(row);
          ref_labels.push_back(pool.labels[static_cast<std::size_t>(row)]);
        }
        const ProxyLearner learner = proxy_fit(
            std::move(ref), std::move(ref_labels), std::min<Index>(config.proxy.k, state.n_annotated()),
            config.proxy.n_models, rng::derive_seed(config.strategy.seed, 0x4C4E, static_cast<std::uint64_t>(t)));
        const Matrix queries = rows_of(pool.embeddings, candidates);
        const Vector cand_unc = proxy_uncertainty(learner, queries);
        uncertainty = Vector::Zero(pool.size());
        for (std::size_t i = 0; i < candidates.size(); ++i) uncertainty(candidates[i]) = cand_unc(static_cast<Index>(i));
      }
      inputs.uncertainty = &uncertainty;
    }

    const QueryBatch batch = strategy_step(config.strategy, pool, state, inputs);
    state = state.annotate(batch.selected);

    std::vector<SampleId> queried_ids;
    queried_ids.reserve(batch.selected.size());
    for (Index row : batch.selected) queried_ids.push_back(pool.sample_ids[static_cast<std::size_t>(row)]);
    log.iterations.push_back(snapshot(pool, state, config, t, std::move(queried_ids), pool_kernel_term));
  }
  return log;
}

std::vector<Index> initial_draw(const SamplePool& pool, Index n_init, std::span<const double> class_priors,
                                std::uint64_t seed) {
  if (!pool.has_labels()) throw ConfigError("initial draw: pool has no labels");
  if (n_init < 1 || n_init > pool.size()) throw ConfigError("initial draw: bad n_init");
  std::vector<double> weights(static_cast<std::size_t>(pool.size()), 1.0);
  if (!class_priors.empty()) {
    for (Index i = 0; i < pool.size(); ++i) {
      const int label = pool.labels[static_cast<std::size_t>(i)];
      if (label < 0 || static_cast<std::size_t>(label) >= class_priors.size()) {
        throw ConfigError("initial draw: label outside prior table");
      }
      weights[static_cast<std::size_t>(i)] = class_priors[static_cast<std::size_t>(label)];
    }
  }
  rng::Engine eng(seed);
  return rng::weighted_sample_without_replacement(std::move(weights), n_init, eng);
}

}  // namespace alquery
