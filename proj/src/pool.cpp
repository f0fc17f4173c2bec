#include "alquery/pool.hpp"

#include "alquery/rng.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

namespace alquery {

std::vector<int> SamplePool::group_ids() const {
  std::vector<int> ids(groups);
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

Index SamplePool::index_of(SampleId id) const {
  for (Index i = 0; i < size(); ++i) {
    if (sample_ids[static_cast<std::size_t>(i)] == id) return i;
  }
  throw DataError("pool: unknown sample id " + std::to_string(id));
}

SamplePool create_pool(Matrix embeddings, std::optional<std::vector<int>> labels,
                       std::optional<std::vector<int>> groups,
                       std::optional<std::vector<SampleId>> sample_ids) {
  const Index n = embeddings.rows();
  if (n == 0 || embeddings.cols() < 1) throw ShapeError("pool: embeddings must be non-empty with n_lat >= 1");
  if (!embeddings.allFinite()) throw DataError("pool: embeddings contain a non-finite value");

  SamplePool pool;
  pool.embeddings = std::move(embeddings);
  if (labels) {
    if (static_cast<Index>(labels->size()) != n) throw ShapeError("pool: label count does not match sample count");
    pool.labels = std::move(*labels);
  }
  if (groups) {
    if (static_cast<Index>(groups->size()) != n) throw ShapeError("pool: group count does not match sample count");
    pool.groups = std::move(*groups);
  }
  if (sample_ids) {
    if (static_cast<Index>(sample_ids->size()) != n) throw ShapeError("pool: id count does not match sample count");
    std::unordered_set<SampleId> seen;
    for (SampleId id : *sample_ids) {
      if (!seen.insert(id).second) throw DataError("pool: duplicate sample id " + std::to_string(id));
    }
    pool.sample_ids = std::move(*sample_ids);
  } else {
    pool.sample_ids.resize(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) pool.sample_ids[static_cast<std::size_t>(i)] = i;
  }
  return pool;
}

AnnotationState AnnotationState::initial(Index n_total, std::span<const Index> annotated) {
  if (n_total < 1) throw ShapeError("annotation: empty pool");
  AnnotationState st;
  st.n_total_ = n_total;
  st.annotated_mask_.assign(static_cast<std::size_t>(n_total), false);
  st.annotated_.reserve(annotated.size());
  for (Index i : annotated) {
    if (i < 0 || i >= n_total) throw DataError("annotation: index out of range");
    if (st.annotated_mask_[static_cast<std::size_t>(i)]) throw StateError("annotation: duplicate initial index");
    st.annotated_mask_[static_cast<std::size_t>(i)] = true;
    st.annotated_.push_back(i);
  }
  return st;
}

std::vector<Index> AnnotationState::non_annotated() const {
  std::vector<Index> out;
  out.reserve(static_cast<std::size_t>(n_total_) - annotated_.size());
  for (Index i = 0; i < n_total_; ++i) {
    if (!annotated_mask_[static_cast<std::size_t>(i)]) out.push_back(i);
  }
  return out;
}

AnnotationState AnnotationState::annotate(std::span<const Index> batch) const {
  AnnotationState next(*this);
  for (Index i : batch) {
    if (i < 0 || i >= n_total_) throw DataError("annotation: index out of range");
    if (next.annotated_mask_[static_cast<std::size_t>(i)]) {
      throw StateError("annotation: index " + std::to_string(i) + " already annotated");
    }
    next.annotated_mask_[static_cast<std::size_t>(i)] = true;
    next.annotated_.push_back(i);
  }
  next.iteration_ = iteration_ + 1;
  return next;
}

namespace {

// Largest-remainder apportionment of n units over the ratios; remainder ties
// go to the lower split index.
std::array<Index, 3> apportion(Index n, const std::array<double, 3>& ratios) {
  std::array<Index, 3> counts{};
  std::array<double, 3> remainder{};
  Index assigned = 0;
  for (int s = 0; s < 3; ++s) {
    const double target = static_cast<double>(n) * ratios[s];
    counts[s] = static_cast<Index>(std::floor(target));
    remainder[s] = target - std::floor(target);
    assigned += counts[s];
  }
  std::array<int, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return remainder[a] > remainder[b]; });
  for (Index left = n - assigned; left > 0; --left) {
    counts[order[static_cast<std::size_t>(n - assigned - left)]] += 1;
  }
  return counts;
}

}  // namespace

HoldoutSplit split_holdout(const SamplePool& pool, double train_ratio, double val_ratio,
                           double test_ratio, std::uint64_t seed) {
  const std::array<double, 3> ratios{train_ratio, val_ratio, test_ratio};
  for (double r : ratios) {
    if (!(r > 0.0)) throw ConfigError("split: ratios must be positive");
  }
  if (std::abs(train_ratio + val_ratio + test_ratio - 1.0) > 1e-9) {
    throw ConfigError("split: ratios must sum to 1");
  }

  // Unit of allocation is the group; ungrouped samples are singleton groups.
  std::vector<std::vector<SampleId>> units;
  if (pool.has_groups()) {
    std::unordered_map<int, std::size_t> slot;
    std::vector<int> gids = pool.group_ids();
    units.resize(gids.size());
    for (std::size_t g = 0; g < gids.size(); ++g) slot[gids[g]] = g;
    for (Index i = 0; i < pool.size(); ++i) {
      units[slot[pool.groups[static_cast<std::size_t>(i)]]].push_back(pool.sample_ids[static_cast<std::size_t>(i)]);
    }
  } else {
    units.reserve(static_cast<std::size_t>(pool.size()));
    for (SampleId id : pool.sample_ids) units.push_back({id});
  }

  const Index n_units = static_cast<Index>(units.size());
  if (n_units < 3) throw ConfigError("split: more splits than groups");

  std::vector<Index> order(units.size());
  for (std::size_t i = 0; i < units.size(); ++i) order[i] = static_cast<Index>(i);
  rng::Engine eng(seed);
  rng::shuffle(order, eng);

  const std::array<Index, 3> counts = apportion(n_units, ratios);
  HoldoutSplit split;
  split.seed = seed;
  Index pos = 0;
  const auto take = [&](std::vector<SampleId>& dst, Index count) {
    for (Index u = 0; u < count; ++u, ++pos) {
      const auto& unit = units[static_cast<std::size_t>(order[static_cast<std::size_t>(pos)])];
      dst.insert(dst.end(), unit.begin(), unit.end());
    }
  };
  take(split.pool_ids, counts[0]);
  take(split.validation_ids, counts[1]);
  take(split.test_ids, counts[2]);
  return split;
}

}  // namespace alquery
