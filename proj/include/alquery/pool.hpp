#pragma once

#include "alquery/types.hpp"

#include <optional>
#include <span>
#include <vector>

namespace alquery {

// Immutable sample pool: one embedding row per sample, optional class label
// and group (e.g. subject volume) per sample, stable external ids.
struct SamplePool {
  Matrix embeddings;                // n_samples x n_lat
  std::vector<int> labels;          // empty when absent
  std::vector<int> groups;          // empty when absent
  std::vector<SampleId> sample_ids;

  Index size() const { return embeddings.rows(); }
  Index latent_dim() const { return embeddings.cols(); }
  bool has_labels() const { return !labels.empty(); }
  bool has_groups() const { return !groups.empty(); }

  // Distinct group ids, ascending.
  std::vector<int> group_ids() const;
  Index index_of(SampleId id) const;  // throws DataError for unknown ids
};

SamplePool create_pool(Matrix embeddings,
                       std::optional<std::vector<int>> labels = std::nullopt,
                       std::optional<std::vector<int>> groups = std::nullopt,
                       std::optional<std::vector<SampleId>> sample_ids = std::nullopt);

// Evolving annotated / non-annotated partition of the pool indices.
// Annotation only grows; iteration counts completed query rounds.
class AnnotationState {
 public:
  static AnnotationState initial(Index n_total, std::span<const Index> annotated);

  const std::vector<Index>& annotated() const { return annotated_; }
  std::vector<Index> non_annotated() const;  // ascending
  bool is_annotated(Index i) const { return annotated_mask_[static_cast<std::size_t>(i)]; }
  Index n_total() const { return n_total_; }
  Index n_annotated() const { return static_cast<Index>(annotated_.size()); }
  int iteration() const { return iteration_; }

  // New state with the batch appended (prior order preserved) and the
  // iteration counter advanced. Re-annotation is a state error.
  AnnotationState annotate(std::span<const Index> batch) const;

 private:
  AnnotationState() = default;
  std::vector<Index> annotated_;       // in annotation order
  std::vector<bool> annotated_mask_;
  Index n_total_ = 0;
  int iteration_ = 0;
};

struct HoldoutSplit {
  std::vector<SampleId> pool_ids;
  std::vector<SampleId> validation_ids;
  std::vector<SampleId> test_ids;
  std::uint64_t seed = 0;
};

// Group-respecting, seeded partition into pool/validation/test. Group counts
// follow the ratios by largest remainder, so sizes stay within one group of
// the targets. Ungrouped pools treat every sample as its own group.
HoldoutSplit split_holdout(const SamplePool& pool, double train_ratio, double val_ratio,
                           double test_ratio, std::uint64_t seed);

}  // namespace alquery
