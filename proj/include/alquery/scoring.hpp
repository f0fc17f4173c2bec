#pragma once

#include "alquery/types.hpp"

#include <cmath>
#include <filesystem>
#include <map>
#include <span>
#include <vector>

namespace alquery {

// Stochastic forward passes for one sample: n_mc() probability maps of
// n_pixels() x n_labels(), values in [0, 1]. Disagreement across the slices
// carries the model uncertainty.
class PredictionStack {
 public:
  PredictionStack(std::vector<Matrix> slices, SampleId sample_id);

  Index n_mc() const { return static_cast<Index>(slices_.size()); }
  Index n_pixels() const { return slices_.front().rows(); }
  Index n_labels() const { return slices_.front().cols(); }
  SampleId sample_id() const { return sample_id_; }
  const Matrix& slice(Index m) const { return slices_[static_cast<std::size_t>(m)]; }

 private:
  std::vector<Matrix> slices_;
  SampleId sample_id_ = 0;
};

// Mean over pixels of the per-pixel population variance across stochastic
// passes, for one label. In [0, 0.25] for probability-valued stacks.
double label_uncertainty(const PredictionStack& stack, Index label, bool binarize_first = false);

// Mean of the per-label scalar uncertainties.
double multiclass_uncertainty(std::span<const double> per_label);
double multiclass_uncertainty(const PredictionStack& stack, bool binarize_first = false);

// Indices of the k largest scores, descending, ties by ascending index;
// k is clamped to the candidate count.
std::vector<Index> top_k_uncertain(const Vector& scores, Index k);

// Channel-wise spatial average of a row-major H x W x C activation tensor.
Vector image_descriptor(std::span<const double> features, Index height, Index width, Index channels);

template <typename DerivedA, typename DerivedB>
double cosine_sim(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  if (a.size() != b.size()) throw ShapeError("cosine: dimension mismatch");
  const double na = a.norm();
  const double nb = b.norm();
  if (na <= 0.0 || nb <= 0.0) throw NumericError("cosine: zero-norm descriptor");
  return a.dot(b) / (na * nb);
}

// Greedy maximum set-cover: repeatedly adds the candidate maximizing
//   F(S) = sum over universe rows of max over S of cosine similarity,
// ties by ascending candidate position. Returns positions into `candidates`
// in selection order; n_rep is clamped to the candidate count.
std::vector<Index> greedy_set_cover(const Matrix& candidates, const Matrix& universe, Index n_rep);

// Prediction stack CSV surface: columns
// sample_id,mc_index,pixel_index,label,probability; one file may hold
// stacks for many samples. Every (mc, pixel, label) cell must be present.
std::map<SampleId, PredictionStack> read_prediction_stacks_csv(const std::filesystem::path& path);
void write_prediction_stacks_csv(const std::filesystem::path& path,
                                 std::span<const PredictionStack> stacks);

}  // namespace alquery
