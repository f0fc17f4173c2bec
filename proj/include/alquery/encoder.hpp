#pragma once

#include "alquery/types.hpp"

#include <cstdint>

namespace alquery {

enum class EncoderKind { pca, random_projection };

// Deterministic linear stand-in for a learned encoder: center by `offset`,
// then project onto `projection` columns. Precomputed embeddings can always
// be ingested from CSV instead of using one of these.
struct LinearEncoder {
  Matrix projection;           // d_in x n_lat
  Vector offset;               // d_in
  EncoderKind kind = EncoderKind::pca;
  Vector explained_variance;   // per component, pca only
  double total_variance = 0.0;
  bool zero_variance_warning = false;

  Index input_dim() const { return projection.rows(); }
  Index latent_dim() const { return projection.cols(); }

  // Fraction of total input variance captured per component (all zeros for
  // zero-variance input).
  Vector explained_variance_ratio() const;
};

// Principal components of the population covariance, ordered by
// non-increasing explained variance. Requesting more components than the
// data rank pads with zero-variance directions and sets the warning flag.
LinearEncoder fit_pca(const Matrix& data, Index n_lat);

LinearEncoder fit_random_projection(Index d_in, Index n_lat, std::uint64_t seed);

Matrix encode(const LinearEncoder& enc, const Matrix& data);
Matrix decode(const LinearEncoder& enc, const Matrix& embeddings);

}  // namespace alquery
