#include "alquery/encoder.hpp"

#include "alquery/rng.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace alquery {

namespace {
constexpr double kVarianceTol = 1e-12;
}

Vector LinearEncoder::explained_variance_ratio() const {
  if (kind != EncoderKind::pca) throw ConfigError("encoder: variance ratio only defined for pca");
  Vector ratio = Vector::Zero(explained_variance.size());
  const double total = total_variance;
  if (total > 0.0) ratio = explained_variance / total;
  return ratio;
}

LinearEncoder fit_pca(const Matrix& data, Index n_lat) {
  const Index rows = data.rows();
  const Index cols = data.cols();
  if (!data.allFinite()) throw DataError("pca: data contains a non-finite value");
  if (rows < 2) throw DataError("pca: need at least two rows");
  if (n_lat < 1 || n_lat > std::min<Index>(rows - 1, cols)) {
    throw ConfigError("pca: n_lat must be in [1, min(rows-1, cols)]");
  }

  LinearEncoder enc;
  enc.kind = EncoderKind::pca;
  enc.offset = data.colwise().mean();
  const Matrix centered = data.rowwise() - enc.offset.transpose();
  const Matrix cov = centered.transpose() * centered / static_cast<double>(rows);

  Eigen::SelfAdjointEigenSolver<Matrix> solver(cov);
  if (solver.info() != Eigen::Success) throw NumericError("pca: eigendecomposition failed");

  // Eigen returns ascending eigenvalues; take the trailing n_lat reversed.
  enc.projection.resize(cols, n_lat);
  enc.explained_variance.resize(n_lat);
  for (Index k = 0; k < n_lat; ++k) {
    const Index src = cols - 1 - k;
    enc.projection.col(k) = solver.eigenvectors().col(src);
    enc.explained_variance(k) = std::max(0.0, solver.eigenvalues()(src));
  }
  enc.total_variance = std::max(0.0, solver.eigenvalues().sum());
  if (enc.explained_variance(n_lat - 1) <= kVarianceTol) enc.zero_variance_warning = true;
  return enc;
}

LinearEncoder fit_random_projection(Index d_in, Index n_lat, std::uint64_t seed) {
  if (d_in < 1 || n_lat < 1 || n_lat > d_in) throw ConfigError("random projection: need 1 <= n_lat <= d_in");
  LinearEncoder enc;
  enc.kind = EncoderKind::random_projection;
  enc.offset = Vector::Zero(d_in);
  enc.projection.resize(d_in, n_lat);
  rng::Engine eng(seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n_lat));
  for (Index c = 0; c < n_lat; ++c) {
    for (Index r = 0; r < d_in; ++r) enc.projection(r, c) = scale * eng.normal();
  }
  return enc;
}

Matrix encode(const LinearEncoder& enc, const Matrix& data) {
  if (data.cols() != enc.input_dim()) throw ShapeError("encoder: input dimension mismatch");
  return (data.rowwise() - enc.offset.transpose()) * enc.projection;
}

Matrix decode(const LinearEncoder& enc, const Matrix& embeddings) {
  if (embeddings.cols() != enc.latent_dim()) throw ShapeError("encoder: embedding dimension mismatch");
  return (embeddings * enc.projection.transpose()).rowwise() + enc.offset.transpose();
}

}  // namespace alquery
