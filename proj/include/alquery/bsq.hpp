#pragma once

#include "alquery/types.hpp"

#include <cmath>
#include <span>
#include <vector>

namespace alquery {

// Bayesian sample querying: candidates are ranked by how likely their latent
// vector is under the whole-pool distribution relative to the distribution of
// what is already annotated. Both distributions are diagonal Gaussians fitted
// in latent space; the per-dimension likelihood is twice the Gaussian tail
// mass beyond the coordinate, and dimensions combine as a sum of logs.

// Per-dimension mean/std summary of a sample set. std is the population
// standard deviation, floored at 1e-6 (`degenerate` records any flooring).
struct DiagGaussian {
  Vector mean;
  Vector std;
  Index n_fit = 0;
  bool degenerate = false;

  Index dims() const { return mean.size(); }
};

inline constexpr double kStdFloor = 1e-6;

template <typename Derived>
DiagGaussian fit_diag_gaussian(const Eigen::MatrixBase<Derived>& embeddings) {
  const Index m = embeddings.rows();
  if (m < 2) throw DataError("diag gaussian: need at least two samples");
  DiagGaussian g;
  g.n_fit = m;
  g.mean = embeddings.colwise().mean();
  const Vector var =
      (embeddings.rowwise() - g.mean.transpose()).array().square().colwise().mean();
  g.std = var.array().sqrt();
  for (Index d = 0; d < g.std.size(); ++d) {
    if (g.std(d) < kStdFloor) {
      g.std(d) = kStdFloor;
      g.degenerate = true;
    }
  }
  return g;
}

// Likelihood of a coordinate under N(mean, std): 1 + erf(-|z-mean|/(std*sqrt(2))),
// i.e. twice the Gaussian tail mass beyond z. 1 at the mean, strictly
// decreasing in |z - mean|.
double erf_tail_likelihood(double z, double mean, double std);

// log of the above, stable arbitrarily far into the tail (where the
// probability itself would underflow).
double log_erf_tail_likelihood(double z, double mean, double std);

// Sum over dimensions of log tail-likelihood under `pool` minus under
// `annotated`: positive where the pool still has mass the annotated set
// lacks. Optional per-dimension terms for diagnostics.
template <typename Derived>
double bsq_log_ratio(const Eigen::MatrixBase<Derived>& z, const DiagGaussian& pool,
                     const DiagGaussian& annotated, std::vector<double>* per_dim_terms = nullptr) {
  if (z.size() != pool.dims() || z.size() != annotated.dims()) {
    throw ShapeError("bsq: dimension mismatch");
  }
  if (per_dim_terms) per_dim_terms->clear();
  double score = 0.0;
  for (Index d = 0; d < z.size(); ++d) {
    const double term = log_erf_tail_likelihood(z(d), pool.mean(d), pool.std(d)) -
                        log_erf_tail_likelihood(z(d), annotated.mean(d), annotated.std(d));
    if (per_dim_terms) per_dim_terms->push_back(term);
    score += term;
  }
  return score;
}

struct BsqScore {
  Index index = -1;  // pool row
  double score = 0.0;
};

// Scores every candidate row against the two fitted Gaussians.
std::vector<BsqScore> bsq_scores(std::span<const Index> candidates, const Matrix& embeddings,
                                 const DiagGaussian& pool, const DiagGaussian& annotated);

// One-shot selection: top n_rep candidates by score, descending, ties by
// ascending pool index. n_rep is clamped to the candidate count.
std::vector<Index> select_bsq(std::span<const Index> candidates, const Matrix& embeddings,
                              const DiagGaussian& pool, const DiagGaussian& annotated, Index n_rep);

// Sequential variant: after each pick the chosen embedding joins the
// annotated set and the annotated Gaussian is refitted.
std::vector<Index> select_bsq_sequential(std::span<const Index> candidates, const Matrix& embeddings,
                                         const DiagGaussian& pool, const Matrix& annotated_embeddings,
                                         Index n_rep);

struct ScalarGaussian {
  double mean = 0.0;
  double std = 1.0;
};

// Product of univariate Gaussian densities, renormalized: precisions add,
// the mean is precision-weighted.
ScalarGaussian gaussian_product(std::span<const ScalarGaussian> components);

// Mean kernel value over all row pairs of x and y (diagonal included).
double mean_gaussian_kernel(const Matrix& x, const Matrix& y, double sigma = 1.0,
                            bool squared_norm = true);

// Biased (V-statistic) maximum mean discrepancy with a Gaussian kernel
// exp(-||z-z'||^2 / (2 sigma^2)); squared_norm=false switches to the
// unsquared-exponent variant. Zero for identical sets, never negative.
double mmd(const Matrix& x, const Matrix& y, double sigma = 1.0, bool squared_norm = true);

}  // namespace alquery
