#include "alquery/bsq.hpp"

#include "alquery/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace alquery {

double erf_tail_likelihood(double z, double mean, double std) {
  if (!(std > 0.0)) throw NumericError("erf tail: std must be positive");
  return std::erfc(std::abs(z - mean) / (std * M_SQRT2));
}

double log_erf_tail_likelihood(double z, double mean, double std) {
  if (!(std > 0.0)) throw NumericError("erf tail: std must be positive");
  const double x = std::abs(z - mean) / (std * M_SQRT2);
  if (x <= 25.0) return std::log(std::erfc(x));
  // erfc underflows around x ~ 27; the asymptotic expansion
  // erfc(x) = exp(-x^2) / (x sqrt(pi)) * (1 - 1/(2x^2) + 3/(4x^4) - ...)
  // keeps far-tail scores finite and correctly ordered.
  const double inv2 = 1.0 / (x * x);
  return -x * x - std::log(x * std::sqrt(M_PI)) + std::log1p(-0.5 * inv2 + 0.75 * inv2 * inv2);
}

std::vector<BsqScore> bsq_scores(std::span<const Index> candidates, const Matrix& embeddings,
                                 const DiagGaussian& pool, const DiagGaussian& annotated) {
  if (embeddings.cols() != pool.dims() || embeddings.cols() != annotated.dims()) {
    throw ShapeError("bsq: embedding dimension mismatch");
  }
  std::vector<BsqScore> scores(candidates.size());
  parallel_for(candidates.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const Index row = candidates[i];
      scores[i] = {row, bsq_log_ratio(embeddings.row(row).transpose(), pool, annotated)};
    }
  });
  return scores;
}

namespace {

std::vector<Index> top_by_score(std::vector<BsqScore> scores, Index n_rep) {
  std::sort(scores.begin(), scores.end(), [](const BsqScore& a, const BsqScore& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.index < b.index;
  });
  const std::size_t take = static_cast<std::size_t>(std::min<Index>(n_rep, static_cast<Index>(scores.size())));
  std::vector<Index> out(take);
  for (std::size_t i = 0; i < take; ++i) out[i] = scores[i].index;
  return out;
}

}  // namespace

std::vector<Index> select_bsq(std::span<const Index> candidates, const Matrix& embeddings,
                              const DiagGaussian& pool, const DiagGaussian& annotated, Index n_rep) {
  if (candidates.empty()) throw ConfigError("bsq: empty candidate set");
  if (n_rep < 1) throw ConfigError("bsq: n_rep must be >= 1");
  return top_by_score(bsq_scores(candidates, embeddings, pool, annotated), n_rep);
}

std::vector<Index> select_bsq_sequential(std::span<const Index> candidates, const Matrix& embeddings,
                                         const DiagGaussian& pool, const Matrix& annotated_embeddings,
                                         Index n_rep) {
  if (candidates.empty()) throw ConfigError("bsq: empty candidate set");
  if (n_rep < 1) throw ConfigError("bsq: n_rep must be >= 1");
  n_rep = std::min<Index>(n_rep, static_cast<Index>(candidates.size()));

  Matrix annotated = annotated_embeddings;
  std::vector<Index> remaining(candidates.begin(), candidates.end());
  std::vector<Index> selected;
  selected.reserve(static_cast<std::size_t>(n_rep));
  for (Index step = 0; step < n_rep; ++step) {
    const DiagGaussian g_an = fit_diag_gaussian(annotated);
    const std::vector<Index> pick = select_bsq(remaining, embeddings, pool, g_an, 1);
    selected.push_back(pick.front());
    remaining.erase(std::find(remaining.begin(), remaining.end(), pick.front()));
    annotated.conservativeResize(annotated.rows() + 1, Eigen::NoChange);
    annotated.row(annotated.rows() - 1) = embeddings.row(pick.front());
  }
  return selected;
}

ScalarGaussian gaussian_product(std::span<const ScalarGaussian> components) {
  if (components.empty()) throw ConfigError("gaussian product: empty component list");
  double precision = 0.0;
  double weighted_mean = 0.0;
  for (const ScalarGaussian& g : components) {
    if (!(g.std > 0.0)) throw NumericError("gaussian product: std must be positive");
    const double p = 1.0 / (g.std * g.std);
    precision += p;
    weighted_mean += g.mean * p;
  }
  const double var = 1.0 / precision;
  return {var * weighted_mean, std::sqrt(var)};
}

double mean_gaussian_kernel(const Matrix& x, const Matrix& y, double sigma, bool squared_norm) {
  if (x.rows() == 0 || y.rows() == 0) throw ShapeError("kernel: empty sample set");
  if (x.cols() != y.cols()) throw ShapeError("kernel: dimension mismatch");
  if (!(sigma > 0.0)) throw ConfigError("kernel: sigma must be positive");
  const double denom = 2.0 * sigma * sigma;
  const Vector x2 = x.rowwise().squaredNorm();
  const Vector y2 = y.rowwise().squaredNorm();
  Matrix d2 = (-2.0 * x * y.transpose()).rowwise() + y2.transpose();
  d2.colwise() += x2;
  d2 = d2.cwiseMax(0.0);  // guard tiny negative round-off
  if (squared_norm) return (-d2 / denom).array().exp().mean();
  return (-d2.cwiseSqrt() / denom).array().exp().mean();
}

double mmd(const Matrix& x, const Matrix& y, double sigma, bool squared_norm) {
  return mean_gaussian_kernel(x, x, sigma, squared_norm) + mean_gaussian_kernel(y, y, sigma, squared_norm) -
         2.0 * mean_gaussian_kernel(x, y, sigma, squared_norm);
}

}  // namespace alquery
