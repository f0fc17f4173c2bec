#pragma once

#include "alquery/pool.hpp"
#include "alquery/types.hpp"

#include <cstdint>
#include <vector>

namespace alquery {

// Labeled Gaussian-blob pool. Class centers are a fixed function of
// (class index, dims), so two pools with the same seed are identical and
// pools with different seeds share the cluster geometry. The pool always
// contains exactly per_class samples of every class; class_priors weight
// the initial annotated draw only.
struct SynthConfig {
  int n_classes = 10;
  int per_class = 500;
  Index dims = 5;
  std::vector<double> class_priors;  // empty = uniform
  std::uint64_t seed = 0;
  double center_spread = 3.0;
  double blob_std = 1.0;
};

SamplePool synth_clusters(const SynthConfig& config);

SamplePool synth_clusters(int n_classes, int per_class, Index dims,
                          const std::vector<double>& class_priors, std::uint64_t seed);

// Deterministic center of one class blob: the first 2*dims classes lie at
// +/- center_spread along the coordinate axes, later ones at fixed
// pseudo-random positions.
Vector synth_class_center(int class_id, Index dims, double center_spread = 3.0);

}  // namespace alquery
