#include "alquery/synth.hpp"

#include "alquery/rng.hpp"

namespace alquery {

namespace {
constexpr std::uint64_t kCenterStream = 0x636C7573746572ULL;  // fixed tag, not a user seed
}

Vector synth_class_center(int class_id, Index dims, double center_spread) {
  // The first 2*dims classes sit symmetrically on the axes (+spread e_d,
  // then -spread e_d); any further classes get fixed pseudo-random centers.
  Vector center = Vector::Zero(dims);
  if (class_id < 2 * dims) {
    center(class_id % dims) = class_id < dims ? center_spread : -center_spread;
    return center;
  }
  rng::Engine eng(rng::derive_seed(kCenterStream, static_cast<std::uint64_t>(class_id)));
  for (Index d = 0; d < dims; ++d) center(d) = center_spread * eng.normal();
  return center;
}

SamplePool synth_clusters(const SynthConfig& config) {
  if (config.n_classes < 1) throw ConfigError("synth: need at least one class");
  if (config.per_class < 1) throw ConfigError("synth: need at least one sample per class");
  if (config.dims < 1) throw ConfigError("synth: dims must be >= 1");
  if (!config.class_priors.empty()) {
    if (static_cast<int>(config.class_priors.size()) != config.n_classes) {
      throw ConfigError("synth: prior count does not match class count");
    }
    double total = 0.0;
    for (double p : config.class_priors) {
      if (p < 0.0) throw ConfigError("synth: priors must be non-negative");
      total += p;
    }
    if (total <= 0.0) throw ConfigError("synth: total prior must be positive");
  }

  const Index n = static_cast<Index>(config.n_classes) * config.per_class;
  Matrix embeddings(n, config.dims);
  std::vector<int> labels(static_cast<std::size_t>(n));
  rng::Engine eng(config.seed);
  Index row = 0;
  for (int c = 0; c < config.n_classes; ++c) {
    const Vector center = synth_class_center(c, config.dims, config.center_spread);
    for (int i = 0; i < config.per_class; ++i, ++row) {
      for (Index d = 0; d < config.dims; ++d) {
        embeddings(row, d) = center(d) + config.blob_std * eng.normal();
      }
      labels[static_cast<std::size_t>(row)] = c;
    }
  }
  return create_pool(std::move(embeddings), std::move(labels));
}

SamplePool synth_clusters(int n_classes, int per_class, Index dims,
                          const std::vector<double>& class_priors, std::uint64_t seed) {
  SynthConfig config;
  config.n_classes = n_classes;
  config.per_class = per_class;
  config.dims = dims;
  config.class_priors = class_priors;
  config.seed = seed;
  return synth_clusters(config);
}

}  // namespace alquery
