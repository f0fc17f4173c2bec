#pragma once

#include "alquery/types.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

// Deterministic randomness. mt19937_64 output is fully specified by the
// standard, but the std distribution adaptors are not, so uniform/normal
// draws and shuffles are implemented here directly. Every experiment log
// must be byte-identical across reruns of the same seed.

namespace alquery::rng {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Derives an independent stream seed from a base seed and up to two stream
// tags, so sub-tasks of one run never share a generator.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) {
  std::uint64_t s = base;
  std::uint64_t h = splitmix64(s);
  s ^= a * 0xD1342543DE82EF95ULL;
  h ^= splitmix64(s);
  s ^= b * 0xAF251AF3B0F025B5ULL;
  h ^= splitmix64(s);
  return h;
}

class Engine {
 public:
  explicit Engine(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Unbiased integer in [0, n) by rejection.
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw ConfigError("rng: below(0)");
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x = gen_();
    while (x >= limit) x = gen_();
    return x % n;
  }

  // Standard normal via Box-Muller, spare value cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  double normal(double mean, double std) { return mean + std * normal(); }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

template <typename T>
void shuffle(std::vector<T>& v, Engine& eng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(eng.below(i));
    std::swap(v[i - 1], v[j]);
  }
}

// k distinct indices from [0, n), in draw order.
inline std::vector<Index> sample_without_replacement(Index n, Index k, Engine& eng) {
  if (k > n) throw ConfigError("rng: cannot draw more samples than available");
  std::vector<Index> pool(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
  std::vector<Index> out;
  out.reserve(static_cast<std::size_t>(k));
  for (Index i = 0; i < k; ++i) {
    const std::size_t j = static_cast<std::size_t>(eng.below(static_cast<std::uint64_t>(pool.size())));
    out.push_back(pool[j]);
    pool[j] = pool.back();
    pool.pop_back();
  }
  return out;
}

// k distinct indices drawn proportionally to non-negative weights.
inline std::vector<Index> weighted_sample_without_replacement(std::vector<double> weights, Index k, Engine& eng) {
  const Index n = static_cast<Index>(weights.size());
  if (k > n) throw ConfigError("rng: cannot draw more samples than available");
  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0 || !std::isfinite(w)) throw ConfigError("rng: weights must be finite and non-negative");
    total += w;
  }
  if (total <= 0.0) throw ConfigError("rng: total weight must be positive");
  std::vector<Index> out;
  out.reserve(static_cast<std::size_t>(k));
  std::vector<bool> taken(static_cast<std::size_t>(n), false);
  for (Index draw = 0; draw < k; ++draw) {
    double u = eng.uniform() * total;
    Index pick = -1;
    for (Index i = 0; i < n; ++i) {
      if (taken[static_cast<std::size_t>(i)]) continue;
      u -= weights[static_cast<std::size_t>(i)];
      pick = i;
      if (u < 0.0) break;
    }
    taken[static_cast<std::size_t>(pick)] = true;
    total -= weights[static_cast<std::size_t>(pick)];
    weights[static_cast<std::size_t>(pick)] = 0.0;
    out.push_back(pick);
  }
  return out;
}

}  // namespace alquery::rng
