#pragma once

#include "stepfda/types.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace stepfda {

/// Derives an independent stream seed from a master seed and a stream
/// index (splitmix64 finalizer). Curves, restarts, and reference
/// replicates each get their own stream so results do not depend on
/// evaluation order.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seeded random source with the handful of distributions the project
/// needs. Samplers are written out explicitly (inverse CDF, Box-Muller)
/// so that a given seed reproduces the same stream on any standard
/// library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer on [lo, hi], inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1;
    if (range == 0) return static_cast<std::int64_t>(gen_());
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % range;
    std::uint64_t x;
    do {
      x = gen_();
    } while (x >= limit);
    return lo + static_cast<std::int64_t>(x % range);
  }

  double normal(double mean, double sd) {
    // Box-Muller; consumes two uniforms per call.
    double u1;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return mean + sd * r * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Exponential with the given mean.
  double exponential(double mean) {
    double u;
    do {
      u = uniform();
    } while (u >= 1.0);
    return -mean * std::log1p(-u);
  }

  /// k distinct indices drawn uniformly from {0, ..., pool-1}; the
  /// result is in draw order (partial Fisher-Yates).
  std::vector<Index> sample_without_replacement(Index pool, Index k) {
    if (k > pool) throw std::logic_error("sample_without_replacement: k > pool");
    std::vector<Index> idx(static_cast<std::size_t>(pool));
    for (Index i = 0; i < pool; ++i) idx[static_cast<std::size_t>(i)] = i;
    for (Index i = 0; i < k; ++i) {
      const Index j = static_cast<Index>(uniform_int(i, pool - 1));
      std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    }
    idx.resize(static_cast<std::size_t>(k));
    return idx;
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace stepfda
