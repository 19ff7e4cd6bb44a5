#pragma once

#include "stepfda/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace stepfda::clustering {

enum class Method { kmeans, pam };

Method method_from_name(const std::string& name);
std::string method_name(Method m);

struct ClusterResult {
  int k = 0;
  std::vector<int> labels;       // length N, values 0..k-1, every value used
  Matrix centers;                // k x R centroids (K-means) or medoid rows (PAM)
  std::vector<Index> medoids;    // PAM only: data indices of the medoids
  Scalar cost = 0;               // within dispersion: sum of squared distances
                                 // (K-means) or distances (PAM)
  std::uint64_t seed = 0;
  std::vector<Scalar> cost_trace;  // objective after each iteration / swap pass
};

struct KMeansOptions {
  int restarts = 25;
  int max_iter = 300;
  Scalar tol = 1e-6;  // max centroid shift declaring convergence
};

/// Lloyd iterations from k-means++ seeding, best of `restarts` by cost.
/// Assignment ties go to the lowest cluster index; an emptied cluster is
/// re-seeded at the point farthest from its centroid. Deterministic for
/// a given seed.
ClusterResult kmeans(const Eigen::Ref<const Matrix>& points, int k, std::uint64_t seed,
                     const KMeansOptions& options = {});

struct PamOptions {
  int restarts = 10;  // restart 0 is the greedy BUILD, the rest random seeds
};

/// PAM: BUILD seeding then full-scan SWAP passes until no swap lowers
/// the total distance. Additional seeded restarts rerun SWAP from
/// random medoid sets and the cheapest local optimum wins, which keeps
/// tiny instances at (or within a hair of) the global optimum.
/// Deterministic for a given seed.
ClusterResult pam(const Eigen::Ref<const Matrix>& points, int k, std::uint64_t seed,
                  const PamOptions& options = {});

ClusterResult cluster(const Eigen::Ref<const Matrix>& points, int k, Method method,
                      std::uint64_t seed);

struct GapCurve {
  std::vector<int> ks;
  Vector gaps;
  Vector sks;
  int chosen_k = 0;
};

/// Tibshirani's gap statistic over k = 1..k_max with b reference
/// datasets drawn uniformly over the per-dimension bounding box of the
/// points. chosen_k is the smallest k with Gap(k) >= Gap(k+1) - s_{k+1},
/// or k_max when none qualifies.
GapCurve gap_statistic(const Eigen::Ref<const Matrix>& points, int k_max, int b,
                       Method method, std::uint64_t seed);

}  // namespace stepfda::clustering
