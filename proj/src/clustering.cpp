#include "stepfda/clustering.hpp"

#include "stepfda/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace stepfda::clustering {

Method method_from_name(const std::string& name) {
  if (name == "kmeans") return Method::kmeans;
  if (name == "pam") return Method::pam;
  throw ConfigError("unknown clustering method '" + name + "'");
}

std::string method_name(Method m) { return m == Method::kmeans ? "kmeans" : "pam"; }

namespace {

void check_k(Index n, int k) {
  if (k < 1) throw InvalidInput("k must be >= 1");
  if (k > n) {
    throw InvalidInput("k=" + std::to_string(k) + " exceeds the number of points " +
                       std::to_string(n));
  }
}

/// Index of the nearest centroid, lowest index on exact ties.
int nearest_center(const Eigen::Ref<const Matrix>& centers,
                   const Eigen::Ref<const Vector>& point, Scalar* dist2_out) {
  int best = 0;
  Scalar best_d = (centers.row(0).transpose() - point).squaredNorm();
  for (int c = 1; c < centers.rows(); ++c) {
    const Scalar d = (centers.row(c).transpose() - point).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  if (dist2_out) *dist2_out = best_d;
  return best;
}

Matrix kmeanspp_init(const Eigen::Ref<const Matrix>& points, int k, Rng& rng) {
  const Index n = points.rows();
  Matrix centers(k, points.cols());
  centers.row(0) = points.row(rng.uniform_int(0, n - 1));
  Vector d2(n);
  for (int c = 1; c < k; ++c) {
    Scalar sum = 0;
    for (Index i = 0; i < n; ++i) {
      Scalar best = std::numeric_limits<Scalar>::max();
      for (int j = 0; j < c; ++j) {
        best = std::min(best, (centers.row(j) - points.row(i)).squaredNorm());
      }
      d2[i] = best;
      sum += best;
    }
    if (sum <= 0) {
      // All remaining points coincide with chosen centers; any pick works.
      centers.row(c) = points.row(rng.uniform_int(0, n - 1));
      continue;
    }
    Scalar target = rng.uniform() * sum;
    Index pick = n - 1;
    for (Index i = 0; i < n; ++i) {
      target -= d2[i];
      if (target <= 0) {
        pick = i;
        break;
      }
    }
    centers.row(c) = points.row(pick);
  }
  return centers;
}

ClusterResult kmeans_single(const Eigen::Ref<const Matrix>& points, int k,
                            std::uint64_t seed, const KMeansOptions& options) {
  const Index n = points.rows();
  Rng rng(seed);

  ClusterResult result;
  result.k = k;
  result.seed = seed;
  result.labels.assign(static_cast<std::size_t>(n), 0);
  result.centers = kmeanspp_init(points, k, rng);

  std::vector<Index> counts(static_cast<std::size_t>(k));
  for (int iter = 0; iter < options.max_iter; ++iter) {
    // Assignment.
    Scalar cost = 0;
    std::fill(counts.begin(), counts.end(), Index{0});
    for (Index i = 0; i < n; ++i) {
      Scalar d2;
      const int c = nearest_center(result.centers, points.row(i).transpose(), &d2);
      result.labels[static_cast<std::size_t>(i)] = c;
      ++counts[static_cast<std::size_t>(c)];
      cost += d2;
    }
    result.cost = cost;
    result.cost_trace.push_back(cost);

    // Re-seed any emptied cluster at the point farthest from its centroid.
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) continue;
      Index far = 0;
      Scalar far_d = -1;
      for (Index i = 0; i < n; ++i) {
        const int a = result.labels[static_cast<std::size_t>(i)];
        if (counts[static_cast<std::size_t>(a)] <= 1) continue;
        const Scalar d = (points.row(i) - result.centers.row(a)).squaredNorm();
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      --counts[static_cast<std::size_t>(result.labels[static_cast<std::size_t>(far)])];
      result.labels[static_cast<std::size_t>(far)] = c;
      counts[static_cast<std::size_t>(c)] = 1;
      result.centers.row(c) = points.row(far);
    }

    // Update.
    Matrix next = Matrix::Zero(k, points.cols());
    for (Index i = 0; i < n; ++i) {
      next.row(result.labels[static_cast<std::size_t>(i)]) += points.row(i);
    }
    Scalar shift = 0;
    for (int c = 0; c < k; ++c) {
      next.row(c) /= static_cast<Scalar>(counts[static_cast<std::size_t>(c)]);
      shift = std::max(shift, (next.row(c) - result.centers.row(c)).norm());
    }
    result.centers = next;
    if (shift < options.tol) break;
  }

  // Final assignment so labels, centers, and cost agree.
  Scalar cost = 0;
  for (Index i = 0; i < n; ++i) {
    Scalar d2;
    result.labels[static_cast<std::size_t>(i)] =
        nearest_center(result.centers, points.row(i).transpose(), &d2);
    cost += d2;
  }
  result.cost = cost;
  result.cost_trace.push_back(cost);
  return result;
}

}  // namespace

ClusterResult kmeans(const Eigen::Ref<const Matrix>& points, int k, std::uint64_t seed,
                     const KMeansOptions& options) {
  check_k(points.rows(), k);
  ClusterResult best;
  bool have = false;
  for (int r = 0; r < std::max(options.restarts, 1); ++r) {
    ClusterResult candidate =
        kmeans_single(points, k, mix_seed(seed, static_cast<std::uint64_t>(r)), options);
    if (!have || candidate.cost < best.cost) {
      best = std::move(candidate);
      have = true;
    }
  }
  best.seed = seed;
  return best;
}

namespace {

/// Pairwise Euclidean distances; PAM instances here are small enough to
/// hold the full matrix.
Matrix distance_matrix(const Eigen::Ref<const Matrix>& points) {
  const Vector sq = points.rowwise().squaredNorm();
  Matrix d2 = (-2.0 * points * points.transpose());
  d2.colwise() += sq;
  d2.rowwise() += sq.transpose();
  return d2.cwiseMax(0.0).cwiseSqrt();
}

}  // namespace

namespace {

struct PamSolution {
  std::vector<Index> medoids;
  Scalar cost = 0;
  std::vector<Scalar> cost_trace;
};

Scalar pam_total_cost(const Matrix& dist, const std::vector<Index>& medoids) {
  Scalar cost = 0;
  for (Index i = 0; i < dist.rows(); ++i) {
    Scalar best = std::numeric_limits<Scalar>::max();
    for (Index m : medoids) best = std::min(best, dist(i, m));
    cost += best;
  }
  return cost;
}

/// Greedy BUILD: first the point with the smallest total distance, then
/// whichever point reduces the total cost the most.
std::vector<Index> pam_build(const Matrix& dist, int k) {
  const Index n = dist.rows();
  std::vector<Index> medoids;
  medoids.reserve(static_cast<std::size_t>(k));
  std::vector<bool> is_medoid(static_cast<std::size_t>(n), false);
  Index first = 0;
  Scalar best_total = std::numeric_limits<Scalar>::max();
  for (Index c = 0; c < n; ++c) {
    const Scalar total = dist.col(c).sum();
    if (total < best_total) {
      best_total = total;
      first = c;
    }
  }
  medoids.push_back(first);
  is_medoid[static_cast<std::size_t>(first)] = true;
  Vector nearest = dist.col(first);
  while (static_cast<int>(medoids.size()) < k) {
    Index best_c = -1;
    Scalar best_gain = -std::numeric_limits<Scalar>::max();
    for (Index c = 0; c < n; ++c) {
      if (is_medoid[static_cast<std::size_t>(c)]) continue;
      const Scalar gain = (nearest - dist.col(c)).cwiseMax(0.0).sum();
      if (gain > best_gain) {
        best_gain = gain;
        best_c = c;
      }
    }
    medoids.push_back(best_c);
    is_medoid[static_cast<std::size_t>(best_c)] = true;
    nearest = nearest.cwiseMin(dist.col(best_c));
  }
  return medoids;
}

/// Full-scan SWAP passes: apply the best (medoid, candidate) exchange
/// while one lowers the total distance.
PamSolution pam_swap(const Matrix& dist, std::vector<Index> medoids) {
  const Index n = dist.rows();
  const int k = static_cast<int>(medoids.size());
  std::vector<bool> is_medoid(static_cast<std::size_t>(n), false);
  for (Index m : medoids) is_medoid[static_cast<std::size_t>(m)] = true;

  PamSolution solution;
  Scalar cost = pam_total_cost(dist, medoids);
  solution.cost_trace.push_back(cost);
  while (true) {
    Scalar best_cost = cost;
    int best_slot = -1;
    Index best_candidate = -1;
    for (int slot = 0; slot < k; ++slot) {
      std::vector<Index> trial = medoids;
      for (Index h = 0; h < n; ++h) {
        if (is_medoid[static_cast<std::size_t>(h)]) continue;
        trial[static_cast<std::size_t>(slot)] = h;
        const Scalar c = pam_total_cost(dist, trial);
        if (c < best_cost - 1e-12) {
          best_cost = c;
          best_slot = slot;
          best_candidate = h;
        }
      }
    }
    if (best_slot < 0) break;
    is_medoid[static_cast<std::size_t>(medoids[static_cast<std::size_t>(best_slot)])] = false;
    medoids[static_cast<std::size_t>(best_slot)] = best_candidate;
    is_medoid[static_cast<std::size_t>(best_candidate)] = true;
    cost = best_cost;
    solution.cost_trace.push_back(cost);
  }
  solution.medoids = std::move(medoids);
  solution.cost = cost;
  return solution;
}

}  // namespace

ClusterResult pam(const Eigen::Ref<const Matrix>& points, int k, std::uint64_t seed,
                  const PamOptions& options) {
  const Index n = points.rows();
  check_k(n, k);
  const Matrix dist = distance_matrix(points);

  PamSolution best = pam_swap(dist, pam_build(dist, k));
  for (int r = 1; r < options.restarts; ++r) {
    Rng rng(mix_seed(seed, 424243ULL + static_cast<std::uint64_t>(r)));
    PamSolution candidate = pam_swap(dist, rng.sample_without_replacement(n, k));
    if (candidate.cost < best.cost - 1e-12) best = std::move(candidate);
  }

  ClusterResult result;
  result.k = k;
  result.seed = seed;
  result.cost_trace = best.cost_trace;
  std::vector<Index> medoids = best.medoids;
  std::sort(medoids.begin(), medoids.end());
  result.medoids = medoids;
  result.centers.resize(k, points.cols());
  for (int c = 0; c < k; ++c) result.centers.row(c) = points.row(medoids[static_cast<std::size_t>(c)]);
  result.labels.assign(static_cast<std::size_t>(n), 0);
  result.cost = 0;
  for (Index i = 0; i < n; ++i) {
    int assigned = 0;
    Scalar best_d = dist(i, medoids[0]);
    for (int c = 1; c < k; ++c) {
      const Scalar d = dist(i, medoids[static_cast<std::size_t>(c)]);
      if (d < best_d) {
        best_d = d;
        assigned = c;
      }
    }
    result.labels[static_cast<std::size_t>(i)] = assigned;
    result.cost += best_d;
  }
  return result;
}

ClusterResult cluster(const Eigen::Ref<const Matrix>& points, int k, Method method,
                      std::uint64_t seed) {
  return method == Method::kmeans ? kmeans(points, k, seed) : pam(points, k, seed);
}

namespace {

Scalar dispersion(const Eigen::Ref<const Matrix>& points, int k, Method method,
                  std::uint64_t seed) {
  if (method == Method::kmeans) {
    // Fewer restarts than the standalone default; the gap statistic
    // averages over many replicates anyway.
    return kmeans(points, k, seed, KMeansOptions{.restarts = 10}).cost;
  }
  return pam(points, k, seed).cost;
}

}  // namespace

GapCurve gap_statistic(const Eigen::Ref<const Matrix>& points, int k_max, int b,
                       Method method, std::uint64_t seed) {
  if (k_max < 2) throw ConfigError("gap statistic needs k_max >= 2");
  if (b < 1) throw ConfigError("gap statistic needs b >= 1");
  const Index n = points.rows();
  const Index dim = points.cols();
  check_k(n, k_max);

  const Vector lo = points.colwise().minCoeff().transpose();
  const Vector hi = points.colwise().maxCoeff().transpose();

  GapCurve curve;
  curve.gaps.resize(k_max);
  curve.sks.resize(k_max);

  Matrix ref_logw(b, k_max);
  for (int rep = 0; rep < b; ++rep) {
    Rng rng(mix_seed(seed, 1000003ULL + static_cast<std::uint64_t>(rep)));
    Matrix ref(n, dim);
    for (Index i = 0; i < n; ++i) {
      for (Index d = 0; d < dim; ++d) ref(i, d) = rng.uniform(lo[d], hi[d]);
    }
    for (int k = 1; k <= k_max; ++k) {
      const Scalar w = dispersion(ref, k, method,
                                  mix_seed(seed, 131071ULL * static_cast<std::uint64_t>(rep + 1) +
                                                     static_cast<std::uint64_t>(k)));
      ref_logw(rep, k - 1) = std::log(std::max(w, 1e-300));
    }
  }

  for (int k = 1; k <= k_max; ++k) {
    curve.ks.push_back(k);
    const Scalar w = dispersion(points, k, method, mix_seed(seed, static_cast<std::uint64_t>(k)));
    const Scalar log_w = std::log(std::max(w, 1e-300));
    const Scalar mean_ref = ref_logw.col(k - 1).mean();
    curve.gaps[k - 1] = mean_ref - log_w;
    const Scalar sd =
        std::sqrt((ref_logw.col(k - 1).array() - mean_ref).square().sum() / b);
    curve.sks[k - 1] = sd * std::sqrt(1.0 + 1.0 / b);
  }

  curve.chosen_k = k_max;
  for (int k = 1; k < k_max; ++k) {
    if (curve.gaps[k - 1] >= curve.gaps[k] - curve.sks[k]) {
      curve.chosen_k = k;
      break;
    }
  }
  return curve;
}

}  // namespace stepfda::clustering
