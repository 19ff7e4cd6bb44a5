#include "stepfda/clustering.hpp"

#include "stepfda/evaluation.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>

using namespace stepfda;
using clustering::Method;

TEST_SUITE("clustering") {

TEST_CASE("kmeans separates two well-separated blobs perfectly") {
  Rng rng(41);
  const Matrix points = oracles::gaussian_blobs(rng, {{-10, 0}, {10, 0}}, 40, 1.0);
  std::vector<int> truth(80, 0);
  std::fill(truth.begin() + 40, truth.end(), 1);
  const auto result = clustering::kmeans(points, 2, 7);
  CHECK(evaluation::ccr(truth, result.labels) == 1.0);
}

TEST_CASE("kmeans edge cases") {
  Rng rng(42);
  Matrix points(6, 2);
  for (Index i = 0; i < 6; ++i) {
    points(i, 0) = static_cast<Scalar>(i);
    points(i, 1) = rng.uniform(0.0, 0.1);
  }
  SUBCASE("k equal to N gives zero cost") {
    const auto result = clustering::kmeans(points, 6, 3);
    CHECK(result.cost == doctest::Approx(0.0).epsilon(1e-12));
    std::vector<int> sorted_labels = result.labels;
    std::sort(sorted_labels.begin(), sorted_labels.end());
    for (int c = 0; c < 6; ++c) CHECK(sorted_labels[static_cast<std::size_t>(c)] == c);
  }
  SUBCASE("k = 1 recovers the total sum of squares around the mean") {
    const auto result = clustering::kmeans(points, 1, 3);
    const Matrix centered = points.rowwise() - points.colwise().mean();
    CHECK(result.cost == doctest::Approx(centered.squaredNorm()).epsilon(1e-12));
    for (int l : result.labels) CHECK(l == 0);
  }
  SUBCASE("k beyond N is a contract error") {
    CHECK_THROWS_AS(clustering::kmeans(points, 7, 3), InvalidInput);
  }
}

TEST_CASE("kmeans cost trace is non-increasing and runs are deterministic") {
  Rng rng(43);
  const Matrix points = oracles::gaussian_blobs(rng, {{0, 0}, {4, 0}, {0, 4}}, 30, 1.2);
  const auto a = clustering::kmeans(points, 3, 99);
  const auto b = clustering::kmeans(points, 3, 99);
  CHECK(a.labels == b.labels);
  CHECK(a.cost == b.cost);
  for (std::size_t i = 1; i < a.cost_trace.size(); ++i) {
    CHECK(a.cost_trace[i] <= a.cost_trace[i - 1] + 1e-9);
  }
  // Recomputing the objective from labels and centers matches, and a
  // relabeling changes nothing.
  Scalar recomputed = 0;
  for (Index i = 0; i < points.rows(); ++i) {
    recomputed += (points.row(i) - a.centers.row(a.labels[static_cast<std::size_t>(i)])).squaredNorm();
  }
  CHECK(recomputed == doctest::Approx(a.cost).epsilon(1e-12));
  const std::vector<int> perm{2, 0, 1};
  Scalar permuted = 0;
  Matrix permuted_centers(3, 2);
  for (int c = 0; c < 3; ++c) permuted_centers.row(perm[static_cast<std::size_t>(c)]) = a.centers.row(c);
  for (Index i = 0; i < points.rows(); ++i) {
    const int l = perm[static_cast<std::size_t>(a.labels[static_cast<std::size_t>(i)])];
    permuted += (points.row(i) - permuted_centers.row(l)).squaredNorm();
  }
  CHECK(permuted == doctest::Approx(a.cost).epsilon(1e-12));
}

TEST_CASE("pam separates blobs with medoids inside each blob") {
  Rng rng(44);
  const Matrix points = oracles::gaussian_blobs(rng, {{-8, 0}, {8, 0}}, 25, 1.0);
  std::vector<int> truth(50, 0);
  std::fill(truth.begin() + 25, truth.end(), 1);
  const auto result = clustering::pam(points, 2, 1);
  CHECK(evaluation::ccr(truth, result.labels) == 1.0);
  REQUIRE(result.medoids.size() == 2);
  for (Index m : result.medoids) {
    CHECK(std::abs(std::abs(points(m, 0)) - 8.0) < 3.0);  // central, not fringe
  }
  for (std::size_t i = 1; i < result.cost_trace.size(); ++i) {
    CHECK(result.cost_trace[i] <= result.cost_trace[i - 1]);
  }
}

TEST_CASE("pam with a far outlier keeps it off the medoid set") {
  Matrix points(11, 2);
  Rng rng(45);
  for (Index i = 0; i < 6; ++i) {
    points(i, 0) = rng.normal(0.0, 0.3);
    points(i, 1) = rng.normal(0.0, 0.3);
  }
  for (Index i = 6; i < 10; ++i) {
    points(i, 0) = rng.normal(10.0, 0.3);
    points(i, 1) = rng.normal(0.0, 0.3);
  }
  points(10, 0) = 11.5;  // moderate outlier beside the second blob
  points(10, 1) = 3.0;
  const auto result = clustering::pam(points, 2, 1);
  CHECK(std::find(result.medoids.begin(), result.medoids.end(), Index{10}) ==
        result.medoids.end());
  CHECK(result.cost == doctest::Approx(oracles::brute_force_medoid_cost(points, 2)).epsilon(1e-9));

  // Sum of distances to medoids does not exceed the same partition's
  // sum of distances to its centroids.
  Matrix centroids = Matrix::Zero(2, 2);
  Vector counts = Vector::Zero(2);
  for (Index i = 0; i < points.rows(); ++i) {
    centroids.row(result.labels[static_cast<std::size_t>(i)]) += points.row(i);
    counts[result.labels[static_cast<std::size_t>(i)]] += 1;
  }
  for (int c = 0; c < 2; ++c) centroids.row(c) /= counts[c];
  Scalar centroid_cost = 0;
  for (Index i = 0; i < points.rows(); ++i) {
    centroid_cost += (points.row(i) - centroids.row(result.labels[static_cast<std::size_t>(i)])).norm();
  }
  CHECK(result.cost <= centroid_cost + 1e-9);
}

TEST_CASE("pam matches brute-force optimum on tiny instances") {
  Rng rng(46);
  int optimal = 0;
  const int trials = 30;
  for (int trial = 0; trial < trials; ++trial) {
    const Index n = rng.uniform_int(4, 12);
    const int k = static_cast<int>(rng.uniform_int(1, 3));
    Matrix points(n, 2);
    for (Index i = 0; i < n; ++i) {
      points(i, 0) = rng.uniform(-5.0, 5.0);
      points(i, 1) = rng.uniform(-5.0, 5.0);
    }
    const auto result = clustering::pam(points, k, 1);
    const Scalar best = oracles::brute_force_medoid_cost(points, k);
    CHECK(result.cost >= best - 1e-9);
    CHECK(result.cost <= best * 1.02 + 1e-9);
    if (result.cost <= best + 1e-9) ++optimal;
  }
  CHECK(optimal >= trials - 1);
}

TEST_CASE("pam is deterministic and k=N is each point its own medoid") {
  Rng rng(47);
  Matrix points(8, 3);
  for (Index i = 0; i < 8; ++i) {
    for (Index d = 0; d < 3; ++d) points(i, d) = rng.uniform(-1.0, 1.0);
  }
  const auto a = clustering::pam(points, 3, 5);
  const auto b = clustering::pam(points, 3, 5);
  CHECK(a.labels == b.labels);
  CHECK(a.medoids == b.medoids);
  const auto full = clustering::pam(points, 8, 5);
  CHECK(full.cost == doctest::Approx(0.0));
}

TEST_CASE("gap statistic finds three blobs and one blob") {
  Rng rng(48);
  const Matrix blobs3 = oracles::gaussian_blobs(rng, {{0, 0}, {12, 0}, {0, 12}}, 40, 1.0);
  const auto curve3 = clustering::gap_statistic(blobs3, 6, 20, Method::kmeans, 31);
  CHECK(curve3.chosen_k == 3);

  const Matrix blob1 = oracles::gaussian_blobs(rng, {{0, 0}}, 120, 1.0);
  const auto curve1 = clustering::gap_statistic(blob1, 6, 20, Method::kmeans, 31);
  CHECK(curve1.chosen_k == 1);

  CHECK(curve3.ks == std::vector<int>{1, 2, 3, 4, 5, 6});
  CHECK(curve3.sks.minCoeff() >= 0.0);
}

TEST_CASE("gap statistic argument checks") {
  Matrix points = Matrix::Random(10, 2);
  CHECK_THROWS_AS(clustering::gap_statistic(points, 1, 10, Method::kmeans, 1), ConfigError);
  CHECK_THROWS_AS(clustering::gap_statistic(points, 4, 0, Method::kmeans, 1), ConfigError);
}

}  // TEST_SUITE
