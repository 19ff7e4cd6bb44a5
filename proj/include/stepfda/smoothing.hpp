#pragma once

#include "stepfda/bspline.hpp"
#include "stepfda/features.hpp"
#include "stepfda/types.hpp"

#include <array>
#include <vector>

namespace stepfda::smoothing {

constexpr int kNumVariables = 3;  // amount, intensity, pattern

/// Standardized curves represented by basis coefficients, one matrix per
/// variable, plus everything needed for inner products downstream.
struct SmoothedDataset {
  std::array<Matrix, kNumVariables> coefficients;  // N x R_k
  std::array<bspline::BasisSpec, kNumVariables> basis;
  std::array<Scalar, kNumVariables> scale{1, 1, 1};
  std::array<Matrix, kNumVariables> gram;  // R_k x R_k

  Index n_days() const { return coefficients[0].rows(); }
  Index total_basis() const {
    return coefficients[0].cols() + coefficients[1].cols() + coefficients[2].cols();
  }
};

/// Divides each variable by the mean of its per-day maxima, in place,
/// and returns the divisors. A variable that is identically zero across
/// all days passes through unchanged with a sentinel divisor of 1.
std::array<Scalar, kNumVariables> standardize(std::vector<features::FeatureTriple>& triples);

/// Least-squares basis coefficients of the standardized triples; the
/// fitting grid is the epoch grid 1..T.
SmoothedDataset smooth(const std::vector<features::FeatureTriple>& triples,
                       const std::array<bspline::BasisSpec, kNumVariables>& specs,
                       const std::array<Scalar, kNumVariables>& scale);

/// standardize + smooth with uniformly spaced breakpoints.
SmoothedDataset smooth_dataset(std::vector<features::FeatureTriple> triples,
                               const std::array<int, kNumVariables>& n_basis);

}  // namespace stepfda::smoothing
