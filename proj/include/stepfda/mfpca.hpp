#pragma once

#include "stepfda/smoothing.hpp"
#include "stepfda/types.hpp"

#include <array>
#include <filesystem>

namespace stepfda::mfpca {

using smoothing::kNumVariables;
using smoothing::SmoothedDataset;

struct InsufficientData : InvalidInput {
  using InvalidInput::InvalidInput;
};

/// All component curves carry zero variance (e.g. an all-zero dataset).
struct DegenerateVariance : InvalidInput {
  using InvalidInput::InvalidInput;
};

/// Fitted multivariate FPCA model. Eigenfunctions live in the same basis
/// as the data; a column of eigen_coeffs stacks the three per-variable
/// coefficient blocks of one eigenfunction. Orthonormal under the summed
/// L2 inner product, sign-fixed so each coefficient sum is >= 0.
struct MfpcaModel {
  std::array<bspline::BasisSpec, kNumVariables> basis;
  std::array<Scalar, kNumVariables> scale{1, 1, 1};
  std::array<Matrix, kNumVariables> gram;
  std::array<Vector, kNumVariables> mean_coeffs;
  Matrix eigen_coeffs;     // (R1+R2+R3) x n_components
  Vector eigenvalues;      // retained, non-increasing, >= 0
  Vector explained;        // cumulative explained-variance ratios
  Scalar total_variance = 0;
  Index n_components = 0;

  Index total_basis() const {
    return basis[0].n_basis + basis[1].n_basis + basis[2].n_basis;
  }
  /// Rows of eigen_coeffs belonging to variable k.
  Index block_offset(int k) const;
  Eigen::Block<const Matrix> eigen_block(int k) const;
};

/// Solves the covariance-operator eigenproblem in coefficient space:
/// center per variable, weight by the Gram square root, eigendecompose
/// (1/(N-1)) W^{1/2} C^T C W^{1/2}, and map back through W^{-1/2}.
/// Retains the smallest number of components whose cumulative explained
/// variance reaches the threshold.
MfpcaModel fit(const SmoothedDataset& data, Scalar variance_threshold);

/// N x R score matrix: Gram-weighted inner products of centered
/// coefficients with the eigenfunctions. Requires the same bases as the
/// model was fit on.
Matrix project(const MfpcaModel& model, const SmoothedDataset& data);

/// Truncated Karhunen-Loeve reconstruction on a grid: per variable,
/// an N x len matrix of mean + score-weighted eigenfunctions.
std::array<Matrix, kNumVariables> reconstruct(const MfpcaModel& model,
                                              const Eigen::Ref<const Matrix>& scores,
                                              const Eigen::Ref<const Vector>& grid);

void save_model(const MfpcaModel& model, const std::filesystem::path& path);
MfpcaModel load_model(const std::filesystem::path& path);

}  // namespace stepfda::mfpca
