#pragma once

#include "stepfda/types.hpp"

#include <memory>

namespace stepfda::bspline {

/// A clamped B-spline basis on [0, t_max]. n_basis equals the number of
/// interior breakpoints plus the order.
struct BasisSpec {
  int n_basis = 30;
  int order = 4;        // 4 = cubic
  Vector breakpoints;   // strictly increasing, spanning [0, t_max]

  Scalar t_max() const { return breakpoints[breakpoints.size() - 1]; }

  /// Uniformly spaced breakpoints with the requested basis size.
  static BasisSpec uniform(Scalar t_max, int n_basis, int order = 4);

  bool operator==(const BasisSpec& other) const;
};

/// Evaluation and quadrature machinery for one BasisSpec.
class Basis {
 public:
  explicit Basis(BasisSpec spec);

  const BasisSpec& spec() const { return spec_; }
  int size() const { return spec_.n_basis; }
  Scalar t_max() const { return spec_.t_max(); }

  /// Values of the `order` basis functions supported at x; `first` is
  /// the index of the first one. Cox-de Boor triangular scheme.
  /// Throws InvalidInput when x lies outside [0, t_max].
  void evaluate_local(Scalar x, Index& first, Vector& values) const;

  /// Dense row of all n_basis values at x.
  Vector evaluate_row(Scalar x) const;

  /// len x n_basis design matrix over a grid of abscissae.
  Matrix design(const Eigen::Ref<const Vector>& grid) const;

  /// Gram matrix of basis inner products, integral of phi_r phi_s over
  /// [0, t_max], by composite Simpson on a 4x-refined grid per knot
  /// segment. Symmetric positive semidefinite, banded by local support.
  Matrix gram() const;

 private:
  BasisSpec spec_;
  Vector knots_;  // clamped: order copies of each endpoint
};

/// Least-squares projector onto a basis for one fixed grid; the
/// factorization is computed once and reused across curves.
class Fitter {
 public:
  Fitter(BasisSpec spec, const Eigen::Ref<const Vector>& grid);

  const Basis& basis() const { return basis_; }
  const Vector& grid() const { return grid_; }

  /// Coefficients minimizing ||design * c - y||. Throws FitError when the
  /// design is rank deficient (more basis functions than the grid can
  /// tell apart).
  Vector fit(const Eigen::Ref<const Vector>& y) const;

 private:
  Basis basis_;
  Vector grid_;
  Matrix design_;
  Eigen::ColPivHouseholderQR<Matrix> qr_;
};

/// Pointwise expansion sum_r coeffs[r] phi_r(x) over a grid.
Vector evaluate(const Basis& basis, const Eigen::Ref<const Vector>& coeffs,
                const Eigen::Ref<const Vector>& grid);

/// Epoch abscissae 1..t_len as reals, the default fitting grid.
Vector epoch_grid(Index t_len);

}  // namespace stepfda::bspline
