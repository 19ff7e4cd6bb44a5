#include "stepfda/bspline.hpp"

#include <algorithm>
#include <cmath>

namespace stepfda::bspline {

BasisSpec BasisSpec::uniform(Scalar t_max, int n_basis, int order) {
  if (order < 1) throw ConfigError("spline order must be >= 1");
  if (n_basis < order) throw ConfigError("n_basis must be >= order");
  if (t_max <= 0) throw ConfigError("t_max must be positive");
  BasisSpec spec;
  spec.n_basis = n_basis;
  spec.order = order;
  const int n_break = n_basis - order + 2;  // endpoints included
  spec.breakpoints = Vector::LinSpaced(n_break, 0.0, t_max);
  return spec;
}

bool BasisSpec::operator==(const BasisSpec& other) const {
  return n_basis == other.n_basis && order == other.order &&
         breakpoints.size() == other.breakpoints.size() &&
         breakpoints == other.breakpoints;
}

Basis::Basis(BasisSpec spec) : spec_(std::move(spec)) {
  const auto& bp = spec_.breakpoints;
  if (bp.size() < 2) throw ConfigError("basis needs at least two breakpoints");
  for (Index i = 1; i < bp.size(); ++i) {
    if (bp[i] <= bp[i - 1]) throw ConfigError("breakpoints must be strictly increasing");
  }
  if (bp[0] != 0.0) throw ConfigError("breakpoints must start at 0");
  if (spec_.n_basis != static_cast<int>(bp.size()) - 2 + spec_.order) {
    throw ConfigError("n_basis must equal interior breakpoints + order");
  }

  const int order = spec_.order;
  knots_.resize(bp.size() + 2 * (order - 1));
  for (int i = 0; i < order; ++i) {
    knots_[i] = bp[0];
    knots_[knots_.size() - 1 - i] = bp[bp.size() - 1];
  }
  knots_.segment(order, bp.size() - 2) = bp.segment(1, bp.size() - 2);
}

void Basis::evaluate_local(Scalar x, Index& first, Vector& values) const {
  const int order = spec_.order;
  const Index n_knots = knots_.size();
  const Scalar lo = knots_[order - 1];
  const Scalar hi = knots_[n_knots - order];
  if (x < lo || x > hi) {
    throw InvalidInput("abscissa " + std::to_string(x) + " outside [0, " +
                       std::to_string(hi) + "]");
  }

  // Knot span index i with knots[i] <= x < knots[i+1]; x == t_max maps
  // into the last non-empty span.
  Index i;
  if (x >= hi) {
    i = n_knots - order - 1;
  } else {
    const Scalar* begin = knots_.data() + order - 1;
    const Scalar* end = knots_.data() + n_knots - order;
    i = (std::upper_bound(begin, end, x) - knots_.data()) - 1;
  }
  first = i - (order - 1);

  values.resize(order);
  values[0] = 1.0;
  Vector left(order), right(order);
  for (int j = 1; j < order; ++j) {
    left[j] = x - knots_[i + 1 - j];
    right[j] = knots_[i + j] - x;
    Scalar saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const Scalar denom = right[r + 1] + left[j - r];
      const Scalar temp = values[r] / denom;
      values[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    values[j] = saved;
  }
}

Vector Basis::evaluate_row(Scalar x) const {
  Vector row = Vector::Zero(size());
  Index first;
  Vector local;
  evaluate_local(x, first, local);
  row.segment(first, spec_.order) = local;
  return row;
}

Matrix Basis::design(const Eigen::Ref<const Vector>& grid) const {
  Matrix d = Matrix::Zero(grid.size(), size());
  Index first;
  Vector local;
  for (Index g = 0; g < grid.size(); ++g) {
    evaluate_local(grid[g], first, local);
    d.row(g).segment(first, spec_.order) = local;
  }
  return d;
}

Matrix Basis::gram() const {
  const auto& bp = spec_.breakpoints;
  Matrix g = Matrix::Zero(size(), size());
  Index first;
  Vector local;
  for (Index seg = 0; seg + 1 < bp.size(); ++seg) {
    const Scalar a = bp[seg];
    const Scalar b = bp[seg + 1];
    // Simpson panels at 4x the epoch resolution, with a floor so short
    // segments still integrate the degree-6 products to ~1e-8 relative.
    Index n_sub = 2 * static_cast<Index>(std::ceil(2.0 * (b - a)));
    n_sub = std::max<Index>(n_sub, 128);
    const Scalar h = (b - a) / static_cast<Scalar>(n_sub);
    for (Index s = 0; s <= n_sub; ++s) {
      const Scalar x = (s == n_sub) ? b : a + h * static_cast<Scalar>(s);
      Scalar w = (s == 0 || s == n_sub) ? 1.0 : (s % 2 == 1 ? 4.0 : 2.0);
      w *= h / 3.0;
      evaluate_local(x, first, local);
      for (int r = 0; r < spec_.order; ++r) {
        for (int c = 0; c <= r; ++c) {
          g(first + r, first + c) += w * local[r] * local[c];
        }
      }
    }
  }
  g = g.selfadjointView<Eigen::Lower>();
  return g;
}

Fitter::Fitter(BasisSpec spec, const Eigen::Ref<const Vector>& grid)
    : basis_(std::move(spec)), grid_(grid) {
  design_ = basis_.design(grid_);
  qr_.compute(design_);
  if (qr_.rank() < basis_.size()) {
    throw FitError("rank-deficient design: " + std::to_string(basis_.size()) +
                   " basis functions on " + std::to_string(grid_.size()) +
                   " abscissae (rank " + std::to_string(qr_.rank()) + ")");
  }
}

Vector Fitter::fit(const Eigen::Ref<const Vector>& y) const {
  if (y.size() != grid_.size()) {
    throw InvalidInput("curve length " + std::to_string(y.size()) +
                       " does not match fitting grid " + std::to_string(grid_.size()));
  }
  return qr_.solve(y);
}

Vector evaluate(const Basis& basis, const Eigen::Ref<const Vector>& coeffs,
                const Eigen::Ref<const Vector>& grid) {
  if (coeffs.size() != basis.size()) {
    throw InvalidInput("coefficient length does not match basis size");
  }
  Vector out(grid.size());
  Index first;
  Vector local;
  for (Index g = 0; g < grid.size(); ++g) {
    basis.evaluate_local(grid[g], first, local);
    out[g] = coeffs.segment(first, basis.spec().order).dot(local);
  }
  return out;
}

Vector epoch_grid(Index t_len) {
  return Vector::LinSpaced(t_len, 1.0, static_cast<Scalar>(t_len));
}

}  // namespace stepfda::bspline
