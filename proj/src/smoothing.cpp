#include "stepfda/smoothing.hpp"

namespace stepfda::smoothing {

namespace {

const Vector& triple_curve(const features::FeatureTriple& ft, int k) {
  switch (k) {
    case 0: return ft.s_curve;
    case 1: return ft.i_curve;
    default: return ft.p_curve;
  }
}

Vector& triple_curve(features::FeatureTriple& ft, int k) {
  switch (k) {
    case 0: return ft.s_curve;
    case 1: return ft.i_curve;
    default: return ft.p_curve;
  }
}

}  // namespace

std::array<Scalar, kNumVariables> standardize(std::vector<features::FeatureTriple>& triples) {
  if (triples.empty()) throw ValidationError("standardize: no days");
  std::array<Scalar, kNumVariables> scale{1, 1, 1};
  for (int k = 0; k < kNumVariables; ++k) {
    Scalar mean_max = 0;
    bool all_zero = true;
    for (const auto& ft : triples) {
      const Vector& curve = triple_curve(ft, k);
      mean_max += curve.maxCoeff();
      if (!curve.isZero(0.0)) all_zero = false;
    }
    mean_max /= static_cast<Scalar>(triples.size());
    scale[k] = (all_zero || mean_max <= 0) ? 1.0 : mean_max;
    if (scale[k] != 1.0) {
      for (auto& ft : triples) triple_curve(ft, k) /= scale[k];
    }
  }
  return scale;
}

SmoothedDataset smooth(const std::vector<features::FeatureTriple>& triples,
                       const std::array<bspline::BasisSpec, kNumVariables>& specs,
                       const std::array<Scalar, kNumVariables>& scale) {
  if (triples.empty()) throw ValidationError("smooth: no days");
  const Index n = static_cast<Index>(triples.size());
  const Index t_len = triples.front().s_curve.size();
  const Vector grid = bspline::epoch_grid(t_len);

  SmoothedDataset out;
  out.basis = specs;
  out.scale = scale;
  for (int k = 0; k < kNumVariables; ++k) {
    const bspline::Fitter fitter(specs[k], grid);
    out.gram[k] = fitter.basis().gram();
    Matrix& coeffs = out.coefficients[k];
    coeffs.resize(n, specs[k].n_basis);
    for (Index i = 0; i < n; ++i) {
      coeffs.row(i) = fitter.fit(triple_curve(triples[static_cast<std::size_t>(i)], k)).transpose();
    }
  }
  return out;
}

SmoothedDataset smooth_dataset(std::vector<features::FeatureTriple> triples,
                               const std::array<int, kNumVariables>& n_basis) {
  if (triples.empty()) throw ValidationError("smooth_dataset: no days");
  const Scalar t_max = static_cast<Scalar>(triples.front().s_curve.size());
  std::array<bspline::BasisSpec, kNumVariables> specs;
  for (int k = 0; k < kNumVariables; ++k) {
    specs[k] = bspline::BasisSpec::uniform(t_max, n_basis[static_cast<std::size_t>(k)]);
  }
  const auto scale = standardize(triples);
  return smooth(triples, specs, scale);
}

}  // namespace stepfda::smoothing
