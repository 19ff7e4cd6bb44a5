#include "stepfda/mfpca.hpp"

#include <json.hpp>

#include <fstream>

namespace stepfda::mfpca {

namespace {

constexpr Scalar kEigenvalueFloor = 1e-12;

/// Symmetric matrix powers via eigendecomposition with a floor on the
/// eigenvalues; retries once with jitter when the matrix is not PSD.
std::pair<Matrix, Matrix> sqrt_and_inv_sqrt(const Matrix& w) {
  Matrix work = w;
  for (int attempt = 0; attempt < 2; ++attempt) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(work);
    if (es.info() != Eigen::Success) throw FitError("Gram eigendecomposition failed");
    const Vector& d = es.eigenvalues();
    if (d[0] < -1e-8 * std::abs(d[d.size() - 1])) {
      // Not PSD beyond roundoff; jitter the diagonal once.
      if (attempt == 0) {
        work.diagonal().array() += 1e-10 * work.diagonal().mean();
        continue;
      }
      throw FitError("Gram matrix is not positive semidefinite");
    }
    Vector sq = d.cwiseMax(kEigenvalueFloor).cwiseSqrt();
    Matrix half = es.eigenvectors() * sq.asDiagonal() * es.eigenvectors().transpose();
    Matrix inv_half =
        es.eigenvectors() * sq.cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
    return {half, inv_half};
  }
  throw FitError("unreachable");
}

Matrix stack_centered(const SmoothedDataset& data,
                      const std::array<Vector, kNumVariables>& means) {
  const Index n = data.n_days();
  Matrix c(n, data.total_basis());
  Index off = 0;
  for (int k = 0; k < kNumVariables; ++k) {
    const Matrix& ck = data.coefficients[k];
    c.middleCols(off, ck.cols()) = ck.rowwise() - means[k].transpose();
    off += ck.cols();
  }
  return c;
}

Matrix block_gram(const SmoothedDataset& data) {
  Matrix w = Matrix::Zero(data.total_basis(), data.total_basis());
  Index off = 0;
  for (int k = 0; k < kNumVariables; ++k) {
    const Index r = data.coefficients[k].cols();
    w.block(off, off, r, r) = data.gram[k];
    off += r;
  }
  return w;
}

}  // namespace

Index MfpcaModel::block_offset(int k) const {
  Index off = 0;
  for (int j = 0; j < k; ++j) off += basis[j].n_basis;
  return off;
}

Eigen::Block<const Matrix> MfpcaModel::eigen_block(int k) const {
  return eigen_coeffs.block(block_offset(k), 0, basis[k].n_basis, n_components);
}

MfpcaModel fit(const SmoothedDataset& data, Scalar variance_threshold) {
  const Index n = data.n_days();
  if (n < 2) {
    throw InsufficientData("MFPCA needs at least 2 days, got " + std::to_string(n));
  }
  if (variance_threshold <= 0 || variance_threshold > 1) {
    throw ConfigError("variance threshold must lie in (0, 1]");
  }

  MfpcaModel model;
  model.basis = data.basis;
  model.scale = data.scale;
  model.gram = data.gram;
  for (int k = 0; k < kNumVariables; ++k) {
    model.mean_coeffs[k] = data.coefficients[k].colwise().mean().transpose();
  }

  const Matrix centered = stack_centered(data, model.mean_coeffs);
  const Matrix w = block_gram(data);
  const auto [w_half, w_inv_half] = sqrt_and_inv_sqrt(w);

  const Matrix m =
      w_half * (centered.transpose() * centered) * w_half / static_cast<Scalar>(n - 1);
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  if (es.info() != Eigen::Success) throw FitError("covariance eigendecomposition failed");

  const Index r_all = m.rows();
  Vector lambda(r_all);
  Matrix u(r_all, r_all);
  for (Index r = 0; r < r_all; ++r) {  // ascending -> descending
    const Index src = r_all - 1 - r;
    lambda[r] = std::max<Scalar>(es.eigenvalues()[src], 0.0);
    u.col(r) = es.eigenvectors().col(src);
  }

  model.total_variance = lambda.sum();
  if (model.total_variance <= 1e-14) {
    throw DegenerateVariance("dataset carries no variance after centering");
  }

  const Vector cumulative = [&] {
    Vector c(r_all);
    Scalar acc = 0;
    for (Index r = 0; r < r_all; ++r) {
      acc += lambda[r];
      c[r] = acc / model.total_variance;
    }
    return c;
  }();

  Index keep = r_all;
  for (Index r = 0; r < r_all; ++r) {
    if (cumulative[r] >= variance_threshold - 1e-12) {
      keep = r + 1;
      break;
    }
  }

  model.n_components = keep;
  model.eigenvalues = lambda.head(keep);
  model.explained = cumulative.head(keep);
  model.eigen_coeffs = w_inv_half * u.leftCols(keep);
  for (Index r = 0; r < keep; ++r) {
    if (model.eigen_coeffs.col(r).sum() < 0) model.eigen_coeffs.col(r) *= -1.0;
  }
  return model;
}

Matrix project(const MfpcaModel& model, const SmoothedDataset& data) {
  for (int k = 0; k < kNumVariables; ++k) {
    if (!(data.basis[k] == model.basis[k])) {
      throw InvalidInput("dataset basis does not match the model basis (variable " +
                         std::to_string(k + 1) + ")");
    }
  }
  const Matrix centered = stack_centered(data, model.mean_coeffs);
  const Matrix w = block_gram(data);
  return centered * w * model.eigen_coeffs;
}

std::array<Matrix, kNumVariables> reconstruct(const MfpcaModel& model,
                                              const Eigen::Ref<const Matrix>& scores,
                                              const Eigen::Ref<const Vector>& grid) {
  if (scores.cols() > model.n_components) {
    throw InvalidInput("score width exceeds the model's component count");
  }
  std::array<Matrix, kNumVariables> out;
  for (int k = 0; k < kNumVariables; ++k) {
    const bspline::Basis basis(model.basis[k]);
    const Matrix design = basis.design(grid);                       // len x R_k
    const Vector mean_curve = design * model.mean_coeffs[k];        // len
    const Matrix eigen_curves =
        design * model.eigen_block(k).leftCols(scores.cols());     // len x r
    out[k] = (scores * eigen_curves.transpose()).rowwise() + mean_curve.transpose();
  }
  return out;
}

namespace {

nlohmann::json to_json(const Vector& v) {
  return std::vector<Scalar>(v.data(), v.data() + v.size());
}

nlohmann::json to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    rows.push_back(std::vector<Scalar>(m.row(i).begin(), m.row(i).end()));
  }
  return rows;
}

Vector vector_from_json(const nlohmann::json& j) {
  Vector v(static_cast<Index>(j.size()));
  for (Index i = 0; i < v.size(); ++i) v[i] = j[static_cast<std::size_t>(i)].get<Scalar>();
  return v;
}

Matrix matrix_from_json(const nlohmann::json& j) {
  const Index rows = static_cast<Index>(j.size());
  if (rows == 0) return Matrix();
  const Index cols = static_cast<Index>(j[0].size());
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index c = 0; c < cols; ++c) m(i, c) = j[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)].get<Scalar>();
  }
  return m;
}

nlohmann::json basis_to_json(const bspline::BasisSpec& spec) {
  return {{"n_basis", spec.n_basis},
          {"order", spec.order},
          {"breakpoints", to_json(spec.breakpoints)}};
}

bspline::BasisSpec basis_from_json(const nlohmann::json& j) {
  bspline::BasisSpec spec;
  spec.n_basis = j.at("n_basis").get<int>();
  spec.order = j.at("order").get<int>();
  spec.breakpoints = vector_from_json(j.at("breakpoints"));
  return spec;
}

}  // namespace

void save_model(const MfpcaModel& model, const std::filesystem::path& path) {
  nlohmann::json j;
  for (int k = 0; k < kNumVariables; ++k) {
    j["basis"].push_back(basis_to_json(model.basis[k]));
    j["scale"].push_back(model.scale[k]);
    j["gram"].push_back(to_json(model.gram[k]));
    j["mean_coeffs"].push_back(to_json(model.mean_coeffs[k]));
  }
  j["eigen_coeffs"] = to_json(model.eigen_coeffs);
  j["eigenvalues"] = to_json(model.eigenvalues);
  j["explained"] = to_json(model.explained);
  j["total_variance"] = model.total_variance;
  j["n_components"] = model.n_components;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

MfpcaModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  MfpcaModel model;
  try {
    for (int k = 0; k < kNumVariables; ++k) {
      model.basis[k] = basis_from_json(j.at("basis").at(static_cast<std::size_t>(k)));
      model.scale[k] = j.at("scale").at(static_cast<std::size_t>(k)).get<Scalar>();
      model.gram[k] = matrix_from_json(j.at("gram").at(static_cast<std::size_t>(k)));
      model.mean_coeffs[k] = vector_from_json(j.at("mean_coeffs").at(static_cast<std::size_t>(k)));
    }
    model.eigen_coeffs = matrix_from_json(j.at("eigen_coeffs"));
    model.eigenvalues = vector_from_json(j.at("eigenvalues"));
    model.explained = vector_from_json(j.at("explained"));
    model.total_variance = j.at("total_variance").get<Scalar>();
    model.n_components = j.at("n_components").get<Index>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return model;
}

}  // namespace stepfda::mfpca
