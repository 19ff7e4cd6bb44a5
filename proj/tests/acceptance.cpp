// Acceptance suite: every release criterion as one pass/fail line, at
// the tolerances pinned below. Run all criteria (no arguments) or one
// (--criterion N). Exit code 0 iff every criterion that ran passed.

#include "stepfda/pipeline.hpp"

#include "oracles.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

using namespace stepfda;
namespace fs = std::filesystem;

namespace {

struct CriterionResult {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

pipeline::BenchmarkSummary benchmark_cell(simulation::Family family, clustering::Method method,
                                          int replicates, std::uint64_t seed) {
  const auto table = pipeline::run_benchmark({family}, {method}, replicates, seed);
  return table.summaries().at(0);
}

// --- criteria 1-5: benchmark reproduction ---------------------------------

CriterionResult table_reproduction(simulation::Family family, clustering::Method method,
                                   Scalar ccr_lo, Scalar ccr_hi, Scalar arand_lo) {
  const auto cell = benchmark_cell(family, method, 20, 1);
  const bool ccr_ok = cell.ccr_mean >= ccr_lo && cell.ccr_mean <= ccr_hi;
  const bool arand_ok = cell.arand_mean >= arand_lo;
  std::ostringstream detail;
  detail << simulation::family_name(family) << " x mfpca-" << clustering::method_name(method)
         << ": mean CCR " << fmt(cell.ccr_mean) << " (sd " << fmt(cell.ccr_sd, 3) << ")";
  if (ccr_hi < 1.0 + 1e-9) {
    detail << " in [" << fmt(ccr_lo, 2) << ", " << fmt(ccr_hi, 2) << "]";
  } else {
    detail << " >= " << fmt(ccr_lo, 2);
  }
  if (arand_lo > 0) {
    detail << ", mean aRand " << fmt(cell.arand_mean) << " >= " << fmt(arand_lo, 2);
  }
  return {ccr_ok && arand_ok, detail.str()};
}

CriterionResult criterion_1() {
  return table_reproduction(simulation::Family::step_amount, clustering::Method::pam, 0.95, 1.0,
                            0.90);
}

CriterionResult criterion_2() {
  return table_reproduction(simulation::Family::step_pattern, clustering::Method::pam, 0.95, 1.0,
                            0.90);
}

CriterionResult criterion_3() {
  return table_reproduction(simulation::Family::sinusoidal, clustering::Method::pam, 0.88, 1.0,
                            0.0);
}

CriterionResult criterion_4() {
  return table_reproduction(simulation::Family::doppler, clustering::Method::pam, 0.90, 1.0, 0.0);
}

CriterionResult criterion_5() {
  return table_reproduction(simulation::Family::step_intensity, clustering::Method::kmeans, 0.50,
                            0.75, 0.0);
}

// --- criterion 6: end-to-end CLI on a conforming wide CSV -----------------

#ifndef STEPFDA_CLI_PATH
#define STEPFDA_CLI_PATH "stepfda"
#endif

int run_cli(const std::string& args) {
  const std::string command = std::string(STEPFDA_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

CriterionResult criterion_6() {
  const fs::path dir = fs::temp_directory_path() / "stepfda_acceptance_cli";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const fs::path data = dir / "data.csv";
  const fs::path run_dir = dir / "run";
  std::ostringstream detail;

  // A conforming wide CSV with subject ids, produced by the simulator.
  simulation::SimSpec spec = simulation::SimSpec::defaults(simulation::Family::step_amount, 11);
  spec.n_per_group = {40, 40, 40};
  auto sim = simulation::generate(spec);
  ingest::DayMatrix dm = ingest::from_integer_curves(sim.curves, sim.day_ids);
  for (std::size_t i = 0; i < dm.days.size(); ++i) {
    dm.days[i].subject_id = "subject" + std::to_string(i % 5);
  }
  ingest::write_day_matrix(dm, data);

  if (run_cli("ingest-check " + data.string()) != 0) {
    return {false, "ingest-check failed on a conforming file"};
  }
  if (run_cli("cluster " + data.string() + " --k 7 --method kmeans --seed 3 --plots --out-dir " +
              run_dir.string()) != 0) {
    return {false, "cluster run failed"};
  }

  // Full report: labels for every day, sizes summing to N, a loadable
  // model, plot files.
  const auto labels = pipeline::read_labels_csv(run_dir / "labels.csv");
  if (labels.size() != static_cast<std::size_t>(dm.n())) {
    return {false, "labels.csv row count mismatch"};
  }
  nlohmann::json report;
  {
    std::ifstream in(run_dir / "report.json");
    if (!in) return {false, "report.json missing"};
    in >> report;
  }
  Index size_sum = 0;
  for (const auto& s : report.at("cluster_sizes")) size_sum += s.get<Index>();
  if (size_sum != dm.n()) return {false, "cluster sizes do not sum to N"};
  if (report.at("k").get<int>() != 7) return {false, "report k mismatch"};

  const auto model = mfpca::load_model(run_dir / "model.json");
  if (model.n_components < 1) return {false, "model retains no components"};
  const Scalar explained = model.explained[model.n_components - 1];
  if (explained < 0.90 - 1e-9) return {false, "retained components explain < 90%"};

  for (const char* name : {"cluster_means.csv", "cluster_means.svg",
                           "eigenfunctions_cumulative_sum.csv", "heatmap.csv"}) {
    if (!fs::exists(run_dir / name)) {
      return {false, std::string("missing plot file ") + name};
    }
  }

  // Validation errors exit with code 2.
  const fs::path bad = dir / "bad.csv";
  {
    std::ofstream out(bad);
    out << "day_id,subject_id,t0001,t0002\nd1,,3,-4\n";
  }
  if (run_cli("ingest-check " + bad.string()) != 2) {
    return {false, "negative count did not exit with code 2"};
  }

  detail << "CLI ingest + cluster --k 7 on " << dm.n() << " days: full report, "
         << model.n_components << " components (" << fmt(explained * 100, 1)
         << "% variance), plots, exit codes OK";
  fs::remove_all(dir);
  return {true, detail.str()};
}

// --- criterion 7: coefficient-space vs dense-grid eigenproblem ------------

CriterionResult criterion_7() {
  // Synthetic functional data with a planted, well-separated spectrum.
  const Index n = 50;
  const Index t_len = 200;
  const int n_basis = 30;
  const std::vector<Scalar> sds{8.0, 6.0, 4.0, 3.0, 2.0, 1.5, 1.0, 0.7, 0.5, 0.35};

  smoothing::SmoothedDataset data;
  for (int k = 0; k < smoothing::kNumVariables; ++k) {
    data.basis[k] = bspline::BasisSpec::uniform(static_cast<Scalar>(t_len), n_basis);
    data.gram[k] = bspline::Basis(data.basis[k]).gram();
    data.scale[k] = 1.0;
  }
  Matrix w = Matrix::Zero(3 * n_basis, 3 * n_basis);
  for (int k = 0; k < 3; ++k) {
    w.block(k * n_basis, k * n_basis, n_basis, n_basis) = data.gram[k];
  }
  Rng rng(123);
  const auto m = static_cast<Index>(sds.size());
  Matrix factors(3 * n_basis, m);
  for (Index c = 0; c < m; ++c) {
    Vector f(3 * n_basis);
    for (Index i = 0; i < f.size(); ++i) f[i] = rng.normal(0.0, 1.0);
    for (Index prev = 0; prev < c; ++prev) {
      f -= factors.col(prev) * (factors.col(prev).transpose() * w * f)(0, 0);
    }
    f /= std::sqrt((f.transpose() * w * f)(0, 0));
    factors.col(c) = f;
  }
  Matrix modes(n, m);
  for (Index i = 0; i < n; ++i) {
    for (Index c = 0; c < m; ++c) modes(i, c) = rng.normal(0.0, 1.0);
  }
  const Eigen::RowVectorXd mode_means = modes.colwise().mean();
  modes.rowwise() -= mode_means;
  for (Index c = 0; c < m; ++c) {
    for (Index prev = 0; prev < c; ++prev) {
      modes.col(c) -= modes.col(prev) *
                      (modes.col(prev).dot(modes.col(c)) / modes.col(prev).squaredNorm());
    }
    modes.col(c) *=
        sds[static_cast<std::size_t>(c)] / std::sqrt(modes.col(c).squaredNorm() / Scalar(n - 1));
  }
  const Matrix coeffs = modes * factors.transpose();
  for (int k = 0; k < 3; ++k) data.coefficients[k] = coeffs.middleCols(k * n_basis, n_basis);

  const auto model = mfpca::fit(data, 1.0);

  // Dense-grid oracle: discretize the same functions on an 8x-refined
  // grid with Simpson weights and eigendecompose the grid covariance.
  const Index n_points = t_len * 8 + 1;
  const Vector grid = Vector::LinSpaced(n_points, 0.0, static_cast<Scalar>(t_len));
  const Vector w_seg = oracles::simpson_weights(n_points, static_cast<Scalar>(t_len) / (n_points - 1));
  Matrix values(n, 3 * n_points);
  Vector weights(3 * n_points);
  for (int k = 0; k < 3; ++k) {
    const bspline::Basis basis(data.basis[k]);
    values.middleCols(k * n_points, n_points) =
        data.coefficients[k] * basis.design(grid).transpose();
    weights.segment(k * n_points, n_points) = w_seg;
  }
  const auto oracle = oracles::dense_grid_eig(values, weights);

  Scalar worst_eigenvalue_err = 0;
  Index compared_values = 0;
  for (Index r = 0; r < model.n_components && r < oracle.eigenvalues.size(); ++r) {
    if (model.eigenvalues[r] < 1e-6 * model.eigenvalues[0]) break;
    const Scalar rel =
        std::abs(model.eigenvalues[r] - oracle.eigenvalues[r]) / model.eigenvalues[r];
    worst_eigenvalue_err = std::max(worst_eigenvalue_err, rel);
    ++compared_values;
  }

  // Eigenfunction comparison in the weighted L2 norm, up to sign, for
  // the planted (gap-separated) components.
  Scalar worst_function_err = 0;
  Index compared_functions = 0;
  for (Index r = 0; r < m; ++r) {
    Vector mine(3 * n_points);
    for (int k = 0; k < 3; ++k) {
      const bspline::Basis basis(data.basis[k]);
      mine.segment(k * n_points, n_points) =
          basis.design(grid) * model.eigen_coeffs.col(r).segment(k * n_basis, n_basis);
    }
    const Vector theirs = oracle.eigenfunctions.col(r);
    const Scalar err_plus = std::sqrt(((mine - theirs).array().square() * weights.array()).sum());
    const Scalar err_minus = std::sqrt(((mine + theirs).array().square() * weights.array()).sum());
    worst_function_err = std::max(worst_function_err, std::min(err_plus, err_minus));
    ++compared_functions;
  }

  const bool pass = compared_values >= static_cast<Index>(sds.size()) &&
                    worst_eigenvalue_err <= 1e-4 && worst_function_err <= 1e-3;
  std::ostringstream detail;
  detail << "N=50 T=200: " << compared_values << " eigenvalues within "
         << fmt(worst_eigenvalue_err, 8) << " (<= 1e-4), " << compared_functions
         << " eigenfunctions within L2 " << fmt(worst_function_err, 8) << " (<= 1e-3)";
  return {pass, detail.str()};
}

// --- criterion 8: PAM optimality on tiny instances -------------------------

CriterionResult criterion_8() {
  Rng rng(888);
  int optimal = 0;
  Scalar worst_excess = 0;
  const int trials = 100;
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
    if (result.cost <= best + 1e-9) {
      ++optimal;
    } else if (best > 0) {
      worst_excess = std::max(worst_excess, (result.cost - best) / best);
    }
  }
  const bool pass = optimal >= 95 && worst_excess <= 0.02;
  std::ostringstream detail;
  detail << "optimal in " << optimal << "/100 instances (>= 95), worst excess "
         << fmt(worst_excess * 100, 3) << "% (<= 2%)";
  return {pass, detail.str()};
}

// --- criterion 9: metric correctness ---------------------------------------

CriterionResult criterion_9() {
  bool exact_ok = true;
  exact_ok &= std::abs(evaluation::adjusted_rand({1, 1, 2, 2}, {1, 2, 1, 2}) - (-0.5)) <= 1e-12;
  exact_ok &= std::abs(evaluation::adjusted_rand({1, 1, 2, 2}, {3, 3, 3, 3}) - 0.0) <= 1e-12;
  exact_ok &= std::abs(evaluation::adjusted_rand({1, 1, 2, 2}, {2, 2, 1, 1}) - 1.0) <= 1e-12;
  exact_ok &= evaluation::ccr({1, 1, 2, 2}, {2, 2, 1, 1}) == 1.0;
  exact_ok &= evaluation::ccr({1, 1, 2, 2}, {1, 2, 1, 2}) == 0.5;

  Rng rng(999);
  int invariant_failures = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = static_cast<std::size_t>(rng.uniform_int(2, 50));
    const auto truth = oracles::random_partition(rng, n, 6);
    auto pred = oracles::random_partition(rng, n, 6);
    // Random relabeling of the predicted side.
    const int k = *std::max_element(pred.begin(), pred.end()) + 1;
    std::vector<int> perm(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) perm[static_cast<std::size_t>(i)] = i;
    for (int i = k - 1; i > 0; --i) {
      std::swap(perm[static_cast<std::size_t>(i)],
                perm[static_cast<std::size_t>(rng.uniform_int(0, i))]);
    }
    auto relabeled = pred;
    for (auto& l : relabeled) l = perm[static_cast<std::size_t>(l)];
    if (evaluation::ccr(truth, pred) != evaluation::ccr(truth, relabeled)) ++invariant_failures;
    if (evaluation::adjusted_rand(truth, pred) != evaluation::adjusted_rand(truth, relabeled)) {
      ++invariant_failures;
    }
    if (evaluation::adjusted_rand(truth, pred) != evaluation::adjusted_rand(pred, truth)) {
      ++invariant_failures;
    }
  }
  const bool pass = exact_ok && invariant_failures == 0;
  std::ostringstream detail;
  detail << "hand-derived values " << (exact_ok ? "exact" : "WRONG")
         << "; label-permutation invariance failures " << invariant_failures
         << "/1000 partitions (need 0)";
  return {pass, detail.str()};
}

// --- criterion 10: feature property suite -----------------------------------

CriterionResult criterion_10() {
  Rng rng(1010);
  const int q1 = 8, q2 = 4;
  const Index t_len = 1440;
  int monotone_failures = 0, sorted_failures = 0, block_failures = 0, shift_failures = 0,
      scale_failures = 0;
  const int trials = 1000;
  for (int trial = 0; trial < trials; ++trial) {
    const Vector day = oracles::random_day(rng, t_len);
    const auto ft = features::feature_triple(day, q1, q2);

    for (Index t = 1; t < t_len; ++t) {
      if (ft.s_curve[t] < ft.s_curve[t - 1]) {
        ++monotone_failures;
        break;
      }
    }
    for (Index t = 1; t < t_len; ++t) {
      if (ft.i_curve[t] < ft.i_curve[t - 1]) {
        ++sorted_failures;
        break;
      }
    }
    {
      bool block_ok = true;
      const Index block = t_len / q2;
      for (int b = 0; b < q2 && block_ok; ++b) {
        const Scalar v = ft.p_curve[b * block];
        if (v < 0.0 || v > static_cast<Scalar>(q2)) block_ok = false;
        for (Index t = b * block; t < (b + 1) * block && block_ok; ++t) {
          if (ft.p_curve[t] != v) block_ok = false;
        }
      }
      if (!block_ok) ++block_failures;
    }
    {
      // Circular-shift invariance of the ordered quantile slope,
      // asserted as exact sequence equality.
      const Index shift = rng.uniform_int(1, t_len - 1);
      Vector shifted(t_len);
      for (Index t = 0; t < t_len; ++t) shifted[(t + shift) % t_len] = day[t];
      const Vector i_shifted = features::ordered_quantile_slope(shifted, q1);
      if (!(i_shifted == ft.i_curve)) ++shift_failures;
    }
    {
      const auto doubled = features::feature_triple(day * 2.0, q1, q2);
      const auto tripled = features::feature_triple(day * 3.0, q1, q2);
      const bool ok = doubled.s_curve == ft.s_curve * 2.0 &&
                      doubled.i_curve == ft.i_curve * 2.0 && doubled.p_curve == ft.p_curve &&
                      tripled.s_curve == ft.s_curve * 3.0 &&
                      tripled.i_curve.isApprox(ft.i_curve * 3.0, 1e-12) &&
                      tripled.p_curve == ft.p_curve;
      if (!ok) ++scale_failures;
    }
  }
  const bool pass = monotone_failures == 0 && sorted_failures == 0 && block_failures == 0 &&
                    shift_failures == 0 && scale_failures == 0;
  std::ostringstream detail;
  detail << "over 1000 random days: S monotone fail " << monotone_failures << ", I sorted fail "
         << sorted_failures << ", P block/range fail " << block_failures
         << ", I shift-invariance fail " << shift_failures << ", scaling fail " << scale_failures
         << " (all must be 0)";
  return {pass, detail.str()};
}

// --- criterion 11: gap statistic sanity -------------------------------------

CriterionResult criterion_11() {
  int three_correct = 0, one_correct = 0;
  const int runs = 50;
  for (int run = 0; run < runs; ++run) {
    Rng rng(mix_seed(42, static_cast<std::uint64_t>(run)));
    const Matrix blobs3 = oracles::gaussian_blobs(rng, {{0, 0}, {10, 0}, {0, 10}}, 50, 1.0);
    const auto curve3 = clustering::gap_statistic(blobs3, 6, 20, clustering::Method::kmeans,
                                                  mix_seed(7, static_cast<std::uint64_t>(run)));
    if (curve3.chosen_k == 3) ++three_correct;

    const Matrix blob1 = oracles::gaussian_blobs(rng, {{0, 0}}, 150, 1.0);
    const auto curve1 = clustering::gap_statistic(blob1, 6, 20, clustering::Method::kmeans,
                                                  mix_seed(9, static_cast<std::uint64_t>(run)));
    if (curve1.chosen_k == 1) ++one_correct;
  }
  const bool pass = three_correct >= 45 && one_correct >= 40;
  std::ostringstream detail;
  detail << "three blobs -> K=3 in " << three_correct << "/50 (>= 45), one blob -> K=1 in "
         << one_correct << "/50 (>= 40)";
  return {pass, detail.str()};
}

// --- criterion 12: Q1 sensitivity -------------------------------------------

CriterionResult criterion_12() {
  const auto data =
      simulation::generate(simulation::SimSpec::defaults(simulation::Family::step_pattern, 3));
  pipeline::PipelineConfig config;
  config.k = 4;
  config.seed = 2;
  config.method = clustering::Method::kmeans;
  const auto sweep = pipeline::sensitivity_sweep(data.curves, {4, 6, 8, 12}, config);
  Scalar min_agreement = 1.0;
  for (Index a = 0; a < sweep.pairwise_arand.rows(); ++a) {
    for (Index b = a + 1; b < sweep.pairwise_arand.cols(); ++b) {
      min_agreement = std::min(min_agreement, sweep.pairwise_arand(a, b));
    }
  }
  std::ostringstream detail;
  detail << "step-pattern at K=4, Q1 in {4,6,8,12}: min pairwise aRand " << fmt(min_agreement)
         << " (>= 0.8)";
  return {min_agreement >= 0.8, detail.str()};
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int a = 1; a < argc; ++a) {
    const std::string arg = argv[a];
    if (arg == "--criterion" && a + 1 < argc) only = std::atoi(argv[++a]);
  }

  const std::vector<std::pair<int, std::function<CriterionResult()>>> criteria{
      {1, criterion_1}, {2, criterion_2}, {3, criterion_3}, {4, criterion_4},
      {5, criterion_5}, {6, criterion_6}, {7, criterion_7}, {8, criterion_8},
      {9, criterion_9}, {10, criterion_10}, {11, criterion_11}, {12, criterion_12}};

  bool all_pass = true;
  for (const auto& [number, fn] : criteria) {
    if (only != 0 && number != only) continue;
    const auto start = std::chrono::steady_clock::now();
    CriterionResult result;
    try {
      result = fn();
    } catch (const std::exception& e) {
      result = {false, std::string("exception: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s criterion %2d: %s [%.1f s]\n", result.pass ? "PASS" : "FAIL", number,
                result.detail.c_str(), seconds);
    std::fflush(stdout);
    all_pass &= result.pass;
  }
  return all_pass ? 0 : 1;
}
