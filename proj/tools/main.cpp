// Command-line front end: ingest checks, feature export, model fitting,
// clustering runs, gap-statistic model selection, the simulation
// families, the benchmark table, the Q1 sensitivity sweep, and plot
// emission. Exit codes: 0 success, 2 invalid input, 1 other failures.

#include "stepfda/pipeline.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace stepfda;

namespace {

struct PipelineFlags {
  std::string config_path;
  int q1 = 8;
  int q2 = 4;
  double variance_threshold = 0.90;
  int k = 0;
  std::string method = "pam";
  std::vector<int> n_basis;
  std::uint64_t seed = 1;
  int b_gap = 20;
  int k_max = 10;

  CLI::Option* o_config = nullptr;
  CLI::Option* o_q1 = nullptr;
  CLI::Option* o_q2 = nullptr;
  CLI::Option* o_vt = nullptr;
  CLI::Option* o_k = nullptr;
  CLI::Option* o_method = nullptr;
  CLI::Option* o_nb = nullptr;
  CLI::Option* o_seed = nullptr;
  CLI::Option* o_bgap = nullptr;
  CLI::Option* o_kmax = nullptr;

  void add(CLI::App* cmd) {
    o_config = cmd->add_option("--config", config_path, "JSON config file (flags override it)");
    o_q1 = cmd->add_option("--q1", q1, "quantile count for the intensity curve (default 8)");
    o_q2 = cmd->add_option("--q2", q2, "quantile count for the pattern curve (default 4)");
    o_vt = cmd->add_option("--variance-threshold", variance_threshold,
                           "explained-variance cutoff for retained components (default 0.90)");
    o_k = cmd->add_option("--k", k, "fixed number of clusters (default: gap-selected)");
    o_method = cmd->add_option("--method", method, "clustering method: kmeans or pam (default pam)");
    o_nb = cmd->add_option("--n-basis", n_basis,
                           "B-spline basis size, one value or one per variable (default 30)");
    o_seed = cmd->add_option("--seed", seed, "RNG seed (default 1)");
    o_bgap = cmd->add_option("--b-gap", b_gap, "gap-statistic reference replicates (default 20)");
    o_kmax = cmd->add_option("--k-max", k_max, "largest candidate K for the gap statistic");
  }

  pipeline::PipelineConfig resolve() const {
    pipeline::PipelineConfig config;
    if (o_config->count() > 0) config = pipeline::load_config(config_path);
    if (o_q1->count() > 0) config.q1 = q1;
    if (o_q2->count() > 0) config.q2 = q2;
    if (o_vt->count() > 0) config.variance_threshold = variance_threshold;
    if (o_k->count() > 0) config.k = k;
    if (o_method->count() > 0) config.method = clustering::method_from_name(method);
    if (o_nb->count() > 0) {
      if (n_basis.size() == 1) {
        config.n_basis = {n_basis[0], n_basis[0], n_basis[0]};
      } else if (n_basis.size() == 3) {
        std::copy(n_basis.begin(), n_basis.end(), config.n_basis.begin());
      } else {
        throw ConfigError("--n-basis takes 1 or 3 values");
      }
    }
    if (o_seed->count() > 0) config.seed = seed;
    if (o_bgap->count() > 0) config.b_gap = b_gap;
    if (o_kmax->count() > 0) config.k_max = k_max;
    return config;
  }
};

void write_feature_csv(const fs::path& path, const std::vector<std::string>& day_ids,
                       const std::vector<features::FeatureTriple>& triples, int which) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  const Index t_len = triples.front().s_curve.size();
  out << "day_id";
  for (Index j = 1; j <= t_len; ++j) {
    char col[24];
    std::snprintf(col, sizeof(col), "t%04lld", static_cast<long long>(j));
    out << ',' << col;
  }
  out << '\n';
  char buf[32];
  for (std::size_t i = 0; i < triples.size(); ++i) {
    const Vector& curve = which == 0   ? triples[i].s_curve
                          : which == 1 ? triples[i].i_curve
                                       : triples[i].p_curve;
    out << day_ids[i];
    for (Index j = 0; j < t_len; ++j) {
      std::snprintf(buf, sizeof(buf), "%.10g", curve[j]);
      out << ',' << buf;
    }
    out << '\n';
  }
}

std::vector<int> read_truth_labels(const fs::path& path, const std::vector<std::string>& day_ids) {
  const auto rows = pipeline::read_labels_csv(path);
  if (rows.size() != day_ids.size()) {
    throw ValidationError("truth file has " + std::to_string(rows.size()) + " rows, expected " +
                          std::to_string(day_ids.size()));
  }
  std::vector<int> truth(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].first != day_ids[i]) {
      throw ValidationError("truth row " + std::to_string(i + 2) + " is for '" + rows[i].first +
                            "', expected '" + day_ids[i] + "'");
    }
    truth[i] = rows[i].second;
  }
  return truth;
}

int run(int argc, char** argv) {
  CLI::App app{"Day-level step-count clustering via functional features and multivariate FPCA"};
  app.require_subcommand(1);

  // ingest-check
  std::string data_path;
  int check_q2 = 4;
  auto* ingest_cmd = app.add_subcommand("ingest-check", "validate a wide-CSV step file");
  ingest_cmd->add_option("data", data_path, "wide CSV file")->required();
  auto* check_q2_opt = ingest_cmd->add_option("--q2", check_q2, "also check grid divisibility");

  // features
  std::string feat_data, feat_out_dir = ".";
  int feat_q1 = 8, feat_q2 = 4;
  auto* feat_cmd = app.add_subcommand("features", "export the three feature curves as CSV");
  feat_cmd->add_option("data", feat_data, "wide CSV file")->required();
  feat_cmd->add_option("--q1", feat_q1, "intensity quantile count (default 8)");
  feat_cmd->add_option("--q2", feat_q2, "pattern quantile count (default 4)");
  feat_cmd->add_option("--out-dir", feat_out_dir, "output directory (default .)");

  // fit
  std::string fit_data, fit_model_out = "model.json", fit_scores_out = "scores.csv",
              fit_coeffs_dir;
  PipelineFlags fit_flags;
  auto* fit_cmd = app.add_subcommand("fit", "fit the MFPCA model and export scores");
  fit_cmd->add_option("data", fit_data, "wide CSV file")->required();
  fit_cmd->add_option("--model-out", fit_model_out, "model JSON path (default model.json)");
  fit_cmd->add_option("--scores-out", fit_scores_out, "scores CSV path (default scores.csv)");
  auto* fit_coeffs_opt = fit_cmd->add_option(
      "--coeffs-out-dir", fit_coeffs_dir, "also export per-variable basis coefficients as CSV");
  fit_flags.add(fit_cmd);

  // cluster
  std::string cl_data, cl_out_dir = "run", cl_truth;
  bool cl_plots = false;
  PipelineFlags cl_flags;
  auto* cl_cmd = app.add_subcommand("cluster", "run the full pipeline and write a report");
  cl_cmd->add_option("data", cl_data, "wide CSV file")->required();
  cl_cmd->add_option("--out-dir", cl_out_dir, "output directory (default run/)");
  auto* cl_truth_opt = cl_cmd->add_option("--truth", cl_truth, "truth CSV (day_id,group) for metrics");
  cl_cmd->add_flag("--plots", cl_plots, "also emit plot files into out-dir");
  cl_flags.add(cl_cmd);

  // gap
  std::string gap_data, gap_out = "gap.csv";
  PipelineFlags gap_flags;
  auto* gap_cmd = app.add_subcommand("gap", "gap-statistic model selection curve");
  gap_cmd->add_option("data", gap_data, "wide CSV file")->required();
  gap_cmd->add_option("--out", gap_out, "gap curve CSV path (default gap.csv)");
  gap_flags.add(gap_cmd);

  // simulate
  std::string sim_family = "step-amount", sim_out = "sim.csv", sim_truth_out, sim_spec_out,
              sim_spec_in;
  std::vector<int> sim_n;
  std::uint64_t sim_seed = 1;
  auto* sim_cmd = app.add_subcommand("simulate", "generate a synthetic benchmark dataset");
  sim_cmd->add_option("--family", sim_family,
                      "step-amount | step-intensity | step-pattern | sinusoidal | doppler");
  auto* sim_n_opt = sim_cmd->add_option("--n-per-group", sim_n,
                                        "curves per group (one value for all groups)");
  sim_cmd->add_option("--seed", sim_seed, "RNG seed (default 1)");
  sim_cmd->add_option("--out", sim_out, "dataset CSV path (default sim.csv)");
  sim_cmd->add_option("--truth-out", sim_truth_out, "truth CSV path (default <out>.truth.csv)");
  sim_cmd->add_option("--spec-out", sim_spec_out, "also save the spec as JSON");
  auto* sim_spec_opt = sim_cmd->add_option("--spec", sim_spec_in, "load a spec JSON instead of flags");

  // benchmark
  std::vector<std::string> bm_families{"step-amount", "step-intensity", "step-pattern",
                                       "sinusoidal", "doppler"};
  std::vector<std::string> bm_methods{"kmeans", "pam"};
  int bm_replicates = 20;
  std::uint64_t bm_seed = 1;
  std::string bm_out = "benchmark.csv";
  auto* bm_cmd = app.add_subcommand("benchmark", "replicate the simulation benchmark table");
  bm_cmd->add_option("--families", bm_families, "families to run (default: all five)");
  bm_cmd->add_option("--methods", bm_methods, "clustering methods (default: kmeans pam)");
  bm_cmd->add_option("--replicates", bm_replicates, "replicates per cell (default 20)");
  bm_cmd->add_option("--seed", bm_seed, "master seed (default 1)");
  bm_cmd->add_option("--out", bm_out, "per-replicate CSV path (default benchmark.csv)");

  // sweep-q1
  std::string sw_data, sw_out = "sweep.csv";
  std::vector<int> sw_values{4, 6, 8, 12};
  PipelineFlags sw_flags;
  auto* sw_cmd = app.add_subcommand("sweep-q1", "clustering agreement across Q1 values");
  sw_cmd->add_option("data", sw_data, "wide CSV file")->required();
  sw_cmd->add_option("--q1-values", sw_values, "Q1 values to compare (default 4 6 8 12)");
  sw_cmd->add_option("--out", sw_out, "pairwise agreement CSV (default sweep.csv)");
  sw_flags.add(sw_cmd);

  // plots
  std::string pl_data, pl_labels, pl_model, pl_out_dir = "plots";
  auto* pl_cmd = app.add_subcommand("plots", "emit plot files from a finished run");
  pl_cmd->add_option("--data", pl_data, "wide CSV file")->required();
  pl_cmd->add_option("--labels", pl_labels, "labels CSV from a cluster run")->required();
  pl_cmd->add_option("--model", pl_model, "model JSON from a fit or cluster run")->required();
  pl_cmd->add_option("--out-dir", pl_out_dir, "output directory (default plots/)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;  // bad command line is a validation failure
  }

  if (ingest_cmd->parsed()) {
    const auto dm = ingest::read_day_matrix(data_path);
    if (check_q2_opt->count() > 0) ingest::validate_grid(dm, check_q2);
    std::size_t subjects = 0;
    for (const auto& d : dm.days) subjects += d.subject_id.empty() ? 0 : 1;
    std::cout << "ok: " << dm.n() << " days, T=" << dm.t() << ", " << subjects
              << " rows with subject ids\n";
    return 0;
  }

  if (feat_cmd->parsed()) {
    const auto dm = ingest::read_day_matrix(feat_data);
    ingest::validate_grid(dm, feat_q2);
    const auto triples = features::feature_triples(dm.to_curves(), feat_q1, feat_q2);
    fs::create_directories(feat_out_dir);
    const auto ids = dm.day_ids();
    write_feature_csv(fs::path(feat_out_dir) / "s_curves.csv", ids, triples, 0);
    write_feature_csv(fs::path(feat_out_dir) / "i_curves.csv", ids, triples, 1);
    write_feature_csv(fs::path(feat_out_dir) / "p_curves.csv", ids, triples, 2);
    std::cout << "wrote s_curves.csv, i_curves.csv, p_curves.csv to " << feat_out_dir << "\n";
    return 0;
  }

  if (fit_cmd->parsed()) {
    const auto config = fit_flags.resolve();
    const auto dm = ingest::read_day_matrix(fit_data);
    ingest::validate_grid(dm, config.q2);
    auto triples = features::feature_triples(dm.to_curves(), config.q1, config.q2);
    const auto smoothed = smoothing::smooth_dataset(std::move(triples), config.n_basis);
    const auto model = mfpca::fit(smoothed, config.variance_threshold);
    const Matrix scores = mfpca::project(model, smoothed);
    mfpca::save_model(model, fit_model_out);
    pipeline::write_scores_csv(dm.day_ids(), scores, fit_scores_out);
    if (fit_coeffs_opt->count() > 0) {
      fs::create_directories(fit_coeffs_dir);
      static const char* names[] = {"coeffs_cumulative_sum.csv", "coeffs_ordered_quantile_slope.csv",
                                    "coeffs_mean_score.csv"};
      const auto ids = dm.day_ids();
      for (int k = 0; k < smoothing::kNumVariables; ++k) {
        std::ofstream out(fs::path(fit_coeffs_dir) / names[k]);
        out << "day_id";
        for (Index r = 1; r <= smoothed.coefficients[k].cols(); ++r) out << ",b" << r;
        out << '\n';
        char buf[32];
        for (Index i = 0; i < smoothed.coefficients[k].rows(); ++i) {
          out << ids[static_cast<std::size_t>(i)];
          for (Index r = 0; r < smoothed.coefficients[k].cols(); ++r) {
            std::snprintf(buf, sizeof(buf), "%.12g", smoothed.coefficients[k](i, r));
            out << ',' << buf;
          }
          out << '\n';
        }
      }
    }
    std::cout << "retained " << model.n_components << " components ("
              << model.explained[model.n_components - 1] * 100 << "% of variance)\n";
    return 0;
  }

  if (cl_cmd->parsed()) {
    const auto config = cl_flags.resolve();
    const auto dm = ingest::read_day_matrix(cl_data);
    std::vector<int> truth;
    const bool have_truth = cl_truth_opt->count() > 0;
    if (have_truth) truth = read_truth_labels(cl_truth, dm.day_ids());
    const auto result = pipeline::run_pipeline(dm, config, have_truth ? &truth : nullptr);

    fs::create_directories(cl_out_dir);
    const fs::path dir(cl_out_dir);
    pipeline::write_labels_csv(dm.day_ids(), result.clusters.labels, dir / "labels.csv");
    pipeline::write_scores_csv(dm.day_ids(), result.scores, dir / "scores.csv");
    mfpca::save_model(result.model, dir / "model.json");
    pipeline::write_report_json(result, dir / "report.json");
    if (result.gap) pipeline::write_gap_csv(*result.gap, dir / "gap.csv");
    if (cl_plots) {
      const auto emitted = pipeline::emit_plots(result, dm.to_curves(), dm.day_ids(),
                                                dm.subject_ids(), dir);
      for (const auto& notice : emitted.notices) std::cout << "note: " << notice << "\n";
    }
    std::cout << "k=" << result.clusters.k << " clusters, sizes:";
    for (Index s : result.report.cluster_sizes) std::cout << ' ' << s;
    std::cout << "\n";
    if (result.report.ccr) {
      std::cout << "ccr=" << *result.report.ccr << " arand=" << *result.report.arand << "\n";
    }
    return 0;
  }

  if (gap_cmd->parsed()) {
    auto config = gap_flags.resolve();
    config.k = std::nullopt;  // force gap selection
    const auto dm = ingest::read_day_matrix(gap_data);
    const auto result = pipeline::run_pipeline(dm, config);
    pipeline::write_gap_csv(*result.gap, gap_out);
    std::cout << "chosen k=" << result.gap->chosen_k << " (wrote " << gap_out << ")\n";
    return 0;
  }

  if (sim_cmd->parsed()) {
    simulation::SimSpec spec =
        sim_spec_opt->count() > 0
            ? simulation::load_spec(sim_spec_in)
            : simulation::SimSpec::defaults(simulation::family_from_name(sim_family), sim_seed);
    if (sim_n_opt->count() > 0) {
      if (sim_n.size() == 1) {
        std::fill(spec.n_per_group.begin(), spec.n_per_group.end(), sim_n[0]);
      } else if (sim_n.size() == spec.n_per_group.size()) {
        spec.n_per_group = sim_n;
      } else {
        throw ConfigError("--n-per-group takes 1 value or one per group");
      }
    }
    const auto data = simulation::generate(spec);
    simulation::write_curves(data, sim_out);
    const std::string truth_path =
        sim_truth_out.empty() ? sim_out + ".truth.csv" : sim_truth_out;
    simulation::write_truth(data, truth_path);
    if (!sim_spec_out.empty()) simulation::save_spec(spec, sim_spec_out);
    std::cout << "wrote " << data.curves.rows() << " curves (" << family_name(spec.family)
              << ", T=" << spec.t_len << ") to " << sim_out << "\n";
    return 0;
  }

  if (bm_cmd->parsed()) {
    std::vector<simulation::Family> families;
    for (const auto& name : bm_families) families.push_back(simulation::family_from_name(name));
    std::vector<clustering::Method> methods;
    for (const auto& name : bm_methods) methods.push_back(clustering::method_from_name(name));
    const auto table = pipeline::run_benchmark(families, methods, bm_replicates, bm_seed);
    pipeline::write_benchmark_csv(table, bm_out);
    std::cout << pipeline::format_benchmark_summary(table);
    std::cout << "per-replicate rows written to " << bm_out << "\n";
    return 0;
  }

  if (sw_cmd->parsed()) {
    const auto config = sw_flags.resolve();
    const auto dm = ingest::read_day_matrix(sw_data);
    const auto sweep = pipeline::sensitivity_sweep(dm.to_curves(), sw_values, config);
    pipeline::write_sweep_csv(sweep, sw_out);
    Scalar min_agreement = 1.0;
    for (Index a = 0; a < sweep.pairwise_arand.rows(); ++a) {
      for (Index b = a + 1; b < sweep.pairwise_arand.cols(); ++b) {
        min_agreement = std::min(min_agreement, sweep.pairwise_arand(a, b));
      }
    }
    std::cout << "wrote " << sw_out;
    if (sweep.q1_values.size() > 1) std::cout << "; minimum pairwise aRand " << min_agreement;
    std::cout << "\n";
    return 0;
  }

  if (pl_cmd->parsed()) {
    const auto dm = ingest::read_day_matrix(pl_data);
    const auto model = mfpca::load_model(pl_model);
    const auto label_rows = pipeline::read_labels_csv(pl_labels);
    if (label_rows.size() != static_cast<std::size_t>(dm.n())) {
      throw ValidationError("labels file does not match the dataset size");
    }
    pipeline::PipelineResult result;
    result.model = model;
    result.clusters.labels.reserve(label_rows.size());
    int k = 0;
    for (const auto& [id, label] : label_rows) {
      if (label < 0) throw ValidationError("negative cluster label for " + id);
      result.clusters.labels.push_back(label);
      k = std::max(k, label + 1);
    }
    result.clusters.k = k;
    const Matrix curves = dm.to_curves();
    result.report.cluster_sizes.assign(static_cast<std::size_t>(k), 0);
    result.report.cluster_means = Matrix::Zero(k, curves.cols());
    for (Index i = 0; i < curves.rows(); ++i) {
      const int label = result.clusters.labels[static_cast<std::size_t>(i)];
      ++result.report.cluster_sizes[static_cast<std::size_t>(label)];
      result.report.cluster_means.row(label) += curves.row(i);
    }
    for (int c = 0; c < k; ++c) {
      if (result.report.cluster_sizes[static_cast<std::size_t>(c)] > 0) {
        result.report.cluster_means.row(c) /=
            static_cast<Scalar>(result.report.cluster_sizes[static_cast<std::size_t>(c)]);
      }
    }
    const auto emitted =
        pipeline::emit_plots(result, curves, dm.day_ids(), dm.subject_ids(), pl_out_dir);
    for (const auto& notice : emitted.notices) std::cout << "note: " << notice << "\n";
    std::cout << "wrote " << emitted.files.size() << " files to " << pl_out_dir << "\n";
    return 0;
  }

  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
