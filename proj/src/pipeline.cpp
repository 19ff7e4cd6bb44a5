#include "stepfda/pipeline.hpp"

#include "stepfda/rng.hpp"
#include "stepfda/svg.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace stepfda::pipeline {

namespace {

using Clock = std::chrono::steady_clock;

/// Runs one stage, recording wall-clock time and prefixing any error
/// with the stage name (preserving the exception type for exit codes).
template <class Fn>
auto timed_stage(const std::string& name, std::vector<StageTiming>& timings, Fn&& fn) {
  const auto start = Clock::now();
  auto finish = [&] {
    timings.push_back({name, std::chrono::duration<double>(Clock::now() - start).count()});
  };
  try {
    auto result = fn();
    finish();
    return result;
  } catch (const mfpca::InsufficientData& e) {
    throw mfpca::InsufficientData("stage " + name + ": " + e.what());
  } catch (const mfpca::DegenerateVariance& e) {
    throw mfpca::DegenerateVariance("stage " + name + ": " + e.what());
  } catch (const ParseError& e) {
    throw ParseError("stage " + name + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError("stage " + name + ": " + e.what());
  } catch (const ConfigError& e) {
    throw ConfigError("stage " + name + ": " + e.what());
  } catch (const InvalidInput& e) {
    throw InvalidInput("stage " + name + ": " + e.what());
  } catch (const FitError& e) {
    throw FitError("stage " + name + ": " + e.what());
  } catch (const std::exception& e) {
    throw std::runtime_error("stage " + name + ": " + e.what());
  }
}

void validate_config(const PipelineConfig& config, Index n, Index t_len) {
  if (n < 1) throw ValidationError("dataset has no days");
  if (config.q1 < 1) throw ConfigError("q1 must be >= 1");
  ingest::validate_grid(t_len, config.q2);
  if (config.variance_threshold <= 0 || config.variance_threshold > 1) {
    throw ConfigError("variance_threshold must lie in (0, 1]");
  }
  for (int nb : config.n_basis) {
    if (nb < 4) throw ConfigError("n_basis must be >= 4 (cubic order)");
    if (nb > t_len) throw ConfigError("n_basis exceeds the grid length");
  }
  if (config.k && (*config.k < 1 || *config.k > n)) {
    throw ConfigError("k must lie in [1, N]");
  }
}

}  // namespace

PipelineResult run_pipeline(const Matrix& curves, const PipelineConfig& config,
                            const std::vector<int>* truth) {
  validate_config(config, curves.rows(), curves.cols());
  if (truth && static_cast<Index>(truth->size()) != curves.rows()) {
    throw ValidationError("truth labels length does not match the dataset");
  }

  PipelineResult result;
  result.config = config;
  auto& timings = result.report.timings;

  auto triples = timed_stage("features", timings, [&] {
    return features::feature_triples(curves, config.q1, config.q2);
  });

  auto smoothed = timed_stage("smoothing", timings, [&] {
    return smoothing::smooth_dataset(std::move(triples), config.n_basis);
  });

  result.model = timed_stage("mfpca", timings, [&] {
    return mfpca::fit(smoothed, config.variance_threshold);
  });

  result.scores = timed_stage("scores", timings, [&] {
    return mfpca::project(result.model, smoothed);
  });

  int k = 0;
  if (config.k) {
    k = *config.k;
  } else {
    result.gap = timed_stage("gap", timings, [&] {
      const int k_max = static_cast<int>(
          std::min<Index>(config.k_max, curves.rows()));
      return clustering::gap_statistic(result.scores, k_max, config.b_gap, config.method,
                                       config.seed);
    });
    k = result.gap->chosen_k;
  }

  result.clusters = timed_stage("clustering", timings, [&] {
    return clustering::cluster(result.scores, k, config.method, config.seed);
  });

  // Report.
  result.report.explained = result.model.explained;
  result.report.cluster_sizes.assign(static_cast<std::size_t>(k), 0);
  for (int label : result.clusters.labels) {
    ++result.report.cluster_sizes[static_cast<std::size_t>(label)];
  }
  result.report.cluster_means = Matrix::Zero(k, curves.cols());
  for (Index i = 0; i < curves.rows(); ++i) {
    result.report.cluster_means.row(result.clusters.labels[static_cast<std::size_t>(i)]) +=
        curves.row(i);
  }
  for (int c = 0; c < k; ++c) {
    if (result.report.cluster_sizes[static_cast<std::size_t>(c)] > 0) {
      result.report.cluster_means.row(c) /=
          static_cast<Scalar>(result.report.cluster_sizes[static_cast<std::size_t>(c)]);
    }
  }
  if (truth) {
    result.report.ccr = evaluation::ccr(*truth, result.clusters.labels);
    result.report.arand = evaluation::adjusted_rand(*truth, result.clusters.labels);
  }
  return result;
}

PipelineResult run_pipeline(const ingest::DayMatrix& dm, const PipelineConfig& config,
                            const std::vector<int>* truth) {
  return run_pipeline(dm.to_curves(), config, truth);
}

std::vector<BenchmarkSummary> BenchmarkTable::summaries() const {
  std::vector<BenchmarkSummary> out;
  for (const auto& row : rows) {
    auto it = std::find_if(out.begin(), out.end(), [&](const BenchmarkSummary& s) {
      return s.family == row.family && s.method == row.method;
    });
    if (it == out.end()) {
      out.push_back({row.family, row.method, 0, 0, 0, 0});
    }
  }
  for (auto& s : out) {
    Scalar n = 0, ccr_sum = 0, arand_sum = 0;
    for (const auto& row : rows) {
      if (row.family != s.family || row.method != s.method) continue;
      n += 1;
      ccr_sum += row.ccr;
      arand_sum += row.arand;
    }
    const Scalar ccr_mean = ccr_sum / n;
    const Scalar arand_mean = arand_sum / n;
    Scalar ccr_ss = 0, arand_ss = 0;
    for (const auto& row : rows) {
      if (row.family != s.family || row.method != s.method) continue;
      ccr_ss += (row.ccr - ccr_mean) * (row.ccr - ccr_mean);
      arand_ss += (row.arand - arand_mean) * (row.arand - arand_mean);
    }
    s.ccr_mean = ccr_mean;
    s.arand_mean = arand_mean;
    s.ccr_sd = n > 1 ? std::sqrt(ccr_ss / (n - 1)) : 0.0;
    s.arand_sd = n > 1 ? std::sqrt(arand_ss / (n - 1)) : 0.0;
  }
  return out;
}

BenchmarkTable run_benchmark(const std::vector<simulation::Family>& families,
                             const std::vector<clustering::Method>& methods,
                             int replicates, std::uint64_t seed) {
  if (replicates < 1) throw ConfigError("replicates must be >= 1");
  BenchmarkTable table;
  for (std::size_t f = 0; f < families.size(); ++f) {
    for (int rep = 0; rep < replicates; ++rep) {
      const std::uint64_t data_seed =
          mix_seed(seed, 1000000ULL * (f + 1) + static_cast<std::uint64_t>(rep));
      simulation::SimSpec spec = simulation::SimSpec::defaults(families[f], data_seed);
      const simulation::LabeledDataset data = simulation::generate(spec);
      for (const auto method : methods) {
        PipelineConfig config;
        config.method = method;
        config.k = spec.n_groups();  // true K, as in the published comparison
        config.seed = mix_seed(seed, 2000000ULL * (f + 1) + static_cast<std::uint64_t>(rep));
        const PipelineResult result = run_pipeline(data.curves, config, &data.truth);
        table.rows.push_back({families[f], method, rep, *result.report.ccr,
                              *result.report.arand});
      }
    }
  }
  return table;
}

void write_benchmark_csv(const BenchmarkTable& table, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << "generator,method,replicate,ccr,arand\n";
  char buf[64];
  for (const auto& row : table.rows) {
    std::snprintf(buf, sizeof(buf), "%.6f,%.6f", row.ccr, row.arand);
    out << simulation::family_name(row.family) << ",mfpca-"
        << clustering::method_name(row.method) << ',' << row.replicate << ',' << buf << '\n';
  }
}

std::string format_benchmark_summary(const BenchmarkTable& table) {
  std::ostringstream out;
  char buf[128];
  out << "generator         method        mean CCR (sd)      mean aRand (sd)\n";
  for (const auto& s : table.summaries()) {
    std::snprintf(buf, sizeof(buf), "%-17s %-13s %.4f (%.3f)     %.4f (%.3f)\n",
                  simulation::family_name(s.family).c_str(),
                  ("mfpca-" + clustering::method_name(s.method)).c_str(), s.ccr_mean, s.ccr_sd,
                  s.arand_mean, s.arand_sd);
    out << buf;
  }
  return out.str();
}

SweepResult sensitivity_sweep(const Matrix& curves, const std::vector<int>& q1_values,
                              PipelineConfig config) {
  if (!config.k) throw ConfigError("sensitivity sweep needs a fixed k");
  SweepResult sweep;
  sweep.q1_values = q1_values;
  for (int q1 : q1_values) {
    PipelineConfig run_config = config;
    run_config.q1 = q1;
    sweep.labels.push_back(run_pipeline(curves, run_config).clusters.labels);
  }
  const auto m = static_cast<Index>(q1_values.size());
  sweep.pairwise_arand = Matrix::Ones(m, m);
  for (Index a = 0; a < m; ++a) {
    for (Index b = a + 1; b < m; ++b) {
      const Scalar v = evaluation::adjusted_rand(sweep.labels[static_cast<std::size_t>(a)],
                                                 sweep.labels[static_cast<std::size_t>(b)]);
      sweep.pairwise_arand(a, b) = v;
      sweep.pairwise_arand(b, a) = v;
    }
  }
  return sweep;
}

void write_sweep_csv(const SweepResult& sweep, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << "q1_a,q1_b,arand\n";
  char buf[32];
  for (std::size_t a = 0; a < sweep.q1_values.size(); ++a) {
    for (std::size_t b = a + 1; b < sweep.q1_values.size(); ++b) {
      std::snprintf(buf, sizeof(buf), "%.6f",
                    sweep.pairwise_arand(static_cast<Index>(a), static_cast<Index>(b)));
      out << sweep.q1_values[a] << ',' << sweep.q1_values[b] << ',' << buf << '\n';
    }
  }
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  PipelineConfig config;
  try {
    if (j.contains("q1")) config.q1 = j["q1"].get<int>();
    if (j.contains("q2")) config.q2 = j["q2"].get<int>();
    if (j.contains("variance_threshold")) {
      config.variance_threshold = j["variance_threshold"].get<Scalar>();
    }
    if (j.contains("k") && !j["k"].is_null()) config.k = j["k"].get<int>();
    if (j.contains("method")) {
      config.method = clustering::method_from_name(j["method"].get<std::string>());
    }
    if (j.contains("n_basis")) {
      const auto nb = j["n_basis"].get<std::vector<int>>();
      if (nb.size() != 3) throw ConfigError("n_basis must have 3 entries");
      std::copy(nb.begin(), nb.end(), config.n_basis.begin());
    }
    if (j.contains("seed")) config.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("b_gap")) config.b_gap = j["b_gap"].get<int>();
    if (j.contains("k_max")) config.k_max = j["k_max"].get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return config;
}

void write_labels_csv(const std::vector<std::string>& day_ids, const std::vector<int>& labels,
                      const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << "day_id,cluster\n";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out << day_ids[i] << ',' << labels[i] << '\n';
  }
}

std::vector<std::pair<std::string, int>> read_labels_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path.string() + ": empty file");
  std::vector<std::pair<std::string, int>> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw ParseError(path.string() + " line " + std::to_string(line_no) + ": expected 2 columns");
    }
    try {
      out.emplace_back(line.substr(0, comma), std::stoi(line.substr(comma + 1)));
    } catch (const std::exception&) {
      throw ParseError(path.string() + " line " + std::to_string(line_no) +
                       ": cluster label is not an integer");
    }
  }
  return out;
}

void write_scores_csv(const std::vector<std::string>& day_ids,
                      const Eigen::Ref<const Matrix>& scores,
                      const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << "day_id";
  for (Index r = 1; r <= scores.cols(); ++r) out << ",xi_" << r;
  out << '\n';
  char buf[32];
  for (Index i = 0; i < scores.rows(); ++i) {
    out << day_ids[static_cast<std::size_t>(i)];
    for (Index r = 0; r < scores.cols(); ++r) {
      std::snprintf(buf, sizeof(buf), "%.12g", scores(i, r));
      out << ',' << buf;
    }
    out << '\n';
  }
}

void write_gap_csv(const clustering::GapCurve& curve, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << "k,gap,sk\n";
  char buf[48];
  for (std::size_t i = 0; i < curve.ks.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.6f,%.6f", curve.gaps[static_cast<Index>(i)],
                  curve.sks[static_cast<Index>(i)]);
    out << curve.ks[i] << ',' << buf << '\n';
  }
}

void write_report_json(const PipelineResult& result, const std::filesystem::path& path) {
  nlohmann::json j;
  const PipelineConfig& c = result.config;
  j["config"] = {{"q1", c.q1},
                 {"q2", c.q2},
                 {"variance_threshold", c.variance_threshold},
                 {"method", clustering::method_name(c.method)},
                 {"n_basis", std::vector<int>(c.n_basis.begin(), c.n_basis.end())},
                 {"seed", c.seed},
                 {"b_gap", c.b_gap},
                 {"k_max", c.k_max}};
  if (c.k) j["config"]["k"] = *c.k;
  j["k"] = result.clusters.k;
  j["cluster_sizes"] = result.report.cluster_sizes;
  j["explained"] = std::vector<Scalar>(result.report.explained.begin(),
                                       result.report.explained.end());
  j["eigenvalues"] = std::vector<Scalar>(result.model.eigenvalues.begin(),
                                         result.model.eigenvalues.end());
  if (result.report.ccr) j["ccr"] = *result.report.ccr;
  if (result.report.arand) j["arand"] = *result.report.arand;
  if (result.gap) j["gap_chosen_k"] = result.gap->chosen_k;
  for (const auto& t : result.report.timings) {
    j["timings"].push_back({{"stage", t.stage}, {"seconds", t.seconds}});
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

namespace {

/// Extracts an ISO date (YYYY-MM-DD) embedded in a day id; returns false
/// when none is present.
bool parse_embedded_date(const std::string& id, int& year, int& month, int& day) {
  for (std::size_t pos = 0; pos + 10 <= id.size(); ++pos) {
    const char* s = id.c_str() + pos;
    auto digit = [](char c) { return c >= '0' && c <= '9'; };
    const bool shape = digit(s[0]) && digit(s[1]) && digit(s[2]) && digit(s[3]) &&
                       s[4] == '-' && digit(s[5]) && digit(s[6]) && s[7] == '-' &&
                       digit(s[8]) && digit(s[9]);
    if (!shape) continue;
    year = (s[0] - '0') * 1000 + (s[1] - '0') * 100 + (s[2] - '0') * 10 + (s[3] - '0');
    month = (s[5] - '0') * 10 + (s[6] - '0');
    day = (s[8] - '0') * 10 + (s[9] - '0');
    if (month >= 1 && month <= 12 && day >= 1 && day <= 31) return true;
  }
  return false;
}

/// Days since 1970-01-01 for a civil date (Howard Hinnant's algorithm).
long days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const long era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<long>(doe) - 719468;
}

bool is_weekend(int y, int m, int d) {
  const long days = days_from_civil(y, m, d);
  const int weekday = static_cast<int>(((days % 7) + 11) % 7);  // 0 = Sunday
  return weekday == 0 || weekday == 6;
}

void write_heatmap_csv(const std::vector<std::string>& subjects,
                       const std::vector<int>& labels, const std::vector<bool>& mask, int k,
                       const std::filesystem::path& path) {
  std::map<std::string, std::vector<Scalar>> counts;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!mask[i]) continue;
    auto& row = counts[subjects[i]];
    row.resize(static_cast<std::size_t>(k), 0.0);
    row[static_cast<std::size_t>(labels[i])] += 1.0;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << "subject_id";
  for (int c = 0; c < k; ++c) out << ",cluster_" << c;
  out << '\n';
  char buf[32];
  for (const auto& [subject, row] : counts) {  // std::map: lexicographic order
    Scalar total = 0;
    for (Scalar v : row) total += v;
    out << subject;
    for (Scalar v : row) {
      std::snprintf(buf, sizeof(buf), "%.6f", total > 0 ? v / total : 0.0);
      out << ',' << buf;
    }
    out << '\n';
  }
}

void write_wide_csv(const std::filesystem::path& path, const std::string& key_name,
                    const std::vector<std::string>& keys, const Matrix& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << key_name;
  for (Index j = 1; j <= rows.cols(); ++j) {
    char col[24];
    std::snprintf(col, sizeof(col), "t%04lld", static_cast<long long>(j));
    out << ',' << col;
  }
  out << '\n';
  char buf[32];
  for (Index i = 0; i < rows.rows(); ++i) {
    out << keys[static_cast<std::size_t>(i)];
    for (Index j = 0; j < rows.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.8g", rows(i, j));
      out << ',' << buf;
    }
    out << '\n';
  }
}

}  // namespace

EmitResult emit_plots(const PipelineResult& result, const Matrix& raw_curves,
                      const std::vector<std::string>& day_ids,
                      const std::vector<std::string>& subject_ids,
                      const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (!fs::is_directory(out_dir)) {
    throw std::runtime_error("cannot create output directory '" + out_dir.string() + "'");
  }

  EmitResult emitted;
  const int k = result.clusters.k;
  const Index t_len = raw_curves.cols();
  const Vector grid = bspline::epoch_grid(t_len);

  // Cluster mean curves in raw-step space.
  {
    std::vector<std::string> names;
    for (int c = 0; c < k; ++c) {
      names.push_back("cluster " + std::to_string(c) + " (n=" +
                      std::to_string(result.report.cluster_sizes[static_cast<std::size_t>(c)]) +
                      ")");
    }
    const fs::path csv = out_dir / "cluster_means.csv";
    std::vector<std::string> keys;
    for (int c = 0; c < k; ++c) keys.push_back(std::to_string(c));
    write_wide_csv(csv, "cluster", keys, result.report.cluster_means);
    emitted.files.push_back(csv);
    const fs::path svg_path = out_dir / "cluster_means.svg";
    svg::write_line_plot(svg_path, "Cluster mean step counts", grid,
                         result.report.cluster_means, names);
    emitted.files.push_back(svg_path);
  }

  // Eigenfunctions per variable on the epoch grid.
  static const char* kVariableNames[] = {"cumulative_sum", "ordered_quantile_slope",
                                         "mean_score"};
  for (int v = 0; v < smoothing::kNumVariables; ++v) {
    const bspline::Basis basis(result.model.basis[v]);
    const Matrix design = basis.design(grid);
    const Matrix curves = (design * result.model.eigen_block(v)).transpose();  // R x T
    std::vector<std::string> names, keys;
    for (Index r = 0; r < curves.rows(); ++r) {
      names.push_back("psi_" + std::to_string(r + 1));
      keys.push_back(std::to_string(r + 1));
    }
    const fs::path csv = out_dir / ("eigenfunctions_" + std::string(kVariableNames[v]) + ".csv");
    write_wide_csv(csv, "component", keys, curves);
    emitted.files.push_back(csv);
    const fs::path svg_path =
        out_dir / ("eigenfunctions_" + std::string(kVariableNames[v]) + ".svg");
    svg::write_line_plot(svg_path, std::string("Eigenfunctions: ") + kVariableNames[v], grid,
                         curves, names);
    emitted.files.push_back(svg_path);
  }

  if (result.gap) {
    const fs::path gap_path = out_dir / "gap_curve.csv";
    write_gap_csv(*result.gap, gap_path);
    emitted.files.push_back(gap_path);
  }

  // Subject-level heatmap tables.
  const bool have_subjects =
      std::any_of(subject_ids.begin(), subject_ids.end(),
                  [](const std::string& s) { return !s.empty(); });
  if (!have_subjects) {
    emitted.notices.push_back("heatmap skipped: no subject_id metadata");
    return emitted;
  }
  int y = 0, m = 0, d = 0;
  const bool have_dates =
      std::all_of(day_ids.begin(), day_ids.end(),
                  [&](const std::string& id) { return parse_embedded_date(id, y, m, d); });
  if (have_dates) {
    std::vector<bool> weekend(day_ids.size());
    for (std::size_t i = 0; i < day_ids.size(); ++i) {
      parse_embedded_date(day_ids[i], y, m, d);
      weekend[i] = is_weekend(y, m, d);
    }
    std::vector<bool> weekday_mask(day_ids.size());
    for (std::size_t i = 0; i < day_ids.size(); ++i) weekday_mask[i] = !weekend[i];
    const fs::path wd = out_dir / "heatmap_weekday.csv";
    const fs::path we = out_dir / "heatmap_weekend.csv";
    write_heatmap_csv(subject_ids, result.clusters.labels, weekday_mask, k, wd);
    write_heatmap_csv(subject_ids, result.clusters.labels, weekend, k, we);
    emitted.files.push_back(wd);
    emitted.files.push_back(we);
  } else {
    const std::vector<bool> all(day_ids.size(), true);
    const fs::path hm = out_dir / "heatmap.csv";
    write_heatmap_csv(subject_ids, result.clusters.labels, all, k, hm);
    emitted.files.push_back(hm);
    emitted.notices.push_back("no ISO dates in day ids: single heatmap, no weekday split");
  }
  return emitted;
}

}  // namespace stepfda::pipeline
