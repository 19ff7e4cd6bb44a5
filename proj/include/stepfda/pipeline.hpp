#pragma once

#include "stepfda/clustering.hpp"
#include "stepfda/evaluation.hpp"
#include "stepfda/ingest.hpp"
#include "stepfda/mfpca.hpp"
#include "stepfda/simulation.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace stepfda::pipeline {

struct PipelineConfig {
  int q1 = 8;
  int q2 = 4;
  Scalar variance_threshold = 0.90;
  std::optional<int> k;  // fixed cluster count; unset -> gap-selected
  clustering::Method method = clustering::Method::pam;
  std::array<int, smoothing::kNumVariables> n_basis{30, 30, 30};
  std::uint64_t seed = 1;
  int b_gap = 20;
  int k_max = 10;  // gap-statistic candidate range
};

/// Reads a JSON config file; absent fields keep their defaults.
PipelineConfig load_config(const std::filesystem::path& path);

struct StageTiming {
  std::string stage;
  double seconds = 0;
};

struct RunReport {
  std::vector<Index> cluster_sizes;  // sums to N
  Matrix cluster_means;              // k x T, raw-step space
  Vector explained;                  // cumulative, mirrors the model
  std::optional<Scalar> ccr;         // set when truth labels are supplied
  std::optional<Scalar> arand;
  std::vector<StageTiming> timings;
};

struct PipelineResult {
  PipelineConfig config;
  mfpca::MfpcaModel model;
  Matrix scores;  // N x R
  std::optional<clustering::GapCurve> gap;
  clustering::ClusterResult clusters;
  RunReport report;
};

/// End-to-end run: features -> standardize -> basis fit -> MFPCA ->
/// scores -> (gap selection when k is unset) -> clustering. Stage
/// errors propagate with the stage name attached.
PipelineResult run_pipeline(const Matrix& curves, const PipelineConfig& config,
                            const std::vector<int>* truth = nullptr);
PipelineResult run_pipeline(const ingest::DayMatrix& dm, const PipelineConfig& config,
                            const std::vector<int>* truth = nullptr);

struct BenchmarkRow {
  simulation::Family family;
  clustering::Method method;
  int replicate = 0;
  Scalar ccr = 0;
  Scalar arand = 0;
};

struct BenchmarkSummary {
  simulation::Family family;
  clustering::Method method;
  Scalar ccr_mean = 0, ccr_sd = 0;
  Scalar arand_mean = 0, arand_sd = 0;
};

struct BenchmarkTable {
  std::vector<BenchmarkRow> rows;
  std::vector<BenchmarkSummary> summaries() const;
};

/// Seeded replicates of generate -> run_pipeline at the true K -> score.
/// Each (family, replicate) pair reuses one dataset across methods.
BenchmarkTable run_benchmark(const std::vector<simulation::Family>& families,
                             const std::vector<clustering::Method>& methods,
                             int replicates, std::uint64_t seed);

void write_benchmark_csv(const BenchmarkTable& table, const std::filesystem::path& path);
std::string format_benchmark_summary(const BenchmarkTable& table);

struct SweepResult {
  std::vector<int> q1_values;
  std::vector<std::vector<int>> labels;  // one label vector per q1
  Matrix pairwise_arand;                 // m x m, unit diagonal
};

/// Clustering agreement across quantile counts for the intensity curve,
/// at fixed K. Requires config.k.
SweepResult sensitivity_sweep(const Matrix& curves, const std::vector<int>& q1_values,
                              PipelineConfig config);

void write_sweep_csv(const SweepResult& sweep, const std::filesystem::path& path);

struct EmitResult {
  std::vector<std::filesystem::path> files;
  std::vector<std::string> notices;
};

/// Writes the inspection outputs of a finished run into out_dir:
/// cluster mean curves (CSV + SVG), per-variable eigenfunction curves
/// (CSV + SVG), the gap curve when one was computed, and subject-level
/// cluster-proportion heatmap tables (split by weekday/weekend when the
/// day ids carry an ISO date, skipped with a notice when subject ids
/// are absent).
EmitResult emit_plots(const PipelineResult& result, const Matrix& raw_curves,
                      const std::vector<std::string>& day_ids,
                      const std::vector<std::string>& subject_ids,
                      const std::filesystem::path& out_dir);

void write_labels_csv(const std::vector<std::string>& day_ids, const std::vector<int>& labels,
                      const std::filesystem::path& path);
std::vector<std::pair<std::string, int>> read_labels_csv(const std::filesystem::path& path);
void write_scores_csv(const std::vector<std::string>& day_ids,
                      const Eigen::Ref<const Matrix>& scores,
                      const std::filesystem::path& path);
void write_gap_csv(const clustering::GapCurve& curve, const std::filesystem::path& path);
void write_report_json(const PipelineResult& result, const std::filesystem::path& path);

}  // namespace stepfda::pipeline
