#pragma once

#include "stepfda/types.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace stepfda::simulation {

enum class Family { step_amount, step_intensity, step_pattern, sinusoidal, doppler };

Family family_from_name(const std::string& name);
std::string family_name(Family f);

/// Parameters of one synthetic benchmark family. The defaults() factory
/// fills every field with the published values; T is fixed per family
/// (1440 for step data, 1024 sinusoidal, 512 doppler).
struct SimSpec {
  Family family = Family::step_amount;
  std::vector<int> n_per_group;
  Index t_len = 1440;
  std::uint64_t seed = 1;

  // Step families: active-epoch count ~ floor(Normal(mu_k, sigma2)),
  // values ~ floor(Exp(mean lambda)).
  std::vector<Scalar> mu;
  Scalar sigma2 = 15;
  Scalar lambda = 32.5;

  // Sinusoidal: a_k |sin(5 t) + eps|, eps ~ N(0, noise_variance).
  std::vector<Scalar> amplitude;
  Scalar noise_variance = 0.5;

  // Doppler: 0.6 + 0.6 sqrt(t(1-t)) sin(2.1 pi / (t - shift_k)) + eps.
  std::vector<Scalar> shift;
  Scalar noise_sd = 0.05;

  static SimSpec defaults(Family family, std::uint64_t seed);

  int n_groups() const { return static_cast<int>(n_per_group.size()); }
  Index n_total() const;
};

void save_spec(const SimSpec& spec, const std::filesystem::path& path);
SimSpec load_spec(const std::filesystem::path& path);

/// Generated curves with their ground-truth group labels. Step families
/// hold non-negative integers (exactly representable); continuous
/// families hold reals. Curves are emitted group by group, so truth is
/// 0,...,0,1,...,1,... in generation order.
struct LabeledDataset {
  Matrix curves;  // N x T
  std::vector<int> truth;
  std::vector<std::string> day_ids;
  Family family = Family::step_amount;
  bool integer_valued = true;
};

LabeledDataset gen_step_amount(const SimSpec& spec);
LabeledDataset gen_step_intensity(const SimSpec& spec);
LabeledDataset gen_step_pattern(const SimSpec& spec);
LabeledDataset gen_sinusoidal(const SimSpec& spec);
LabeledDataset gen_doppler(const SimSpec& spec);

/// Dispatch on spec.family.
LabeledDataset generate(const SimSpec& spec);

/// Truth sidecar: day_id,group with 1-based group numbers.
void write_truth(const LabeledDataset& data, const std::filesystem::path& path);

/// Wide CSV in the ingest format; real-valued families are written with
/// full precision and are not ingestible as step data.
void write_curves(const LabeledDataset& data, const std::filesystem::path& path);

}  // namespace stepfda::simulation
