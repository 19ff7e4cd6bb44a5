#include "stepfda/simulation.hpp"

#include "stepfda/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

namespace stepfda::simulation {

Family family_from_name(const std::string& name) {
  if (name == "step-amount") return Family::step_amount;
  if (name == "step-intensity") return Family::step_intensity;
  if (name == "step-pattern") return Family::step_pattern;
  if (name == "sinusoidal") return Family::sinusoidal;
  if (name == "doppler") return Family::doppler;
  throw ConfigError("unknown simulation family '" + name + "'");
}

std::string family_name(Family f) {
  switch (f) {
    case Family::step_amount: return "step-amount";
    case Family::step_intensity: return "step-intensity";
    case Family::step_pattern: return "step-pattern";
    case Family::sinusoidal: return "sinusoidal";
    case Family::doppler: return "doppler";
  }
  return "?";
}

SimSpec SimSpec::defaults(Family family, std::uint64_t seed) {
  SimSpec spec;
  spec.family = family;
  spec.seed = seed;
  switch (family) {
    case Family::step_amount:
      spec.n_per_group = {100, 100, 100};
      spec.t_len = 1440;
      spec.mu = {150, 250, 350};
      spec.sigma2 = 15;
      spec.lambda = 32.5;
      break;
    case Family::step_intensity:
      spec.n_per_group = {100, 100, 100};
      spec.t_len = 1440;
      spec.mu = {150, 150, 150};
      spec.sigma2 = 10;
      spec.lambda = 20;
      break;
    case Family::step_pattern:
      spec.n_per_group = {100, 100, 100};
      spec.t_len = 1440;
      spec.mu = {250, 250, 250};
      spec.sigma2 = 15;
      spec.lambda = 32.5;
      break;
    case Family::sinusoidal:
      spec.n_per_group = {50, 50, 50, 50};
      spec.t_len = 1024;
      spec.amplitude = {1.0, 1.1, 1.2, 1.3};
      spec.noise_variance = 0.5;
      break;
    case Family::doppler:
      spec.n_per_group = {50, 50, 50, 50};
      spec.t_len = 512;
      spec.shift = {0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0};
      spec.noise_sd = 0.05;
      break;
  }
  return spec;
}

Index SimSpec::n_total() const {
  Index n = 0;
  for (int g : n_per_group) n += g;
  return n;
}

namespace {

void check_groups(const SimSpec& spec, int expected) {
  if (spec.n_groups() != expected) {
    throw ConfigError(family_name(spec.family) + " needs " + std::to_string(expected) +
                      " groups, got " + std::to_string(spec.n_groups()));
  }
  for (int g : spec.n_per_group) {
    if (g < 1) throw ConfigError("n_per_group entries must be >= 1");
  }
}

/// Number of active epochs: floor of a normal draw, redrawn while
/// non-positive (or beyond the grid).
Index draw_active_count(Rng& rng, Scalar mu, Scalar sigma2, Index t_len) {
  for (;;) {
    const Scalar w = rng.normal(mu, std::sqrt(sigma2));
    const auto n = static_cast<Index>(std::floor(w));
    if (n >= 1 && n <= t_len) return n;
  }
}

/// A half-open epoch window [begin, end) in 0-based indices.
struct Window {
  Index begin = 0;
  Index end = 0;
  Index width() const { return end - begin; }
};

/// Places `quota` distinct epochs uniformly inside the union of windows.
void place_uniform(Rng& rng, const std::vector<Window>& windows, Index quota,
                   std::vector<Index>& support) {
  Index pool = 0;
  for (const Window& w : windows) pool += w.width();
  const auto picks = rng.sample_without_replacement(pool, quota);
  for (Index p : picks) {
    for (const Window& w : windows) {
      if (p < w.width()) {
        support.push_back(w.begin + p);
        break;
      }
      p -= w.width();
    }
  }
}

/// Splits n into quotas proportional to `percent`; rounding leftovers go
/// to the largest-share window.
std::vector<Index> split_quotas(Index n, const std::vector<Scalar>& percent) {
  std::vector<Index> quota(percent.size());
  Index used = 0;
  for (std::size_t i = 0; i < percent.size(); ++i) {
    quota[i] = static_cast<Index>(std::floor(n * percent[i] / 100.0));
    used += quota[i];
  }
  const std::size_t largest =
      static_cast<std::size_t>(std::max_element(percent.begin(), percent.end()) - percent.begin());
  quota[largest] += n - used;
  return quota;
}

Vector step_curve_from_support(Rng& rng, Index t_len, const std::vector<Index>& support,
                               Scalar lambda) {
  Vector curve = Vector::Zero(t_len);
  for (Index t : support) {
    // Active epochs carry a nonzero count; the floored exponential is
    // clamped up to 1 so the support size stays the drawn N.
    curve[t] = std::max(1.0, std::floor(rng.exponential(lambda)));
  }
  return curve;
}

std::vector<std::string> make_day_ids(Index n) {
  std::vector<std::string> ids;
  ids.reserve(static_cast<std::size_t>(n));
  for (Index i = 1; i <= n; ++i) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "d%04lld", static_cast<long long>(i));
    ids.emplace_back(buf);
  }
  return ids;
}

LabeledDataset init_dataset(const SimSpec& spec, bool integer_valued) {
  LabeledDataset data;
  data.family = spec.family;
  data.integer_valued = integer_valued;
  data.curves.resize(spec.n_total(), spec.t_len);
  data.truth.reserve(static_cast<std::size_t>(spec.n_total()));
  for (int g = 0; g < spec.n_groups(); ++g) {
    for (int i = 0; i < spec.n_per_group[static_cast<std::size_t>(g)]; ++i) data.truth.push_back(g);
  }
  data.day_ids = make_day_ids(spec.n_total());
  return data;
}

/// One uniformly placed sub-window of the given width inside `range`.
Window random_subwindow(Rng& rng, const Window& range, Index width) {
  const Index begin = range.begin + rng.uniform_int(0, range.width() - width);
  return {begin, begin + width};
}

}  // namespace

LabeledDataset gen_step_amount(const SimSpec& spec) {
  check_groups(spec, 3);
  LabeledDataset data = init_dataset(spec, true);

  // Thirds-of-day windows: midday carries 75% of the active epochs,
  // the shoulders 21%, the edges 4%.
  const std::vector<Window> midday{{480, 960}};
  const std::vector<Window> shoulder{{240, 480}, {960, 1200}};
  const std::vector<Window> edge{{0, 240}, {1200, 1440}};

  Index row = 0;
  for (int g = 0; g < 3; ++g) {
    for (int i = 0; i < spec.n_per_group[static_cast<std::size_t>(g)]; ++i, ++row) {
      Rng rng(mix_seed(spec.seed, static_cast<std::uint64_t>(row)));
      const Index n_active =
          draw_active_count(rng, spec.mu[static_cast<std::size_t>(g)], spec.sigma2, spec.t_len);
      const auto quotas = split_quotas(n_active, {75, 21, 4});
      std::vector<Index> support;
      support.reserve(static_cast<std::size_t>(n_active));
      place_uniform(rng, midday, quotas[0], support);
      place_uniform(rng, shoulder, quotas[1], support);
      place_uniform(rng, edge, quotas[2], support);
      data.curves.row(row) = step_curve_from_support(rng, spec.t_len, support, spec.lambda).transpose();
    }
  }
  return data;
}

LabeledDataset gen_step_intensity(const SimSpec& spec) {
  check_groups(spec, 3);
  LabeledDataset data = init_dataset(spec, true);

  const Window early{0, 480}, mid{480, 960}, late{960, 1440};

  Index row = 0;
  for (int g = 0; g < 3; ++g) {
    for (int i = 0; i < spec.n_per_group[static_cast<std::size_t>(g)]; ++i, ++row) {
      Rng rng(mix_seed(spec.seed, static_cast<std::uint64_t>(row)));
      const Index n_active =
          draw_active_count(rng, spec.mu[static_cast<std::size_t>(g)], spec.sigma2, spec.t_len);
      const auto quotas = split_quotas(n_active, {20, 30, 50});
      std::vector<Index> support;
      support.reserve(static_cast<std::size_t>(n_active));

      if (g == 0) {
        // Diffuse: each quota spread over its whole third.
        place_uniform(rng, {early}, quotas[0], support);
        place_uniform(rng, {mid}, quotas[1], support);
        place_uniform(rng, {late}, quotas[2], support);
      } else if (g == 1) {
        // Confined: one half-window per third, one 120-epoch window in
        // the evening.
        const Index half = rng.uniform_int(0, 1);
        place_uniform(rng, {{early.begin + half * 240, early.begin + half * 240 + 240}},
                      quotas[0], support);
        const Index half2 = rng.uniform_int(0, 1);
        place_uniform(rng, {{mid.begin + half2 * 240, mid.begin + half2 * 240 + 240}},
                      quotas[1], support);
        place_uniform(rng, {random_subwindow(rng, late, 120)}, quotas[2], support);
      } else {
        // Narrow: one quarter-window per third, and the evening half in
        // two disjoint 60-epoch windows.
        const Index q1 = rng.uniform_int(0, 3);
        place_uniform(rng, {{early.begin + q1 * 120, early.begin + q1 * 120 + 120}},
                      quotas[0], support);
        const Index q2 = rng.uniform_int(0, 3);
        place_uniform(rng, {{mid.begin + q2 * 120, mid.begin + q2 * 120 + 120}},
                      quotas[1], support);
        Window w1 = random_subwindow(rng, late, 60);
        Window w2;
        do {
          w2 = random_subwindow(rng, late, 60);
        } while (w2.begin < w1.end && w1.begin < w2.end);
        place_uniform(rng, {w1}, quotas[2] / 2, support);
        place_uniform(rng, {w2}, quotas[2] - quotas[2] / 2, support);
      }
      data.curves.row(row) = step_curve_from_support(rng, spec.t_len, support, spec.lambda).transpose();
    }
  }
  return data;
}

LabeledDataset gen_step_pattern(const SimSpec& spec) {
  check_groups(spec, 3);
  LabeledDataset data = init_dataset(spec, true);

  const std::vector<std::vector<Scalar>> percents{{45, 35, 20}, {35, 45, 20}, {20, 35, 45}};
  const std::vector<Window> thirds{{0, 480}, {480, 960}, {960, 1440}};

  Index row = 0;
  for (int g = 0; g < 3; ++g) {
    for (int i = 0; i < spec.n_per_group[static_cast<std::size_t>(g)]; ++i, ++row) {
      Rng rng(mix_seed(spec.seed, static_cast<std::uint64_t>(row)));
      const Index n_active =
          draw_active_count(rng, spec.mu[static_cast<std::size_t>(g)], spec.sigma2, spec.t_len);
      const auto quotas = split_quotas(n_active, percents[static_cast<std::size_t>(g)]);
      std::vector<Index> support;
      support.reserve(static_cast<std::size_t>(n_active));
      for (int w = 0; w < 3; ++w) {
        place_uniform(rng, {thirds[static_cast<std::size_t>(w)]}, quotas[static_cast<std::size_t>(w)],
                      support);
      }
      data.curves.row(row) = step_curve_from_support(rng, spec.t_len, support, spec.lambda).transpose();
    }
  }
  return data;
}

LabeledDataset gen_sinusoidal(const SimSpec& spec) {
  check_groups(spec, 4);
  LabeledDataset data = init_dataset(spec, false);
  const Scalar sd = std::sqrt(spec.noise_variance);

  Index row = 0;
  for (int g = 0; g < 4; ++g) {
    const Scalar a = spec.amplitude[static_cast<std::size_t>(g)];
    for (int i = 0; i < spec.n_per_group[static_cast<std::size_t>(g)]; ++i, ++row) {
      Rng rng(mix_seed(spec.seed, static_cast<std::uint64_t>(row)));
      for (Index j = 0; j < spec.t_len; ++j) {
        const Scalar t = static_cast<Scalar>(j) / static_cast<Scalar>(spec.t_len);
        data.curves(row, j) = a * std::abs(std::sin(5.0 * t) + rng.normal(0.0, sd));
      }
    }
  }
  return data;
}

LabeledDataset gen_doppler(const SimSpec& spec) {
  check_groups(spec, 4);
  LabeledDataset data = init_dataset(spec, false);
  const Scalar guard = 1.0 / (4.0 * static_cast<Scalar>(spec.t_len));

  Index row = 0;
  for (int g = 0; g < 4; ++g) {
    const Scalar t0 = spec.shift[static_cast<std::size_t>(g)];
    for (int i = 0; i < spec.n_per_group[static_cast<std::size_t>(g)]; ++i, ++row) {
      Rng rng(mix_seed(spec.seed, static_cast<std::uint64_t>(row)));
      for (Index j = 0; j < spec.t_len; ++j) {
        const Scalar t = static_cast<Scalar>(j) / static_cast<Scalar>(spec.t_len);
        Scalar osc = 0.0;
        if (std::abs(t - t0) >= guard) {
          osc = std::sin(2.1 * std::numbers::pi / (t - t0));
        }
        data.curves(row, j) =
            0.6 + 0.6 * std::sqrt(t * (1.0 - t)) * osc + rng.normal(0.0, spec.noise_sd);
      }
    }
  }
  return data;
}

LabeledDataset generate(const SimSpec& spec) {
  switch (spec.family) {
    case Family::step_amount: return gen_step_amount(spec);
    case Family::step_intensity: return gen_step_intensity(spec);
    case Family::step_pattern: return gen_step_pattern(spec);
    case Family::sinusoidal: return gen_sinusoidal(spec);
    case Family::doppler: return gen_doppler(spec);
  }
  throw ConfigError("unknown family");
}

void write_truth(const LabeledDataset& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << "day_id,group\n";
  for (std::size_t i = 0; i < data.truth.size(); ++i) {
    out << data.day_ids[i] << ',' << data.truth[i] + 1 << '\n';
  }
}

void write_curves(const LabeledDataset& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << "day_id,subject_id";
  for (Index j = 1; j <= data.curves.cols(); ++j) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "t%04lld", static_cast<long long>(j));
    out << ',' << buf;
  }
  out << '\n';
  char cell[32];
  for (Index i = 0; i < data.curves.rows(); ++i) {
    out << data.day_ids[static_cast<std::size_t>(i)] << ',';
    for (Index j = 0; j < data.curves.cols(); ++j) {
      if (data.integer_valued) {
        std::snprintf(cell, sizeof(cell), "%lld", static_cast<long long>(data.curves(i, j)));
      } else {
        std::snprintf(cell, sizeof(cell), "%.17g", data.curves(i, j));
      }
      out << ',' << cell;
    }
    out << '\n';
  }
}

namespace {

nlohmann::json scalars_to_json(const std::vector<Scalar>& v) { return v; }

}  // namespace

void save_spec(const SimSpec& spec, const std::filesystem::path& path) {
  nlohmann::json j{{"family", family_name(spec.family)},
                   {"n_per_group", spec.n_per_group},
                   {"t_len", spec.t_len},
                   {"seed", spec.seed},
                   {"mu", scalars_to_json(spec.mu)},
                   {"sigma2", spec.sigma2},
                   {"lambda", spec.lambda},
                   {"amplitude", scalars_to_json(spec.amplitude)},
                   {"noise_variance", spec.noise_variance},
                   {"shift", scalars_to_json(spec.shift)},
                   {"noise_sd", spec.noise_sd}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

SimSpec load_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  SimSpec spec = SimSpec::defaults(family_from_name(j.at("family").get<std::string>()),
                                   j.at("seed").get<std::uint64_t>());
  if (j.contains("n_per_group")) spec.n_per_group = j["n_per_group"].get<std::vector<int>>();
  if (j.contains("t_len")) spec.t_len = j["t_len"].get<Index>();
  if (j.contains("mu")) spec.mu = j["mu"].get<std::vector<Scalar>>();
  if (j.contains("sigma2")) spec.sigma2 = j["sigma2"].get<Scalar>();
  if (j.contains("lambda")) spec.lambda = j["lambda"].get<Scalar>();
  if (j.contains("amplitude")) spec.amplitude = j["amplitude"].get<std::vector<Scalar>>();
  if (j.contains("noise_variance")) spec.noise_variance = j["noise_variance"].get<Scalar>();
  if (j.contains("shift")) spec.shift = j["shift"].get<std::vector<Scalar>>();
  if (j.contains("noise_sd")) spec.noise_sd = j["noise_sd"].get<Scalar>();
  return spec;
}

}  // namespace stepfda::simulation
