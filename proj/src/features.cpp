#include "stepfda/features.hpp"

#include <algorithm>
#include <numeric>

namespace stepfda::features {

Vector cumulative_sum(const Eigen::Ref<const Vector>& counts) {
  Vector out(counts.size());
  Scalar acc = 0;
  for (Index t = 0; t < counts.size(); ++t) {
    acc += counts[t];
    out[t] = acc;
  }
  return out;
}

QuantileProfile quantile_times(const Eigen::Ref<const Vector>& s_curve, int q) {
  if (q < 1) throw ConfigError("quantile count must be >= 1, got " + std::to_string(q));
  if (s_curve.size() == 0) throw ValidationError("empty curve");
  const Index t_len = s_curve.size();
  const Scalar total = s_curve[t_len - 1];
  if (total <= 0) throw ZeroDayError("zero-activity day: quantile times undefined");

  QuantileProfile profile;
  profile.q = q;
  profile.total = total;
  profile.times.assign(static_cast<std::size_t>(q) + 1, 0);
  Index t = 0;  // crossings are found in one left-to-right scan
  for (int k = 1; k <= q; ++k) {
    const Scalar threshold = total * (static_cast<Scalar>(k) / q);
    while (t < t_len && s_curve[t] < threshold) ++t;
    profile.times[static_cast<std::size_t>(k)] = std::min(t + 1, t_len);  // 1-based epoch
  }
  return profile;
}

Vector quantile_slope(const QuantileProfile& profile, Index t_len) {
  const int q = profile.q;
  const auto& times = profile.times;

  Vector seg_value(q);
  for (int k = 0; k < q; ++k) {
    const Index width = times[static_cast<std::size_t>(k) + 1] - times[static_cast<std::size_t>(k)];
    const Scalar denom = static_cast<Scalar>(std::max<Index>(width, 1));
    seg_value[k] = (profile.total / q) / denom;
  }

  Vector out(t_len);
  const Index last_time = times[static_cast<std::size_t>(q)];
  int k = 0;
  for (Index t = 1; t <= t_len; ++t) {
    if (t >= last_time) {
      out[t - 1] = seg_value[q - 1];
      continue;
    }
    while (k + 1 < q && times[static_cast<std::size_t>(k) + 1] <= t) ++k;
    out[t - 1] = seg_value[k];
  }
  return out;
}

Vector ordered_quantile_slope(const Eigen::Ref<const Vector>& counts, int q1) {
  const Vector s = cumulative_sum(counts);
  if (s[s.size() - 1] <= 0) return Vector::Zero(counts.size());
  Vector slope = quantile_slope(quantile_times(s, q1), counts.size());
  std::sort(slope.begin(), slope.end());
  return slope;
}

namespace {

/// 1-based ascending-sort ranks with ties broken by epoch order.
std::vector<Index> stable_ranks(const Eigen::Ref<const Vector>& counts) {
  const Index t_len = counts.size();
  std::vector<Index> order(static_cast<std::size_t>(t_len));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return counts[a] < counts[b]; });
  std::vector<Index> rank(static_cast<std::size_t>(t_len));
  for (Index pos = 0; pos < t_len; ++pos) {
    rank[static_cast<std::size_t>(order[static_cast<std::size_t>(pos)])] = pos + 1;
  }
  return rank;
}

}  // namespace

Vector mean_score(const Eigen::Ref<const Vector>& counts, int q2) {
  const Index t_len = counts.size();
  ingest::validate_grid(t_len, q2);

  Vector sorted = counts;
  std::sort(sorted.begin(), sorted.end());
  const Vector s_sorted = cumulative_sum(sorted);
  if (s_sorted[t_len - 1] <= 0) return Vector::Zero(t_len);

  const QuantileProfile profile = quantile_times(s_sorted, q2);
  const std::vector<Index> rank = stable_ranks(counts);

  // u(t) = number of quantile times strictly below the rank of epoch t.
  Vector u(t_len);
  for (Index t = 0; t < t_len; ++t) {
    int k = 0;
    while (k < q2 && profile.times[static_cast<std::size_t>(k) + 1] < rank[static_cast<std::size_t>(t)]) ++k;
    u[t] = static_cast<Scalar>(k);
  }

  const Index block = t_len / q2;
  Vector out(t_len);
  for (int b = 0; b < q2; ++b) {
    const Scalar mean = u.segment(b * block, block).mean();
    out.segment(b * block, block).setConstant(mean);
  }
  return out;
}

FeatureTriple feature_triple(const Eigen::Ref<const Vector>& counts, int q1, int q2) {
  FeatureTriple ft;
  ft.q1 = q1;
  ft.q2 = q2;
  ft.s_curve = cumulative_sum(counts);
  ft.i_curve = ordered_quantile_slope(counts, q1);
  ft.p_curve = mean_score(counts, q2);
  return ft;
}

FeatureTriple feature_triple(const ingest::StepDay& day, int q1, int q2) {
  return feature_triple(day.to_curve(), q1, q2);
}

std::vector<FeatureTriple> feature_triples(const Matrix& curves, int q1, int q2) {
  std::vector<FeatureTriple> out;
  out.reserve(static_cast<std::size_t>(curves.rows()));
  for (Index i = 0; i < curves.rows(); ++i) {
    out.push_back(feature_triple(curves.row(i).transpose(), q1, q2));
  }
  return out;
}

}  // namespace stepfda::features
