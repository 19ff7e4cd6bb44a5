#pragma once

#include "stepfda/ingest.hpp"
#include "stepfda/types.hpp"

#include <vector>

namespace stepfda::features {

/// Activity-time quantiles of a cumulative curve: times[k] is the first
/// 1-based epoch at which k/q of the day's total has been reached,
/// with times[0] pinned to 0.
struct QuantileProfile {
  int q = 0;
  std::vector<Index> times;  // size q+1, non-decreasing, times[0] == 0
  Scalar total = 0;          // s_curve tail value
};

/// The three derived curves for one day, pre-standardization.
struct FeatureTriple {
  Vector s_curve;  // cumulative steps, non-decreasing
  Vector i_curve;  // ordered quantile slope, non-decreasing
  Vector p_curve;  // mean score, piecewise constant on q2 blocks
  int q1 = 0;
  int q2 = 0;
};

/// Running total of activity: out[t] = sum of counts[0..t]. Unit epoch
/// width, so every integral in the derived curves is a prefix sum.
Vector cumulative_sum(const Eigen::Ref<const Vector>& counts);

/// First-crossing times of the fractions k/q, k = 1..q, of the total.
/// Throws ZeroDayError when the total is zero (quantiles undefined);
/// callers apply the all-zero degenerate rule.
QuantileProfile quantile_times(const Eigen::Ref<const Vector>& s_curve, int q);

/// Piecewise activity rate: on each quantile segment the value is
/// (total/q) / segment length, evaluated at epochs 1..t_len. A collapsed
/// segment (two quantiles at the same epoch) has its denominator clamped
/// to one epoch; past the last quantile time the final segment's value
/// extends to the end of the day.
Vector quantile_slope(const QuantileProfile& profile, Index t_len);

/// quantile_slope values sorted ascending; all-zero for a zero day.
Vector ordered_quantile_slope(const Eigen::Ref<const Vector>& counts, int q1);

/// Blocked average of the per-epoch score u(t) that ranks each epoch's
/// activity into ordered-activity quantile bands:
///   1. stable-sort counts ascending, take the cumulative sum,
///   2. find the first-crossing quantile times of the sorted curve,
///   3. u(t) = k where the ascending-sort rank of epoch t falls in the
///      k-th band (ties broken by epoch order),
///   4. average u over q2 consecutive blocks of length T/q2.
/// All-zero for a zero day. Requires T divisible by q2.
Vector mean_score(const Eigen::Ref<const Vector>& counts, int q2);

FeatureTriple feature_triple(const Eigen::Ref<const Vector>& counts, int q1, int q2);
FeatureTriple feature_triple(const ingest::StepDay& day, int q1, int q2);

/// Per-day triples for a whole dataset (rows of `curves` are days).
std::vector<FeatureTriple> feature_triples(const Matrix& curves, int q1, int q2);

}  // namespace stepfda::features
