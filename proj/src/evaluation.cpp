#include "stepfda/evaluation.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <vector>

namespace stepfda::evaluation {

namespace {

/// Relabels arbitrary non-negative labels to 0..k-1 by first appearance,
/// a canonical form that two partitions share iff they agree up to
/// relabeling.
std::pair<std::vector<int>, int> compact_labels(const std::vector<int>& labels) {
  std::map<int, int> remap;
  int next = 0;
  std::vector<int> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0) throw InvalidInput("labels must be non-negative");
    auto [it, inserted] = remap.emplace(labels[i], next);
    if (inserted) ++next;
    out[i] = it->second;
  }
  return {out, next};
}

std::vector<std::vector<std::int64_t>> contingency(const std::vector<int>& a, int ka,
                                                   const std::vector<int>& b, int kb) {
  std::vector<std::vector<std::int64_t>> table(
      static_cast<std::size_t>(ka), std::vector<std::int64_t>(static_cast<std::size_t>(kb), 0));
  for (std::size_t i = 0; i < a.size(); ++i) {
    ++table[static_cast<std::size_t>(a[i])][static_cast<std::size_t>(b[i])];
  }
  return table;
}

void check_pair(const std::vector<int>& truth, const std::vector<int>& predicted) {
  if (truth.size() != predicted.size()) {
    throw InvalidInput("partitions differ in length: " + std::to_string(truth.size()) +
                       " vs " + std::to_string(predicted.size()));
  }
  if (truth.empty()) throw InvalidInput("partitions are empty");
}

constexpr std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;

/// Minimum-cost perfect matching on a square cost matrix (potentials /
/// shortest augmenting path, O(n^3)).
std::int64_t hungarian_min(const std::vector<std::vector<std::int64_t>>& cost) {
  const int n = static_cast<int>(cost.size());
  std::vector<std::int64_t> u(static_cast<std::size_t>(n) + 1, 0);
  std::vector<std::int64_t> v(static_cast<std::size_t>(n) + 1, 0);
  std::vector<int> match(static_cast<std::size_t>(n) + 1, 0);
  std::vector<int> way(static_cast<std::size_t>(n) + 1, 0);
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<std::int64_t> minv(static_cast<std::size_t>(n) + 1, kInf);
    std::vector<char> used(static_cast<std::size_t>(n) + 1, 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const int i0 = match[static_cast<std::size_t>(j0)];
      std::int64_t delta = kInf;
      int j1 = -1;
      for (int j = 1; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const std::int64_t cur = cost[static_cast<std::size_t>(i0 - 1)][static_cast<std::size_t>(j - 1)] -
                                 u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(match[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (match[static_cast<std::size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<std::size_t>(j0)];
      match[static_cast<std::size_t>(j0)] = match[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }
  std::int64_t total = 0;
  for (int j = 1; j <= n; ++j) {
    total += cost[static_cast<std::size_t>(match[static_cast<std::size_t>(j)] - 1)][static_cast<std::size_t>(j - 1)];
  }
  return total;
}

__int128 choose2(std::int64_t n) {
  return static_cast<__int128>(n) * (n - 1) / 2;
}

}  // namespace

Scalar ccr(const std::vector<int>& truth, const std::vector<int>& predicted) {
  check_pair(truth, predicted);
  const auto [t, kt] = compact_labels(truth);
  const auto [p, kp] = compact_labels(predicted);
  const auto table = contingency(p, kp, t, kt);

  const int n_side = std::max(kt, kp);
  std::vector<std::vector<std::int64_t>> cost(
      static_cast<std::size_t>(n_side), std::vector<std::int64_t>(static_cast<std::size_t>(n_side), 0));
  for (int i = 0; i < kp; ++i) {
    for (int j = 0; j < kt; ++j) {
      cost[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          -table[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  }
  const std::int64_t agreement = -hungarian_min(cost);
  return static_cast<Scalar>(agreement) / static_cast<Scalar>(truth.size());
}

Scalar adjusted_rand(const std::vector<int>& truth, const std::vector<int>& predicted) {
  check_pair(truth, predicted);
  const auto [t, kt] = compact_labels(truth);
  const auto [p, kp] = compact_labels(predicted);
  const auto table = contingency(t, kt, p, kp);

  std::vector<std::int64_t> row_sum(static_cast<std::size_t>(kt), 0);
  std::vector<std::int64_t> col_sum(static_cast<std::size_t>(kp), 0);
  __int128 sum_cells = 0;
  for (int i = 0; i < kt; ++i) {
    for (int j = 0; j < kp; ++j) {
      const std::int64_t nij = table[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      row_sum[static_cast<std::size_t>(i)] += nij;
      col_sum[static_cast<std::size_t>(j)] += nij;
      sum_cells += choose2(nij);
    }
  }
  __int128 sum_rows = 0, sum_cols = 0;
  for (std::int64_t a : row_sum) sum_rows += choose2(a);
  for (std::int64_t b : col_sum) sum_cols += choose2(b);
  const __int128 pairs = choose2(static_cast<std::int64_t>(truth.size()));

  if (pairs == 0 || (sum_rows == sum_cols && (sum_rows == 0 || sum_rows == pairs))) {
    // Both partitions trivial: all singletons or one block each.
    bool identical = true;
    for (std::size_t i = 0; i < t.size() && identical; ++i) identical = (t[i] == p[i]);
    return identical ? 1.0 : 0.0;
  }

  const Scalar expected = static_cast<Scalar>(sum_rows) * static_cast<Scalar>(sum_cols) /
                          static_cast<Scalar>(pairs);
  const Scalar numerator = static_cast<Scalar>(sum_cells) - expected;
  const Scalar denominator =
      0.5 * (static_cast<Scalar>(sum_rows) + static_cast<Scalar>(sum_cols)) - expected;
  return numerator / denominator;
}

}  // namespace stepfda::evaluation
