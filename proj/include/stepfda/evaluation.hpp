#pragma once

#include "stepfda/types.hpp"

#include <vector>

namespace stepfda::evaluation {

/// Correct classification rate: the largest fraction of agreeing labels
/// over all one-to-one mappings of predicted clusters onto truth
/// clusters (optimal assignment on the zero-padded square confusion
/// matrix). Throws InvalidInput on length mismatch or empty input.
Scalar ccr(const std::vector<int>& truth, const std::vector<int>& predicted);

/// Hubert-Arabie adjusted Rand index. Expected value 0 under random
/// labeling, 1 iff the partitions agree up to relabeling. When both
/// partitions are trivial (degenerate denominator) returns 1 if they
/// are identical up to relabeling, else 0.
Scalar adjusted_rand(const std::vector<int>& truth, const std::vector<int>& predicted);

}  // namespace stepfda::evaluation
