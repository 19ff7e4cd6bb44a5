#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace stepfda {

using Scalar = double;
using Index = Eigen::Index;
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Errors caused by bad user input (files, configuration, contract
/// violations at the public API). The CLI maps these to exit code 2;
/// everything else exits 1.
struct InvalidInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed file content (wrong column count, unparseable cell).
struct ParseError : InvalidInput {
  using InvalidInput::InvalidInput;
};

/// Structurally valid input that violates a data invariant
/// (negative count, duplicate id, mismatched grid).
struct ValidationError : InvalidInput {
  using InvalidInput::InvalidInput;
};

/// Inconsistent configuration (indivisible grid, bad quantile count).
struct ConfigError : InvalidInput {
  using InvalidInput::InvalidInput;
};

/// Numerical failure while fitting (rank-deficient design, non-PSD Gram).
struct FitError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A day with zero total activity where quantiles are undefined.
/// Thrown by quantile_times; callers apply the all-zero degenerate rule.
struct ZeroDayError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace stepfda
