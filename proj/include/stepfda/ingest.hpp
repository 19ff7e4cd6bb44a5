#pragma once

#include "stepfda/types.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace stepfda::ingest {

/// One day of step counts on a regular minute grid.
struct StepDay {
  std::string day_id;
  std::string subject_id;  // may be empty
  std::vector<std::int64_t> counts;
  int epoch_minutes = 1;

  Index t() const { return static_cast<Index>(counts.size()); }

  /// Counts as a real-valued column vector.
  Vector to_curve() const;
};

/// An ordered collection of days sharing one grid length.
struct DayMatrix {
  std::vector<StepDay> days;

  Index n() const { return static_cast<Index>(days.size()); }
  Index t() const { return days.empty() ? 0 : days.front().t(); }

  /// N x T real matrix of counts, one row per day.
  Matrix to_curves() const;

  std::vector<std::string> day_ids() const;
  std::vector<std::string> subject_ids() const;
};

/// Checks the DayMatrix invariants: N >= 1, uniform T, unique day_ids,
/// non-negative counts. Throws ValidationError.
void validate(const DayMatrix& dm);

/// Reads the wide CSV format
///   day_id,subject_id,t0001,...,tNNNN
/// one row per day. Row order is preserved. Throws ParseError for
/// malformed rows (naming the line number) and ValidationError for
/// negative counts, blank cells, or duplicate day ids.
DayMatrix read_day_matrix(const std::filesystem::path& path);

/// Writes the wide CSV format; read_day_matrix(write_day_matrix(dm))
/// round-trips byte-identically up to the trailing newline.
void write_day_matrix(const DayMatrix& dm, const std::filesystem::path& path);

/// Succeeds iff T is divisible by q2 (the mean-score block division
/// requires equal blocks). Throws ConfigError naming T and q2.
void validate_grid(const DayMatrix& dm, int q2);
void validate_grid(Index t, int q2);

/// Builds a DayMatrix from a real-valued curve matrix whose entries are
/// non-negative integers (as produced by the step-family simulators).
DayMatrix from_integer_curves(const Matrix& curves,
                              const std::vector<std::string>& day_ids);

}  // namespace stepfda::ingest
