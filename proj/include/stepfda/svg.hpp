#pragma once

#include "stepfda/types.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace stepfda::svg {

/// Writes a minimal line plot: one polyline per row of `series`, shared
/// x grid, auto-scaled axes with tick labels. Inspection quality only.
void write_line_plot(const std::filesystem::path& path, const std::string& title,
                     const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Matrix>& series,
                     const std::vector<std::string>& labels);

}  // namespace stepfda::svg
