#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>

namespace attrisk::plots {

/// Writes a bar-style histogram of `values` as a standalone SVG.  An
/// optional vertical reference line (the uniform-prior marker) is drawn
/// dashed.  Output is deterministic for identical inputs.
void svg_histogram(std::span<const double> values, std::size_t n_bins, const std::string& title,
                   std::optional<double> reference_line, const std::filesystem::path& path);

} // namespace attrisk::plots
