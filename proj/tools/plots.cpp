#include "plots.hpp"

#include "attrisk/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <vector>

namespace attrisk::plots {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kMarginLeft = 50.0;
constexpr double kMarginRight = 20.0;
constexpr double kMarginTop = 40.0;
constexpr double kMarginBottom = 40.0;

std::string num(double value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", value);
    return buf;
}

} // namespace

void svg_histogram(std::span<const double> values, std::size_t n_bins, const std::string& title,
                   std::optional<double> reference_line, const std::filesystem::path& path) {
    if (values.empty() || n_bins == 0)
        throw Error(ErrorKind::Size, "histogram needs values and bins");

    double lo = *std::min_element(values.begin(), values.end());
    double hi = *std::max_element(values.begin(), values.end());
    if (reference_line) {
        lo = std::min(lo, *reference_line);
        hi = std::max(hi, *reference_line);
    }
    if (lo == hi) {
        lo -= 0.5;
        hi += 0.5;
    }
    const double span = hi - lo;
    std::vector<std::size_t> counts(n_bins, 0);
    for (double v : values) {
        auto bin = static_cast<std::size_t>((v - lo) / span * static_cast<double>(n_bins));
        if (bin >= n_bins)
            bin = n_bins - 1;
        ++counts[bin];
    }
    const double max_count = static_cast<double>(*std::max_element(counts.begin(), counts.end()));

    const double plot_w = kWidth - kMarginLeft - kMarginRight;
    const double plot_h = kHeight - kMarginTop - kMarginBottom;

    std::ofstream out(path);
    if (!out)
        throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(kWidth) << "\" height=\""
        << num(kHeight) << "\" viewBox=\"0 0 " << num(kWidth) << " " << num(kHeight) << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << num(kWidth / 2) << "\" y=\"24\" text-anchor=\"middle\" "
           "font-family=\"sans-serif\" font-size=\"16\">"
        << title << "</text>\n";

    for (std::size_t b = 0; b < n_bins; ++b) {
        if (counts[b] == 0)
            continue;
        const double x = kMarginLeft + plot_w * static_cast<double>(b) / n_bins;
        const double w = plot_w / n_bins;
        const double h = plot_h * static_cast<double>(counts[b]) / max_count;
        out << "<rect x=\"" << num(x) << "\" y=\"" << num(kMarginTop + plot_h - h) << "\" width=\""
            << num(w) << "\" height=\"" << num(h) << "\" fill=\"#4878a8\" stroke=\"white\" "
            << "stroke-width=\"0.5\"/>\n";
    }

    // Axes and range labels.
    out << "<line x1=\"" << num(kMarginLeft) << "\" y1=\"" << num(kMarginTop + plot_h)
        << "\" x2=\"" << num(kMarginLeft + plot_w) << "\" y2=\"" << num(kMarginTop + plot_h)
        << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << num(kMarginLeft) << "\" y1=\"" << num(kMarginTop) << "\" x2=\""
        << num(kMarginLeft) << "\" y2=\"" << num(kMarginTop + plot_h) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << num(kMarginLeft) << "\" y=\"" << num(kHeight - 12)
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << num(lo) << "</text>\n";
    out << "<text x=\"" << num(kMarginLeft + plot_w) << "\" y=\"" << num(kHeight - 12)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">" << num(hi)
        << "</text>\n";
    out << "<text x=\"14\" y=\"" << num(kMarginTop)
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << max_count << "</text>\n";

    if (reference_line) {
        const double x = kMarginLeft + plot_w * (*reference_line - lo) / span;
        out << "<line x1=\"" << num(x) << "\" y1=\"" << num(kMarginTop) << "\" x2=\"" << num(x)
            << "\" y2=\"" << num(kMarginTop + plot_h)
            << "\" stroke=\"#c03030\" stroke-dasharray=\"6 3\" stroke-width=\"1.5\"/>\n";
        out << "<text x=\"" << num(x + 4) << "\" y=\"" << num(kMarginTop + 14)
            << "\" fill=\"#c03030\" font-family=\"sans-serif\" font-size=\"12\">prior "
            << num(*reference_line) << "</text>\n";
    }
    out << "</svg>\n";
    if (!out)
        throw Error(ErrorKind::Io, "write failed for '" + path.string() + "'");
}

} // namespace attrisk::plots
