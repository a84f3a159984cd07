#pragma once

#include <string>
#include <vector>

namespace llnlab {

struct SvgSeries {
    std::string label;
    std::vector<double> xs;
    std::vector<double> ys;
};

/// Static line plot, self-contained SVG text.  Log axes drop nonpositive
/// points.  Output is a pure function of the inputs (no timestamps), so
/// identical data renders identical bytes.
std::string render_line_plot(const std::string& title, const std::string& x_label,
                             const std::string& y_label,
                             const std::vector<SvgSeries>& series, bool log_x, bool log_y);

} // namespace llnlab
