// Self-contained SVG line/scatter charts: axes with ticks, optional shaded
// prediction band, measured series. Output is byte-stable across runs.
#pragma once

#include <string>
#include <vector>

#include "clfree/dem_check.hpp"

namespace clfree {

struct SvgStyle {
    int width = 720;
    int height = 480;
    std::string title;
    std::string x_label = "t";
    std::string y_label;
    bool log_log = false;
};

std::string emit_svg(const TrajectoryReport& report, const SvgStyle& style);

// Scatter of (x, y) points plus an optional fitted line y = slope x + b.
std::string emit_svg_scatter(const std::vector<double>& x,
                             const std::vector<double>& y, double slope,
                             double intercept, bool with_fit,
                             const SvgStyle& style);

} // namespace clfree
