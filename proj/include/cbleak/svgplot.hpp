#pragma once

#include <span>
#include <string>
#include <vector>

namespace cbleak {

struct PlotPoint {
    double x = 0.0;
    double mean = 0.0;
    double lo = 0.0;  // min over runs
    double hi = 0.0;  // max over runs
};

struct PlotSeries {
    std::string label;
    std::vector<PlotPoint> points;
};

struct PlotSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = false;  // positions x on a log10 scale (x must be > 0)
};

// Standalone SVG text: axes with numeric ticks, one polyline per series, a
// translucent min-max band per series and a legend. Identical input yields
// identical output bytes.
std::string emit_svg_lineplot(const PlotSpec& spec, std::span<const PlotSeries> series);

}  // namespace cbleak
