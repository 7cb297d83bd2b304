#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>
#include <vector>

#include "cbleak/svgplot.hpp"

using namespace cbleak;

namespace {

std::size_t count_substr(const std::string& text, const std::string& needle) {
    std::size_t count = 0;
    std::size_t pos = 0;
    while ((pos = text.find(needle, pos)) != std::string::npos) {
        ++count;
        pos += needle.size();
    }
    return count;
}

std::size_t polyline_pairs(const std::string& svg) {
    const std::size_t start = svg.find("<polyline points=\"");
    REQUIRE(start != std::string::npos);
    const std::size_t open = svg.find('"', start) + 1;
    const std::size_t close = svg.find('"', open);
    const std::string points = svg.substr(open, close - open);
    return count_substr(points, ",");
}

}  // namespace

TEST_CASE("a single series of three points yields one polyline with three pairs") {
    PlotSeries series;
    series.label = "gbt";
    series.points = {{1.0, 0.5, 0.4, 0.6}, {2.0, 0.4, 0.3, 0.5}, {3.0, 0.2, 0.1, 0.3}};
    PlotSpec spec;
    spec.title = "t";
    spec.x_label = "b";
    spec.y_label = "leakage";
    const std::string svg = emit_svg_lineplot(spec, {&series, 1});

    CHECK(count_substr(svg, "<polyline") == 1);
    CHECK(polyline_pairs(svg) == 3);
    CHECK(count_substr(svg, "<polygon") == 1);  // the min-max band
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(svg.find("gbt") != std::string::npos);
}

TEST_CASE("identical input produces identical bytes") {
    std::vector<PlotSeries> series(2);
    series[0].label = "mlp";
    series[0].points = {{51, 0.9, 0.7, 1.1}, {200, 0.5, 0.4, 0.6}, {449, 0.1, 0.0, 0.2}};
    series[1].label = "gbt";
    series[1].points = {{51, 0.8, 0.7, 0.9}, {200, 0.4, 0.3, 0.5}, {449, 0.05, 0.0, 0.1}};
    PlotSpec spec;
    spec.title = "panel";
    spec.x_label = "b";
    spec.y_label = "leakage";
    const std::string a = emit_svg_lineplot(spec, series);
    const std::string b = emit_svg_lineplot(spec, series);
    CHECK(a == b);
    CHECK(count_substr(a, "<polyline") == 2);
}

TEST_CASE("log-x handles decades and rejects non-positive x") {
    PlotSeries series;
    series.label = "k=16";
    series.points = {{0.01, 0.3, 0.3, 0.3}, {0.1, 0.25, 0.2, 0.3}, {1, 0.1, 0.1, 0.1},
                     {10, 0.02, 0.0, 0.05}};
    PlotSpec spec;
    spec.title = "lambda sweep";
    spec.x_label = "lambda";
    spec.y_label = "leakage";
    spec.log_x = true;
    const std::string svg = emit_svg_lineplot(spec, {&series, 1});
    CHECK(svg.find("0.01") != std::string::npos);
    CHECK(svg.find("10") != std::string::npos);

    series.points[0].x = 0.0;
    CHECK_THROWS_AS(emit_svg_lineplot(spec, {&series, 1}), std::invalid_argument);
}

TEST_CASE("empty inputs are rejected") {
    PlotSpec spec;
    CHECK_THROWS_AS(emit_svg_lineplot(spec, {}), std::invalid_argument);
    PlotSeries empty;
    empty.label = "x";
    CHECK_THROWS_AS(emit_svg_lineplot(spec, {&empty, 1}), std::invalid_argument);
}
