#include "cbleak/svgplot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace cbleak {
namespace {

constexpr double kWidth = 860.0;
constexpr double kHeight = 520.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 660.0;   // plot area right edge; legend lives beyond
constexpr double kTop = 50.0;
constexpr double kBottom = 460.0;

constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                    "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string fmt2(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string fmt_tick(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

double nice_step(double range) {
    if (range <= 0.0) {
        return 1.0;
    }
    const double raw = range / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double r = raw / mag;
    if (r < 1.5) return mag;
    if (r < 3.5) return 2.0 * mag;
    if (r < 7.5) return 5.0 * mag;
    return 10.0 * mag;
}

}  // namespace

std::string emit_svg_lineplot(const PlotSpec& spec, std::span<const PlotSeries> series) {
    if (series.empty()) {
        throw std::invalid_argument("emit_svg_lineplot: no series");
    }
    for (const PlotSeries& s : series) {
        if (s.points.empty()) {
            throw std::invalid_argument("emit_svg_lineplot: series '" + s.label + "' is empty");
        }
    }

    auto x_of = [&spec](double x) {
        if (spec.log_x) {
            if (!(x > 0.0)) {
                throw std::invalid_argument("emit_svg_lineplot: log_x requires positive x");
            }
            return std::log10(x);
        }
        return x;
    };

    double xmin = x_of(series[0].points[0].x), xmax = xmin;
    double ymin = series[0].points[0].lo, ymax = series[0].points[0].hi;
    for (const PlotSeries& s : series) {
        for (const PlotPoint& p : s.points) {
            xmin = std::min(xmin, x_of(p.x));
            xmax = std::max(xmax, x_of(p.x));
            ymin = std::min({ymin, p.lo, p.mean});
            ymax = std::max({ymax, p.hi, p.mean});
        }
    }
    if (xmax == xmin) {
        xmin -= 0.5;
        xmax += 0.5;
    }
    if (ymax == ymin) {
        ymin -= 0.5;
        ymax += 0.5;
    }
    const double ypad = 0.05 * (ymax - ymin);
    ymin -= ypad;
    ymax += ypad;

    auto sx = [&](double x) { return kLeft + (x_of(x) - xmin) / (xmax - xmin) * (kRight - kLeft); };
    auto sy = [&](double y) { return kBottom - (y - ymin) / (ymax - ymin) * (kBottom - kTop); };

    std::string svg;
    svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt2(kWidth) + "\" height=\"" +
           fmt2(kHeight) + "\" viewBox=\"0 0 " + fmt2(kWidth) + " " + fmt2(kHeight) + "\">\n";
    svg += "<rect x=\"0\" y=\"0\" width=\"" + fmt2(kWidth) + "\" height=\"" + fmt2(kHeight) +
           "\" fill=\"#ffffff\"/>\n";
    svg += "<text x=\"" + fmt2((kLeft + kRight) / 2) +
           "\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">" +
           spec.title + "</text>\n";

    // axes
    svg += "<line x1=\"" + fmt2(kLeft) + "\" y1=\"" + fmt2(kBottom) + "\" x2=\"" + fmt2(kRight) +
           "\" y2=\"" + fmt2(kBottom) + "\" stroke=\"#000000\" stroke-width=\"1\"/>\n";
    svg += "<line x1=\"" + fmt2(kLeft) + "\" y1=\"" + fmt2(kTop) + "\" x2=\"" + fmt2(kLeft) +
           "\" y2=\"" + fmt2(kBottom) + "\" stroke=\"#000000\" stroke-width=\"1\"/>\n";

    // x ticks
    if (spec.log_x) {
        const int lo_dec = static_cast<int>(std::ceil(xmin - 1e-9));
        const int hi_dec = static_cast<int>(std::floor(xmax + 1e-9));
        for (int dec = lo_dec; dec <= hi_dec; ++dec) {
            const double px = kLeft + (dec - xmin) / (xmax - xmin) * (kRight - kLeft);
            svg += "<line x1=\"" + fmt2(px) + "\" y1=\"" + fmt2(kBottom) + "\" x2=\"" + fmt2(px) +
                   "\" y2=\"" + fmt2(kBottom + 6) + "\" stroke=\"#000000\" stroke-width=\"1\"/>\n";
            svg += "<text x=\"" + fmt2(px) + "\" y=\"" + fmt2(kBottom + 22) +
                   "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" +
                   fmt_tick(std::pow(10.0, dec)) + "</text>\n";
        }
    } else {
        const double step = nice_step(xmax - xmin);
        for (double t = std::ceil(xmin / step) * step; t <= xmax + 1e-9 * step; t += step) {
            const double px = sx(t);
            svg += "<line x1=\"" + fmt2(px) + "\" y1=\"" + fmt2(kBottom) + "\" x2=\"" + fmt2(px) +
                   "\" y2=\"" + fmt2(kBottom + 6) + "\" stroke=\"#000000\" stroke-width=\"1\"/>\n";
            svg += "<text x=\"" + fmt2(px) + "\" y=\"" + fmt2(kBottom + 22) +
                   "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" +
                   fmt_tick(t) + "</text>\n";
        }
    }

    // y ticks
    {
        const double step = nice_step(ymax - ymin);
        for (double t = std::ceil(ymin / step) * step; t <= ymax + 1e-9 * step; t += step) {
            const double py = sy(t);
            svg += "<line x1=\"" + fmt2(kLeft - 6) + "\" y1=\"" + fmt2(py) + "\" x2=\"" +
                   fmt2(kLeft) + "\" y2=\"" + fmt2(py) + "\" stroke=\"#000000\" stroke-width=\"1\"/>\n";
            svg += "<text x=\"" + fmt2(kLeft - 10) + "\" y=\"" + fmt2(py + 4) +
                   "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">" +
                   fmt_tick(t) + "</text>\n";
        }
    }

    // axis labels
    svg += "<text x=\"" + fmt2((kLeft + kRight) / 2) + "\" y=\"" + fmt2(kBottom + 45) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" + spec.x_label +
           "</text>\n";
    svg += "<text x=\"18\" y=\"" + fmt2((kTop + kBottom) / 2) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 18 " +
           fmt2((kTop + kBottom) / 2) + ")\">" + spec.y_label + "</text>\n";

    // min-max bands first so the lines draw on top
    for (std::size_t si = 0; si < series.size(); ++si) {
        const char* color = kPalette[si % (sizeof(kPalette) / sizeof(kPalette[0]))];
        const auto& pts = series[si].points;
        std::string poly;
        for (const PlotPoint& p : pts) {
            poly += fmt2(sx(p.x)) + "," + fmt2(sy(p.hi)) + " ";
        }
        for (std::size_t i = pts.size(); i-- > 0;) {
            poly += fmt2(sx(pts[i].x)) + "," + fmt2(sy(pts[i].lo));
            if (i != 0) {
                poly += " ";
            }
        }
        svg += std::string("<polygon points=\"") + poly + "\" fill=\"" + color +
               "\" fill-opacity=\"0.15\" stroke=\"none\"/>\n";
    }

    for (std::size_t si = 0; si < series.size(); ++si) {
        const char* color = kPalette[si % (sizeof(kPalette) / sizeof(kPalette[0]))];
        std::string poly;
        for (std::size_t i = 0; i < series[si].points.size(); ++i) {
            const PlotPoint& p = series[si].points[i];
            poly += fmt2(sx(p.x)) + "," + fmt2(sy(p.mean));
            if (i + 1 != series[si].points.size()) {
                poly += " ";
            }
        }
        svg += std::string("<polyline points=\"") + poly + "\" fill=\"none\" stroke=\"" + color +
               "\" stroke-width=\"2\"/>\n";
    }

    // legend
    for (std::size_t si = 0; si < series.size(); ++si) {
        const char* color = kPalette[si % (sizeof(kPalette) / sizeof(kPalette[0]))];
        const double ly = kTop + 10 + 22.0 * static_cast<double>(si);
        svg += "<line x1=\"" + fmt2(kRight + 16) + "\" y1=\"" + fmt2(ly) + "\" x2=\"" +
               fmt2(kRight + 44) + "\" y2=\"" + fmt2(ly) + "\" stroke=\"" + color +
               "\" stroke-width=\"2\"/>\n";
        svg += "<text x=\"" + fmt2(kRight + 50) + "\" y=\"" + fmt2(ly + 4) +
               "\" font-family=\"sans-serif\" font-size=\"12\">" + series[si].label + "</text>\n";
    }

    svg += "</svg>\n";
    return svg;
}

}  // namespace cbleak
