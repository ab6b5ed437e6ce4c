#pragma once

// Hand-emitted SVG line charts. Plots are derived views over data that is
// already on disk as CSV; emitting them never touches the CSV writers.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace bullwhip {

struct SvgSeries {
    std::string label;
    std::vector<std::array<double, 2>> points;  // (x, y); non-finite points split the line
};

namespace svg_detail {

constexpr double kWidth = 800.0, kHeight = 520.0;
constexpr double kLeft = 80.0, kRight = 770.0, kTop = 50.0, kBottom = 450.0;

inline const char* palette(std::size_t i) {
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c",
                                   "#9467bd", "#ff7f0e", "#8c564b"};
    return colors[i % 6];
}

[[nodiscard]] inline std::string escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        if (c == '&')
            out += "&amp;";
        else if (c == '<')
            out += "&lt;";
        else if (c == '>')
            out += "&gt;";
        else
            out += c;
    }
    return out;
}

[[nodiscard]] inline std::string num(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

[[nodiscard]] inline std::string tick_label(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

struct Range {
    double lo = 0.0, hi = 1.0;
};

// Tight data range, padded so flat series and single points stay visible.
[[nodiscard]] inline Range pad_range(double lo, double hi) {
    if (lo > hi) return Range{0.0, 1.0};
    if (lo == hi) {
        const double pad = std::abs(lo) > 0.0 ? 0.5 * std::abs(lo) : 1.0;
        return Range{lo - pad, hi + pad};
    }
    const double pad = 0.05 * (hi - lo);
    return Range{lo - pad, hi + pad};
}

}  // namespace svg_detail

inline void write_line_chart(const std::string& path, const std::string& title,
                             const std::string& x_label, const std::string& y_label,
                             const std::vector<SvgSeries>& series) {
    using namespace svg_detail;

    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const auto& s : series)
        for (const auto& pt : s.points) {
            if (!std::isfinite(pt[0]) || !std::isfinite(pt[1])) continue;
            xmin = std::min(xmin, pt[0]);
            xmax = std::max(xmax, pt[0]);
            ymin = std::min(ymin, pt[1]);
            ymax = std::max(ymax, pt[1]);
        }
    const Range xr = pad_range(xmin, xmax);
    const Range yr = pad_range(ymin, ymax);

    auto px = [&](double x) { return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * (kRight - kLeft); };
    auto py = [&](double y) { return kBottom - (y - yr.lo) / (yr.hi - yr.lo) * (kBottom - kTop); };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " + num(kWidth) + " " +
           num(kHeight) + "\" font-family=\"sans-serif\" font-size=\"13\">\n";
    svg += "<rect width=\"" + num(kWidth) + "\" height=\"" + num(kHeight) +
           "\" fill=\"#ffffff\"/>\n";
    svg += "<text x=\"" + num(0.5 * kWidth) + "\" y=\"28\" text-anchor=\"middle\" "
           "font-size=\"16\">" + escape(title) + "</text>\n";

    // Gridlines and tick labels, five per axis.
    for (int i = 0; i <= 4; ++i) {
        const double fx = xr.lo + (xr.hi - xr.lo) * i / 4.0;
        const double fy = yr.lo + (yr.hi - yr.lo) * i / 4.0;
        const std::string gx = num(px(fx)), gy = num(py(fy));
        svg += "<line x1=\"" + gx + "\" y1=\"" + num(kTop) + "\" x2=\"" + gx + "\" y2=\"" +
               num(kBottom) + "\" stroke=\"#dddddd\"/>\n";
        svg += "<line x1=\"" + num(kLeft) + "\" y1=\"" + gy + "\" x2=\"" + num(kRight) +
               "\" y2=\"" + gy + "\" stroke=\"#dddddd\"/>\n";
        svg += "<text x=\"" + gx + "\" y=\"" + num(kBottom + 20.0) +
               "\" text-anchor=\"middle\">" + escape(tick_label(fx)) + "</text>\n";
        svg += "<text x=\"" + num(kLeft - 8.0) + "\" y=\"" + num(py(fy) + 4.0) +
               "\" text-anchor=\"end\">" + escape(tick_label(fy)) + "</text>\n";
    }
    svg += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" +
           num(kRight - kLeft) + "\" height=\"" + num(kBottom - kTop) +
           "\" fill=\"none\" stroke=\"#000000\"/>\n";
    svg += "<text x=\"" + num(0.5 * (kLeft + kRight)) + "\" y=\"" + num(kBottom + 45.0) +
           "\" text-anchor=\"middle\">" + escape(x_label) + "</text>\n";
    svg += "<text x=\"22\" y=\"" + num(0.5 * (kTop + kBottom)) +
           "\" text-anchor=\"middle\" transform=\"rotate(-90 22 " +
           num(0.5 * (kTop + kBottom)) + ")\">" + escape(y_label) + "</text>\n";

    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = palette(s);
        std::string run;
        std::size_t run_len = 0;
        auto flush = [&]() {
            if (run_len >= 2)
                svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
                       "\" stroke-width=\"1.5\" points=\"" + run + "\"/>\n";
            run.clear();
            run_len = 0;
        };
        for (const auto& pt : series[s].points) {
            if (!std::isfinite(pt[0]) || !std::isfinite(pt[1])) {
                flush();
                continue;
            }
            if (run_len) run += ' ';
            run += num(px(pt[0])) + "," + num(py(pt[1]));
            ++run_len;
        }
        flush();
        const double ly = kTop + 18.0 * (static_cast<double>(s) + 1.0);
        svg += "<line x1=\"" + num(kRight - 150.0) + "\" y1=\"" + num(ly - 4.0) + "\" x2=\"" +
               num(kRight - 120.0) + "\" y2=\"" + num(ly - 4.0) + "\" stroke=\"" + color +
               "\" stroke-width=\"2\"/>\n";
        svg += "<text x=\"" + num(kRight - 114.0) + "\" y=\"" + num(ly) + "\">" +
               escape(series[s].label) + "</text>\n";
    }
    svg += "</svg>\n";

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("svg: cannot open '" + path + "' for writing");
    out << svg;
    if (!out) throw std::runtime_error("svg: write failed for '" + path + "'");
}

}  // namespace bullwhip
