#pragma once

// Minimal self-contained SVG charts for reports. Presentation only.

#include <chanscope/core.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

namespace chanscope::svg {

inline const std::array<const char*, 10> kPalette = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                                     "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

struct ScatterPoint {
    double x = 0.0, y = 0.0;
    int group = 0; // -1 rendered grey
    bool highlight = false; // drawn as a square
};

inline std::string scatter(const std::vector<ScatterPoint>& pts, const std::string& title, int width = 640, int height = 480) {
    double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    if (!pts.empty()) {
        xmin = xmax = pts[0].x;
        ymin = ymax = pts[0].y;
        for (const auto& p : pts) {
            xmin = std::min(xmin, p.x);
            xmax = std::max(xmax, p.x);
            ymin = std::min(ymin, p.y);
            ymax = std::max(ymax, p.y);
        }
    }
    if (xmax - xmin < 1e-12) xmax = xmin + 1;
    if (ymax - ymin < 1e-12) ymax = ymin + 1;
    const double m = 40;
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
        << title << "</text>\n";
    for (const auto& p : pts) {
        double sx = m + (p.x - xmin) / (xmax - xmin) * (width - 2 * m);
        double sy = height - m - (p.y - ymin) / (ymax - ymin) * (height - 2 * m);
        const char* color = p.group < 0 ? "#bbbbbb" : kPalette[static_cast<std::size_t>(p.group) % kPalette.size()];
        if (p.highlight)
            out << "<rect x=\"" << format_fixed(sx - 4, 2) << "\" y=\"" << format_fixed(sy - 4, 2)
                << "\" width=\"8\" height=\"8\" fill=\"" << color << "\" stroke=\"black\"/>\n";
        else
            out << "<circle cx=\"" << format_fixed(sx, 2) << "\" cy=\"" << format_fixed(sy, 2) << "\" r=\"3\" fill=\""
                << color << "\" fill-opacity=\"0.8\"/>\n";
    }
    out << "</svg>\n";
    return out.str();
}

struct Series {
    std::string name;
    std::vector<double> values;
};

/// Line chart over categorical x labels (months).
inline std::string line_chart(const std::vector<std::string>& x_labels, const std::vector<Series>& series,
                              const std::string& title, int width = 720, int height = 400) {
    double ymax = 0.0;
    for (const auto& s : series)
        for (double v : s.values) ymax = std::max(ymax, v);
    if (ymax <= 0.0) ymax = 1.0;
    const double left = 60, right = 20, top = 40, bottom = 60;
    const double pw = width - left - right, ph = height - top - bottom;
    const std::size_t n = x_labels.size();
    auto sx = [&](std::size_t i) { return left + (n > 1 ? pw * static_cast<double>(i) / static_cast<double>(n - 1) : pw / 2); };
    auto sy = [&](double v) { return top + ph - v / ymax * ph; };
    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
        << title << "</text>\n"
        << "<line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw << "\" y2=\"" << top + ph
        << "\" stroke=\"black\"/>\n"
        << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + ph << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << left - 5 << "\" y=\"" << top + 4 << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">"
        << format_fixed(ymax, 3) << "</text>\n";
    for (std::size_t i = 0; i < n; ++i)
        if (n <= 12 || i % ((n + 11) / 12) == 0)
            out << "<text x=\"" << format_fixed(sx(i), 2) << "\" y=\"" << top + ph + 15
                << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"9\">" << x_labels[i] << "</text>\n";
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        out << "<polyline fill=\"none\" stroke=\"" << kPalette[k % kPalette.size()] << "\" stroke-width=\"2\" points=\"";
        for (std::size_t i = 0; i < s.values.size() && i < n; ++i)
            out << (i ? " " : "") << format_fixed(sx(i), 2) << "," << format_fixed(sy(s.values[i]), 2);
        out << "\"/>\n"
            << "<text x=\"" << left + 10 << "\" y=\"" << height - 30 + 12 * static_cast<int>(k) - 12 * static_cast<int>(series.size()) + 24
            << "\" fill=\"" << kPalette[k % kPalette.size()] << "\" font-family=\"sans-serif\" font-size=\"11\">" << s.name
            << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

} // namespace chanscope::svg
