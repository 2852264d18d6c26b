#include "feverscreen/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "feverscreen/error.hpp"

namespace feverscreen {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 480.0;
constexpr double kMarginLeft = 70.0;
constexpr double kMarginRight = 20.0;
constexpr double kMarginTop = 40.0;
constexpr double kMarginBottom = 50.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#8c564b", "#e377c2"};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

std::string escape(const std::string& text) {
    std::string out;
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

std::string svg_line_chart(const std::vector<SvgSeries>& series,
                           const std::string& title,
                           const std::string& x_label,
                           const std::string& y_label) {
    double x_min = 0.0;
    double x_max = 1.0;
    double y_min = 0.0;
    double y_max = 1.0;
    bool first = true;
    for (const SvgSeries& s : series) {
        for (const auto& [x, y] : s.points) {
            if (first) {
                x_min = x_max = x;
                y_min = y_max = y;
                first = false;
            } else {
                x_min = std::min(x_min, x);
                x_max = std::max(x_max, x);
                y_min = std::min(y_min, y);
                y_max = std::max(y_max, y);
            }
        }
    }
    if (first) throw Error("svg_line_chart: no points");
    if (x_max == x_min) x_max = x_min + 1.0;
    if (y_max == y_min) y_max = y_min + 1.0;

    double plot_w = kWidth - kMarginLeft - kMarginRight;
    double plot_h = kHeight - kMarginTop - kMarginBottom;
    auto px = [&](double x) { return kMarginLeft + (x - x_min) / (x_max - x_min) * plot_w; };
    auto py = [&](double y) { return kHeight - kMarginBottom - (y - y_min) / (y_max - y_min) * plot_h; };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
        << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " "
        << kHeight << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << num(kWidth / 2) << "\" y=\"24\" text-anchor=\"middle\" "
           "font-family=\"sans-serif\" font-size=\"16\">"
        << escape(title) << "</text>\n";

    // axes
    out << "<line x1=\"" << num(kMarginLeft) << "\" y1=\"" << num(kMarginTop)
        << "\" x2=\"" << num(kMarginLeft) << "\" y2=\""
        << num(kHeight - kMarginBottom) << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << num(kMarginLeft) << "\" y1=\""
        << num(kHeight - kMarginBottom) << "\" x2=\"" << num(kWidth - kMarginRight)
        << "\" y2=\"" << num(kHeight - kMarginBottom) << "\" stroke=\"black\"/>\n";

    constexpr int kTicks = 5;
    for (int t = 0; t <= kTicks; ++t) {
        double fx = x_min + (x_max - x_min) * t / kTicks;
        double fy = y_min + (y_max - y_min) * t / kTicks;
        out << "<line x1=\"" << num(px(fx)) << "\" y1=\""
            << num(kHeight - kMarginBottom) << "\" x2=\"" << num(px(fx))
            << "\" y2=\"" << num(kHeight - kMarginBottom + 5) << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << num(px(fx)) << "\" y=\""
            << num(kHeight - kMarginBottom + 18)
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
               "font-size=\"11\">"
            << tick_label(fx) << "</text>\n";
        out << "<line x1=\"" << num(kMarginLeft - 5) << "\" y1=\"" << num(py(fy))
            << "\" x2=\"" << num(kMarginLeft) << "\" y2=\"" << num(py(fy))
            << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << num(kMarginLeft - 8) << "\" y=\""
            << num(py(fy) + 4)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
            << tick_label(fy) << "</text>\n";
    }
    out << "<text x=\"" << num(kMarginLeft + plot_w / 2) << "\" y=\""
        << num(kHeight - 12)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
        << escape(x_label) << "</text>\n";
    out << "<text x=\"16\" y=\"" << num(kMarginTop + plot_h / 2)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
           "transform=\"rotate(-90 16 "
        << num(kMarginTop + plot_h / 2) << ")\">" << escape(y_label)
        << "</text>\n";

    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = kPalette[s % (sizeof(kPalette) / sizeof(kPalette[0]))];
        if (series[s].points.empty()) continue;
        out << "<polyline fill=\"none\" stroke=\"" << color
            << "\" stroke-width=\"1.5\" points=\"";
        for (const auto& [x, y] : series[s].points) {
            out << num(px(x)) << ',' << num(py(y)) << ' ';
        }
        out << "\"/>\n";
        double ly = kMarginTop + 14.0 * static_cast<double>(s);
        out << "<line x1=\"" << num(kWidth - kMarginRight - 110) << "\" y1=\""
            << num(ly) << "\" x2=\"" << num(kWidth - kMarginRight - 90)
            << "\" y2=\"" << num(ly) << "\" stroke=\"" << color
            << "\" stroke-width=\"1.5\"/>\n";
        out << "<text x=\"" << num(kWidth - kMarginRight - 85) << "\" y=\""
            << num(ly + 4)
            << "\" font-family=\"sans-serif\" font-size=\"11\">"
            << escape(series[s].label) << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace feverscreen
