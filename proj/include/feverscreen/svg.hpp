#pragma once

#include <string>
#include <utility>
#include <vector>

namespace feverscreen {

struct SvgSeries {
    std::string label;
    std::vector<std::pair<double, double>> points;
};

// Dependency-free line chart, deterministic text output.
std::string svg_line_chart(const std::vector<SvgSeries>& series,
                           const std::string& title,
                           const std::string& x_label,
                           const std::string& y_label);

}  // namespace feverscreen
