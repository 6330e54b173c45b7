#pragma once

#include <string>
#include <vector>

namespace cogwifi::svg {

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

/// Self-contained SVG line chart with axes, ticks and a legend.
std::string line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                       const std::vector<Series>& series);

/// Empirical CDF of each sample set, drawn as step lines.
std::string cdf_chart(const std::string& title, const std::string& x_label, const std::vector<Series>& samples);

} // namespace cogwifi::svg
