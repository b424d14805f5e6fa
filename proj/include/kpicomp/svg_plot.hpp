#pragma once

#include <string>
#include <utility>
#include <vector>

namespace kpicomp {

struct PlotSeries {
    std::string label;
    std::vector<std::pair<double, double>> points;
};

struct PlotSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<PlotSeries> series;
};

/// Minimal static line chart with markers and a legend.
std::string render_svg(const PlotSpec& plot);
void write_svg(const PlotSpec& plot, const std::string& path);

}  // namespace kpicomp
