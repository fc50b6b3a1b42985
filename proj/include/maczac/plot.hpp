#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace maczac {

struct PlotSeries {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

struct PlotSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_y = false;
    bool bars = false;  // draw the first series as a histogram
};

/// Minimal standalone SVG chart. Non-finite points, and non-positive points
/// on a log axis, are skipped.
void write_svg(std::ostream& os, const PlotSpec& spec, const std::vector<PlotSeries>& series);

}  // namespace maczac
