#include "maczac/plot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <ostream>

namespace maczac {

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;
constexpr std::array<const char*, 6> kColours{"#1f77b4", "#d62728", "#2ca02c",
                                              "#ff7f0e", "#9467bd", "#8c564b"};

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

void write_svg(std::ostream& os, const PlotSpec& spec, const std::vector<PlotSeries>& series) {
    auto usable = [&](double x, double y) {
        return std::isfinite(x) && std::isfinite(y) && (!spec.log_y || y > 0.0);
    };
    auto ty = [&](double y) { return spec.log_y ? std::log10(y) : y; };

    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : series) {
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
            if (!usable(s.x[i], s.y[i])) continue;
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, ty(s.y[i]));
            y1 = std::max(y1, ty(s.y[i]));
        }
    }
    if (!(x0 <= x1)) x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
    if (spec.bars && !spec.log_y) y0 = std::min(y0, 0.0);
    if (x1 == x0) x1 = x0 + 1.0;
    if (y1 == y0) y1 = y0 + 1.0;

    const double pw = kWidth - kLeft - kRight;
    const double ph = kHeight - kTop - kBottom;
    auto px = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
    auto py = [&](double y) { return kTop + (1.0 - (ty(y) - y0) / (y1 - y0)) * ph; };

    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
       << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
       << escape(spec.title) << "</text>\n";
    os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
       << "\" fill=\"none\" stroke=\"black\"/>\n";

    for (int i = 0; i <= 4; ++i) {
        const double fx = x0 + (x1 - x0) * i / 4.0;
        const double fy = y0 + (y1 - y0) * i / 4.0;
        const double sx = kLeft + pw * i / 4.0;
        const double sy = kTop + ph * (1.0 - i / 4.0);
        os << "<text x=\"" << sx << "\" y=\"" << kTop + ph + 18 << "\" text-anchor=\"middle\">" << fx
           << "</text>\n";
        os << "<text x=\"" << kLeft - 6 << "\" y=\"" << sy + 4 << "\" text-anchor=\"end\">"
           << (spec.log_y ? std::pow(10.0, fy) : fy) << "</text>\n";
    }
    os << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 16 << "\" text-anchor=\"middle\">"
       << escape(spec.x_label) << "</text>\n";
    os << "<text transform=\"translate(16," << kTop + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
       << escape(spec.y_label) << "</text>\n";

    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* colour = kColours[k % kColours.size()];
        const std::size_t n = std::min(s.x.size(), s.y.size());
        if (spec.bars && k == 0) {
            const double base = spec.log_y ? kTop + ph : py(0.0);
            const double w = n > 1 ? std::max(1.0, pw / static_cast<double>(n)) : pw;
            for (std::size_t i = 0; i < n; ++i) {
                if (!usable(s.x[i], s.y[i])) continue;
                const double top = py(s.y[i]);
                os << "<rect x=\"" << px(s.x[i]) - w / 2 << "\" y=\"" << top << "\" width=\"" << w
                   << "\" height=\"" << std::max(0.0, base - top) << "\" fill=\"" << colour << "\"/>\n";
            }
        } else {
            os << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
            for (std::size_t i = 0; i < n; ++i) {
                if (usable(s.x[i], s.y[i])) os << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
            }
            os << "\"/>\n";
        }
        os << "<text x=\"" << kLeft + 10 << "\" y=\"" << kTop + 16 + 14 * static_cast<double>(k)
           << "\" fill=\"" << colour << "\">" << escape(s.name) << "</text>\n";
    }
    os << "</svg>\n";
}

}  // namespace maczac
