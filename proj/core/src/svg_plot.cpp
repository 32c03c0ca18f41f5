// SPDX-License-Identifier: Apache-2.0
#include "beamscampi/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace beamscampi {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                    "#8c564b", "#e377c2", "#17becf", "#7f7f7f", "#bcbd22"};

std::string escape(const std::string& text) {
    std::string out;
    for (const char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", x);
    return buf;
}

}  // namespace

void write_log_plot_svg(std::ostream& out, const PlotSpec& spec, const std::vector<PlotSeries>& series) {
    double x_min = std::numeric_limits<double>::infinity();
    double x_max = -x_min;
    double y_min = x_min;
    double y_max = -x_min;
    for (const auto& s : series) {
        for (std::size_t k = 0; k < std::min(s.x.size(), s.y.size()); ++k) {
            if (!(s.y[k] > 0.0) || !std::isfinite(s.y[k])) {
                continue;
            }
            x_min = std::min(x_min, s.x[k]);
            x_max = std::max(x_max, s.x[k]);
            y_min = std::min(y_min, std::log10(s.y[k]));
            y_max = std::max(y_max, std::log10(s.y[k]));
        }
    }
    if (!std::isfinite(x_min)) {
        x_min = 0.0;
        x_max = 1.0;
        y_min = -1.0;
        y_max = 0.0;
    }
    if (x_max == x_min) {
        x_max = x_min + 1.0;
    }
    const double decade_lo = std::floor(y_min);
    double decade_hi = std::ceil(y_max);
    if (decade_hi == decade_lo) {
        decade_hi += 1.0;
    }

    const double left = 80.0;
    const double right = 200.0;
    const double top = 40.0;
    const double bottom = 60.0;
    const double w = spec.width - left - right;
    const double h = spec.height - top - bottom;
    auto px = [&](double x) { return left + (x - x_min) / (x_max - x_min) * w; };
    auto py = [&](double ly) { return top + (decade_hi - ly) / (decade_hi - decade_lo) * h; };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\""
        << spec.height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << num(left + w / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
        << escape(spec.title) << "</text>\n";

    for (double d = decade_lo; d <= decade_hi + 1e-9; d += 1.0) {
        const double y = py(d);
        out << "<line x1=\"" << num(left) << "\" y1=\"" << num(y) << "\" x2=\"" << num(left + w)
            << "\" y2=\"" << num(y) << "\" stroke=\"#ddd\"/>\n";
        out << "<text x=\"" << num(left - 8) << "\" y=\"" << num(y + 4)
            << "\" text-anchor=\"end\">1e" << static_cast<int>(d) << "</text>\n";
    }
    std::vector<double> ticks;
    for (const auto& s : series) {
        ticks.insert(ticks.end(), s.x.begin(), s.x.end());
    }
    std::sort(ticks.begin(), ticks.end());
    ticks.erase(std::unique(ticks.begin(), ticks.end()), ticks.end());
    for (const double x : ticks) {
        out << "<line x1=\"" << num(px(x)) << "\" y1=\"" << num(top) << "\" x2=\"" << num(px(x))
            << "\" y2=\"" << num(top + h) << "\" stroke=\"#eee\"/>\n";
        out << "<text x=\"" << num(px(x)) << "\" y=\"" << num(top + h + 18) << "\" text-anchor=\"middle\">"
            << x << "</text>\n";
    }
    out << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(w) << "\" height=\""
        << num(h) << "\" fill=\"none\" stroke=\"black\"/>\n";
    out << "<text x=\"" << num(left + w / 2) << "\" y=\"" << num(spec.height - 16.0)
        << "\" text-anchor=\"middle\">" << escape(spec.x_label) << "</text>\n";
    out << "<text transform=\"translate(20," << num(top + h / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
        << escape(spec.y_label) << "</text>\n";

    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto& s = series[i];
        const char* color = kPalette[i % (sizeof kPalette / sizeof kPalette[0])];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
        for (std::size_t k = 0; k < std::min(s.x.size(), s.y.size()); ++k) {
            if (s.y[k] > 0.0 && std::isfinite(s.y[k])) {
                out << num(px(s.x[k])) << ',' << num(py(std::log10(s.y[k]))) << ' ';
            }
        }
        out << "\"/>\n";
        for (std::size_t k = 0; k < std::min(s.x.size(), s.y.size()); ++k) {
            if (s.y[k] > 0.0 && std::isfinite(s.y[k])) {
                out << "<circle cx=\"" << num(px(s.x[k])) << "\" cy=\"" << num(py(std::log10(s.y[k])))
                    << "\" r=\"3\" fill=\"" << color << "\"/>\n";
            }
        }
        const double ly = top + 14.0 + 18.0 * static_cast<double>(i);
        out << "<line x1=\"" << num(left + w + 12) << "\" y1=\"" << num(ly) << "\" x2=\"" << num(left + w + 36)
            << "\" y2=\"" << num(ly) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << num(left + w + 42) << "\" y=\"" << num(ly + 4) << "\">" << escape(s.label)
            << "</text>\n";
    }
    out << "</svg>\n";
}

}  // namespace beamscampi
