// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace beamscampi {

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;  // plotted on a log10 axis; nonpositive values are skipped
};

struct PlotSpec {
    std::string title;
    std::string x_label = "SNR (dB)";
    std::string y_label = "NMSE";
    int width = 720;
    int height = 520;
};

void write_log_plot_svg(std::ostream& out, const PlotSpec& spec, const std::vector<PlotSeries>& series);

}  // namespace beamscampi
