#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pdl/montecarlo.hpp"

namespace pdl {

struct PlotSpec {
    std::string csv_text;               // sweep CSV contents
    std::vector<TheoryCurve> curves;
    std::optional<std::pair<double, double>> x_range, y_range;
    std::string title;
};

// Self-contained SVG: per-p mean r_f (stable runs) with standard-error bars
// and the requested curves. Throws ParseError / InvalidParams on bad input;
// output bytes depend only on the spec.
std::string render_plot(const PlotSpec& spec);

}  // namespace pdl
