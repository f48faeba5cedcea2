#pragma once

#include "gdnm/stats.hpp"

#include <string>

namespace gdnm {

enum class PlotStyle {
    Plain,
    /// Overlays c / sqrt(t) through the first point with t > 0.
    Tail,
    /// Overlays a horizontal line at derived["bound"].
    Eta,
};

/// Self-contained SVG: markers with CI whiskers, log x-axis when the positive
/// grid is dyadic, and series.reference drawn as a polyline when present.
std::string plot(const EstimateSeries& series, PlotStyle style = PlotStyle::Plain);

/// True when every grid value is positive and consecutive ratios are 2.
bool is_dyadic_grid(const EstimateSeries& series);

} // namespace gdnm
