#pragma once

#include <string>
#include <vector>

#include "tdmix/cartography.hpp"

namespace tdmix {

// Scatter plot of the data map: variability on x (0..0.5), confidence on y
// (0..1), one marker per sample colored by region, with axes and a legend.
// Byte-deterministic for a given point list.
std::string render_datamap_svg(const std::vector<DatamapPoint>& points);

}  // namespace tdmix
