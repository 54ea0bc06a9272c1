#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "regionflow/clustering.hpp"
#include "regionflow/geometry.hpp"

namespace regionflow {

// `count` distinct "#rrggbb" colours; the hue sequence starts at a
// seed-dependent offset.
std::vector<std::string> categorical_palette(int count, std::uint64_t seed);

// SVG 1.1 document: one filled <path> per node polygon, coloured by
// community, plus a legend. Output bytes depend only on the inputs.
std::string render_choropleth(const std::vector<Geometry>& geometries, const Partition& partition,
                              std::uint64_t palette_seed = 0);

}  // namespace regionflow
