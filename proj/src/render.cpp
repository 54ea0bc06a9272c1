#include "regionflow/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include "regionflow/errors.hpp"

namespace regionflow {
namespace {

std::string hsl_hex(double h, double s, double l) {
  auto channel = [&](double n) {
    double k = std::fmod(n + h * 12.0, 12.0);
    double a = s * std::min(l, 1.0 - l);
    double v = l - a * std::max(-1.0, std::min({k - 3.0, 9.0 - k, 1.0}));
    return static_cast<int>(std::lround(v * 255.0));
  };
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", channel(0), channel(8), channel(4));
  return buf;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  std::string s = buf;
  if (s == "-0.00") s = "0.00";
  return s;
}

}  // namespace

std::vector<std::string> categorical_palette(int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const double offset = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  constexpr double kGolden = 0.6180339887498949;
  std::vector<std::string> colors;
  std::set<std::string> used;
  for (int i = 0; colors.size() < static_cast<std::size_t>(count); ++i) {
    const double hue = std::fmod(offset + i * kGolden, 1.0);
    const double sat = 0.55 + 0.2 * ((i / 3) % 2);
    const double light = 0.42 + 0.14 * (i % 3);
    std::string c = hsl_hex(hue, sat, light);
    if (used.insert(c).second) colors.push_back(c);
  }
  return colors;
}

std::string render_choropleth(const std::vector<Geometry>& geometries, const Partition& partition,
                              std::uint64_t palette_seed) {
  if (geometries.size() < partition.size())
    throw ValidationError("render: " + std::to_string(partition.size() - geometries.size()) +
                          " partition nodes have no geometry");
  if (geometries.size() != partition.size())
    throw ValidationError("render: geometry count does not match partition length");
  double min_x = std::numeric_limits<double>::infinity(), min_y = min_x;
  double max_x = -min_x, max_y = -min_x;
  for (const auto& g : geometries)
    for (const auto& poly : g)
      for (const auto& ring : poly.rings)
        for (const auto& p : ring) {
          min_x = std::min(min_x, p.x), max_x = std::max(max_x, p.x);
          min_y = std::min(min_y, p.y), max_y = std::max(max_y, p.y);
        }
  if (!(max_x >= min_x)) throw ValidationError("render: no coordinates to draw");

  constexpr double kMapWidth = 800.0, kMargin = 10.0, kLegendWidth = 150.0, kRow = 18.0;
  const double span_x = std::max(max_x - min_x, 1e-12), span_y = std::max(max_y - min_y, 1e-12);
  const double scale = kMapWidth / span_x;
  const double map_height = span_y * scale;
  const double legend_height = kRow * partition.k() + kMargin;
  const double width = kMapWidth + 3 * kMargin + kLegendWidth;
  const double height = std::max(map_height, legend_height) + 2 * kMargin;
  const auto colors = categorical_palette(partition.k(), palette_seed);

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << num(width) << "\" height=\""
      << num(height) << "\" viewBox=\"0 0 " << num(width) << " " << num(height) << "\">\n"
      << "<g stroke=\"#333333\" stroke-width=\"0.5\" fill-rule=\"evenodd\">\n";
  for (std::size_t i = 0; i < geometries.size(); ++i) {
    svg << "<path fill=\"" << colors[partition.label(i) - 1] << "\" d=\"";
    bool first_ring = true;
    for (const auto& poly : geometries[i])
      for (const auto& ring : poly.rings) {
        if (!first_ring) svg << " ";
        first_ring = false;
        for (std::size_t k = 0; k < ring.size(); ++k) {
          const double x = kMargin + (ring[k].x - min_x) * scale;
          const double y = kMargin + (max_y - ring[k].y) * scale;
          svg << (k == 0 ? "M" : " L") << num(x) << " " << num(y);
        }
        svg << " Z";
      }
    svg << "\"/>\n";
  }
  svg << "</g>\n<g font-family=\"sans-serif\" font-size=\"12\">\n";
  const double lx = kMapWidth + 2 * kMargin;
  for (int c = 0; c < partition.k(); ++c) {
    const double y = kMargin + c * kRow;
    svg << "<rect x=\"" << num(lx) << "\" y=\"" << num(y) << "\" width=\"12\" height=\"12\" fill=\"" << colors[c]
        << "\" stroke=\"#333333\" stroke-width=\"0.5\"/>\n"
        << "<text x=\"" << num(lx + 18) << "\" y=\"" << num(y + 10) << "\">community " << (c + 1) << "</text>\n";
  }
  svg << "</g>\n</svg>\n";
  return svg.str();
}

}  // namespace regionflow
