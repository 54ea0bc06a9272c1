#include "regionflow/geometry.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <utility>

#include "json.hpp"
#include "regionflow/errors.hpp"
#include "regionflow/io.hpp"

namespace regionflow {
namespace {

using nlohmann::json;

Ring parse_ring(const json& coords, std::size_t feature) {
  if (!coords.is_array())
    throw ValidationError("feature " + std::to_string(feature) + ": ring is not an array");
  Ring ring;
  for (const auto& pos : coords) {
    if (!pos.is_array() || pos.size() < 2 || !pos[0].is_number() || !pos[1].is_number())
      throw ValidationError("feature " + std::to_string(feature) + ": malformed position");
    ring.push_back({pos[0].get<double>(), pos[1].get<double>()});
  }
  if (ring.size() > 1 && ring.front() == ring.back()) ring.pop_back();
  if (ring.size() < 3)
    throw ValidationError("feature " + std::to_string(feature) + ": ring has fewer than 3 vertices");
  return ring;
}

Polygon parse_polygon(const json& coords, std::size_t feature) {
  if (!coords.is_array() || coords.empty())
    throw ValidationError("feature " + std::to_string(feature) + ": empty polygon");
  Polygon poly;
  for (const auto& ring : coords) poly.rings.push_back(parse_ring(ring, feature));
  return poly;
}

json ring_to_json(const Ring& ring) {
  json out = json::array();
  for (const auto& p : ring) out.push_back({p.x, p.y});
  if (!ring.empty()) out.push_back({ring.front().x, ring.front().y});
  return out;
}

using SnapKey = std::pair<double, double>;

SnapKey snap(const Point& p, double tolerance) {
  if (tolerance > 0.0) return {std::round(p.x / tolerance) + 0.0, std::round(p.y / tolerance) + 0.0};
  return {p.x + 0.0, p.y + 0.0};
}

}  // namespace

Contiguity parse_contiguity(const std::string& name) {
  if (name == "rook") return Contiguity::rook;
  if (name == "queen") return Contiguity::queen;
  throw ValidationError("unknown contiguity rule '" + name + "' (expected rook or queen)");
}

std::string to_string(Contiguity rule) { return rule == Contiguity::rook ? "rook" : "queen"; }

GeometryTable load_geometries(const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(io::read_text(path));
  } catch (const json::parse_error& e) {
    throw ValidationError(path.string() + ": malformed JSON: " + e.what());
  }
  if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" || !doc.contains("features") ||
      !doc["features"].is_array())
    throw ValidationError(path.string() + ": not a GeoJSON FeatureCollection");

  GeometryTable table;
  std::set<std::string> seen;
  const auto& features = doc["features"];
  for (std::size_t i = 0; i < features.size(); ++i) {
    const auto& f = features[i];
    const json* props = f.contains("properties") ? &f["properties"] : nullptr;
    if (!props || !props->is_object() || !props->contains("id") || !(*props)["id"].is_string())
      throw ValidationError("feature " + std::to_string(i) + ": missing string property \"id\"");
    std::string id = (*props)["id"].get<std::string>();
    if (!seen.insert(id).second)
      throw ValidationError("feature " + std::to_string(i) + ": duplicate id '" + id + "'");
    if (!f.contains("geometry") || !f["geometry"].is_object())
      throw ValidationError("feature " + std::to_string(i) + ": missing geometry");
    const auto& g = f["geometry"];
    std::string type = g.value("type", "");
    if (!g.contains("coordinates"))
      throw ValidationError("feature " + std::to_string(i) + ": geometry without coordinates");
    Geometry geom;
    if (type == "Polygon") {
      geom.push_back(parse_polygon(g["coordinates"], i));
    } else if (type == "MultiPolygon") {
      if (!g["coordinates"].is_array() || g["coordinates"].empty())
        throw ValidationError("feature " + std::to_string(i) + ": empty MultiPolygon");
      for (const auto& part : g["coordinates"]) geom.push_back(parse_polygon(part, i));
    } else {
      throw ValidationError("feature " + std::to_string(i) + ": non-areal geometry type '" + type + "'");
    }
    table.node_ids.push_back(std::move(id));
    table.geometries.push_back(std::move(geom));
  }
  return table;
}

std::string geometries_to_geojson(const GeometryTable& table) {
  json features = json::array();
  for (std::size_t i = 0; i < table.node_ids.size(); ++i) {
    const Geometry& geom = table.geometries.at(i);
    json geometry;
    if (geom.size() == 1) {
      json rings = json::array();
      for (const auto& r : geom[0].rings) rings.push_back(ring_to_json(r));
      geometry = {{"type", "Polygon"}, {"coordinates", rings}};
    } else {
      json parts = json::array();
      for (const auto& poly : geom) {
        json rings = json::array();
        for (const auto& r : poly.rings) rings.push_back(ring_to_json(r));
        parts.push_back(rings);
      }
      geometry = {{"type", "MultiPolygon"}, {"coordinates", parts}};
    }
    features.push_back({{"type", "Feature"},
                        {"properties", {{"id", table.node_ids[i]}}},
                        {"geometry", geometry}});
  }
  json doc = {{"type", "FeatureCollection"}, {"features", features}};
  return doc.dump() + "\n";
}

void save_geometries(const std::filesystem::path& path, const GeometryTable& table) {
  io::write_text(path, geometries_to_geojson(table));
}

double signed_area(const Ring& ring) {
  double twice = 0.0;
  for (std::size_t i = 0; i < ring.size(); ++i) {
    const Point& a = ring[i];
    const Point& b = ring[(i + 1) % ring.size()];
    twice += a.x * b.y - b.x * a.y;
  }
  return 0.5 * twice;
}

double area(const Geometry& geometry) {
  double total = 0.0;
  for (const auto& poly : geometry) {
    for (std::size_t r = 0; r < poly.rings.size(); ++r) {
      double a = std::abs(signed_area(poly.rings[r]));
      total += r == 0 ? a : -a;
    }
  }
  return total;
}

Point centroid(const Geometry& geometry) {
  double cx = 0.0, cy = 0.0, total = 0.0;
  for (const auto& poly : geometry) {
    if (poly.rings.empty()) continue;
    const Ring& ring = poly.rings[0];
    double a = signed_area(ring);
    double px = 0.0, py = 0.0;
    for (std::size_t i = 0; i < ring.size(); ++i) {
      const Point& p = ring[i];
      const Point& q = ring[(i + 1) % ring.size()];
      double cross = p.x * q.y - q.x * p.y;
      px += (p.x + q.x) * cross;
      py += (p.y + q.y) * cross;
    }
    if (a != 0.0) {
      cx += px / 6.0;
      cy += py / 6.0;
      total += a;
    }
  }
  if (total == 0.0) return {};
  return {cx / total, cy / total};
}

Eigen::MatrixXd derive_adjacency(const std::vector<Geometry>& geometries, Contiguity rule,
                                 double tolerance) {
  if (geometries.empty()) throw ValidationError("derive_adjacency: no polygons");
  if (!(tolerance >= 0.0) || !std::isfinite(tolerance))
    throw ValidationError("derive_adjacency: tolerance must be a finite non-negative number");
  const auto n = static_cast<Eigen::Index>(geometries.size());

  std::map<SnapKey, std::set<Eigen::Index>> by_vertex;
  std::map<std::pair<SnapKey, SnapKey>, std::set<Eigen::Index>> by_segment;
  for (Eigen::Index node = 0; node < n; ++node) {
    const Geometry& geom = geometries[static_cast<std::size_t>(node)];
    if (geom.empty()) throw ValidationError("polygon " + std::to_string(node) + " has no parts");
    for (const auto& poly : geom) {
      if (poly.rings.empty() || std::abs(signed_area(poly.rings[0])) == 0.0)
        throw ValidationError("polygon " + std::to_string(node) + " is degenerate (zero area)");
      for (const auto& ring : poly.rings) {
        for (std::size_t i = 0; i < ring.size(); ++i) {
          SnapKey a = snap(ring[i], tolerance);
          SnapKey b = snap(ring[(i + 1) % ring.size()], tolerance);
          by_vertex[a].insert(node);
          if (a == b) continue;
          by_segment[std::minmax(a, b)].insert(node);
        }
      }
    }
  }

  Eigen::MatrixXd adjacency = Eigen::MatrixXd::Zero(n, n);
  auto link_all = [&](const std::set<Eigen::Index>& nodes) {
    for (auto i = nodes.begin(); i != nodes.end(); ++i)
      for (auto j = std::next(i); j != nodes.end(); ++j) adjacency(*i, *j) = adjacency(*j, *i) = 1.0;
  };
  for (const auto& [seg, nodes] : by_segment) link_all(nodes);
  if (rule == Contiguity::queen)
    for (const auto& [v, nodes] : by_vertex) link_all(nodes);
  return adjacency;
}

void connect_islands(Eigen::MatrixXd& adjacency, const std::vector<Geometry>& geometries) {
  const Eigen::Index n = adjacency.rows();
  if (static_cast<std::size_t>(n) != geometries.size())
    throw ValidationError("connect_islands: geometry count does not match adjacency");
  std::vector<Point> centers;
  for (const auto& g : geometries) centers.push_back(centroid(g));
  Eigen::VectorXd degree = adjacency.rowwise().sum();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (degree(i) > 0.0 || n < 2) continue;
    Eigen::Index best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      double dx = centers[i].x - centers[j].x, dy = centers[i].y - centers[j].y;
      double d = dx * dx + dy * dy;
      if (d < best_d) best_d = d, best = j;
    }
    adjacency(i, best) = adjacency(best, i) = 1.0;
  }
}

}  // namespace regionflow
