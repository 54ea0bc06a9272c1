#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace regionflow {

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

// Closed ring; the closing vertex is not repeated.
using Ring = std::vector<Point>;

struct Polygon {
  std::vector<Ring> rings;  // rings[0] is the exterior, the rest are holes
  friend bool operator==(const Polygon&, const Polygon&) = default;
};

// One areal unit; more than one part for MultiPolygon features.
using Geometry = std::vector<Polygon>;

enum class Contiguity { rook, queen };

Contiguity parse_contiguity(const std::string& name);
std::string to_string(Contiguity rule);

struct GeometryTable {
  std::vector<std::string> node_ids;
  std::vector<Geometry> geometries;
};

// Reads a GeoJSON FeatureCollection. Every feature needs a string "id"
// property and a Polygon or MultiPolygon geometry.
GeometryTable load_geometries(const std::filesystem::path& path);
std::string geometries_to_geojson(const GeometryTable& table);
void save_geometries(const std::filesystem::path& path, const GeometryTable& table);

double signed_area(const Ring& ring);
// Exterior area minus holes, summed over parts.
double area(const Geometry& geometry);
Point centroid(const Geometry& geometry);

// Binary, symmetric, zero-diagonal contiguity matrix. Vertices are snapped to
// a grid of cell size `tolerance` (exact matching when 0). Rook adjacency
// needs a shared boundary segment (two consecutive snapped vertices in
// common), queen adjacency a single shared snapped vertex.
Eigen::MatrixXd derive_adjacency(const std::vector<Geometry>& geometries, Contiguity rule,
                                 double tolerance = 0.0);

// Links every node without neighbours to the node with the nearest centroid.
void connect_islands(Eigen::MatrixXd& adjacency, const std::vector<Geometry>& geometries);

}  // namespace regionflow
