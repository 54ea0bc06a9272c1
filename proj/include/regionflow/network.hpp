#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "regionflow/geometry.hpp"

namespace regionflow {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct FeatureScaling {
  std::string name;
  double min = 0.0;
  double max = 0.0;
  bool constant = false;  // min == max; every scaled value is 0.5
};

struct ScaledAttributes {
  Matrix values;  // n x m, entries in [0, 1]
  std::vector<FeatureScaling> features;
};

// Nodes of a spatial interaction network. Row/column order of every matrix
// follows node_ids.
struct SpatialNetwork {
  std::vector<std::string> node_ids;
  Matrix adjacency;   // binary, symmetric, zero diagonal
  Matrix flows;       // non-negative; symmetric after assembly
  Matrix attributes;  // n x m in [0, 1]
  std::vector<FeatureScaling> features;
  Contiguity rule = Contiguity::rook;
  std::vector<Geometry> geometries;  // empty when no polygons are attached

  std::size_t size() const { return node_ids.size(); }
  std::size_t feature_count() const { return static_cast<std::size_t>(attributes.cols()); }

  // Throws ValidationError on the first violated invariant.
  void validate() const;
};

class HopMatrix {
 public:
  static constexpr std::int32_t unreachable = std::numeric_limits<std::int32_t>::max();

  HopMatrix() = default;
  explicit HopMatrix(std::size_t n) : n_(n), hops_(n * n, unreachable) {}

  std::size_t size() const { return n_; }
  std::int32_t operator()(std::size_t i, std::size_t j) const { return hops_[i * n_ + j]; }
  std::int32_t& operator()(std::size_t i, std::size_t j) { return hops_[i * n_ + j]; }

 private:
  std::size_t n_ = 0;
  std::vector<std::int32_t> hops_;
};

// Breadth-first hop counts from every node; sources are processed in parallel.
HopMatrix compute_hops(const Matrix& adjacency);

// Component label per node (0-based, in order of first node) and the count.
std::vector<int> connected_components(const Matrix& adjacency, int* count = nullptr);

// Sparse adjacency lists in ascending node order.
std::vector<std::vector<int>> neighbor_lists(const Matrix& adjacency);

// CSV "origin,destination,weight". Duplicate rows are summed, then S + S^T
// is applied once when symmetrize is set.
Matrix load_flows(const std::filesystem::path& path, const std::vector<std::string>& node_ids,
                  bool symmetrize = true);

// Per-column min-max scaling to [0, 1]; constant columns become 0.5.
ScaledAttributes scale_attributes(const Matrix& raw, const std::vector<std::string>& names);

// CSV "id,<feature...>" with exactly one row per node.
ScaledAttributes load_attributes(const std::filesystem::path& path,
                                 const std::vector<std::string>& node_ids);

struct AssemblyOptions {
  Contiguity rule = Contiguity::rook;
  double tolerance = 0.0;
  bool symmetrize = true;
  bool connect_islands = false;
};

SpatialNetwork assemble_network(const std::filesystem::path& geojson,
                                const std::filesystem::path& flows,
                                const std::filesystem::path& attributes,
                                const AssemblyOptions& options = {});

// Network directory: nodes.csv, adjacency.csv, flows.csv, attributes.csv,
// meta.json and, when polygons are attached, geometry.geojson.
void save_network(const std::filesystem::path& dir, const SpatialNetwork& network);
SpatialNetwork load_network(const std::filesystem::path& dir);

}  // namespace regionflow
