#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "regionflow/network.hpp"

namespace regionflow {

// Community label per node in 1..K, numbered by first appearance.
class Partition {
 public:
  Partition() = default;
  // Accepts arbitrary integer labels and renumbers them by first appearance.
  explicit Partition(const std::vector<int>& raw_labels);

  const std::vector<int>& labels() const { return labels_; }
  int label(std::size_t node) const { return labels_[node]; }
  std::size_t size() const { return labels_.size(); }
  int k() const { return k_; }
  // Node indices per community; members()[c - 1] lists community c.
  std::vector<std::vector<int>> members() const;

  friend bool operator==(const Partition&, const Partition&) = default;

 private:
  std::vector<int> labels_;
  int k_ = 0;
};

enum class Linkage { ward, average, complete };

Linkage parse_linkage(const std::string& name);
std::string to_string(Linkage linkage);

struct AgglomerativeResult {
  Partition partition;
  // Linkage value of each merge in order. For ward this is the increase in
  // total within-cluster sum of squares.
  std::vector<double> merge_costs;
};

// Bottom-up merging restricted to clusters joined by an adjacency edge.
// Throws InfeasibleError if K is below the number of connected components and
// ValidationError if K is outside [1, n].
AgglomerativeResult constrained_agglomerative_trace(const Matrix& embeddings, const Matrix& adjacency, int k,
                                                    Linkage linkage = Linkage::ward);
Partition constrained_agglomerative(const Matrix& embeddings, const Matrix& adjacency, int k,
                                    Linkage linkage = Linkage::ward);

struct KMeansResult {
  Partition partition;
  Matrix centroids;                  // K x d, rows follow partition labels
  std::vector<double> inertia_trace;  // after every assignment step
  int iterations = 0;
};

KMeansResult kmeans_trace(const Matrix& points, int k, std::uint64_t seed, int max_iter = 300);
Partition kmeans(const Matrix& points, int k, std::uint64_t seed, int max_iter = 300);

// Sum of squared distances to community means.
double within_sum_of_squares(const Matrix& points, const Partition& partition);

// Partition CSV: "node_id,community".
std::string partition_to_csv(const std::vector<std::string>& node_ids, const Partition& partition);
void save_partition(const std::filesystem::path& path, const std::vector<std::string>& node_ids,
                    const Partition& partition);
Partition load_partition(const std::filesystem::path& path, const std::vector<std::string>& node_ids);

}  // namespace regionflow
