#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "regionflow/baselines.hpp"
#include "regionflow/clustering.hpp"
#include "regionflow/embedding.hpp"
#include "regionflow/metrics.hpp"

namespace regionflow {

struct ClusterOptions {
  int k = 14;
  Linkage linkage = Linkage::ward;
};

struct DetectResult {
  TrainResult training;
  Partition partition;
  MetricsReport metrics;
  std::optional<std::string> svg;  // when the network carries polygons
};

// Train -> constrained clustering -> metrics -> map.
DetectResult run_detect(const SpatialNetwork& network, const ModelConfig& model, const ClusterOptions& cluster,
                        std::uint64_t palette_seed = 0);

enum class BaselineKind { louvain, kmeans, node2vec, deepwalk };

BaselineKind parse_baseline(const std::string& name);
std::string to_string(BaselineKind kind);

struct WalkOptions {
  int walk_length = 80;
  int walks_per_node = 10;
  double p = 1.0;
  double q = 1.0;
  SkipGramConfig skipgram;
};

struct BaselineOptions {
  std::uint64_t seed = 0;
  ClusterOptions cluster;
  double resolution = 1.0;  // louvain
  int kmeans_max_iter = 300;
  WalkOptions walks;
};

struct BaselineResult {
  Partition partition;
  std::optional<Matrix> embeddings;      // node2vec / deepwalk
  std::optional<LouvainResult> louvain;  // louvain
};

BaselineResult run_baseline(const SpatialNetwork& network, BaselineKind kind, const BaselineOptions& options);

// Node2vec / DeepWalk embeddings (deepwalk forces p = q = 1).
Matrix walk_embedding(const SpatialNetwork& network, BaselineKind kind, const BaselineOptions& options);

struct SweepRow {
  std::string method;
  int k = 0;
  std::string metric;
  std::optional<double> value;  // unset on skipped rows
  std::string note;
};

struct SweepInput {
  std::string method;
  std::optional<Matrix> embeddings;  // clustered with the constrained agglomerative stage
  bool use_kmeans = false;           // cluster the attributes with k-means instead
};

// One fixed embedding per method, clustered and scored for every K.
// Infeasible K values produce a single "skipped" row per method.
std::vector<SweepRow> run_sweep(const SpatialNetwork& network, const std::vector<SweepInput>& methods,
                                const std::vector<int>& k_values, Linkage linkage = Linkage::ward,
                                std::uint64_t seed = 0);

std::string sweep_to_csv(const std::vector<SweepRow>& rows);

std::string embeddings_to_csv(const std::vector<std::string>& node_ids, const Matrix& embeddings);
Matrix load_embeddings(const std::filesystem::path& path, const std::vector<std::string>& node_ids);
std::string loss_history_to_csv(const std::vector<double>& history);

}  // namespace regionflow
