#pragma once

#include <cstdint>
#include <vector>

#include "regionflow/clustering.hpp"
#include "regionflow/network.hpp"

namespace regionflow {

// Weighted Newman modularity with 2m = sum_ij s_ij over ordered pairs
// (self-loops included): Q = sum_c e_c - resolution * a_c^2.
double modularity(const Matrix& flows, const Partition& partition, double resolution = 1.0);

struct LouvainResult {
  Partition partition;
  double quality = 0.0;              // modularity of the final partition
  int passes = 0;                    // local-moving + aggregation rounds that moved nodes
  std::vector<double> pass_quality;  // Q after each pass
};

LouvainResult louvain(const Matrix& flows, std::uint64_t seed, double resolution = 1.0);

struct WalkCorpus {
  std::vector<std::vector<int>> walks;
  int walk_length = 0;
  int walks_per_node = 0;
  double p = 1.0;
  double q = 1.0;
};

// Second-order (node2vec) walks; p = q = 1 gives uniform first-order walks.
// Walk r of node v is the (r * n + v)-th walk and draws from its own
// generator seeded with seed ^ index.
WalkCorpus random_walks(const Matrix& adjacency, int walk_length, int walks_per_node, double p, double q,
                        std::uint64_t seed);

struct SkipGramConfig {
  int dim = 32;
  int window = 10;
  int negative_samples = 5;
  int epochs = 1;
  double learning_rate = 0.025;
  std::uint64_t seed = 0;
};

// Skip-gram with negative sampling; noise distribution proportional to
// corpus frequency^0.75. Returns the input vectors (n x dim).
Matrix skipgram_embed(const WalkCorpus& corpus, std::size_t node_count, const SkipGramConfig& config);

}  // namespace regionflow
