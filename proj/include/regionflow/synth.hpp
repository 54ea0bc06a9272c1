#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "regionflow/clustering.hpp"
#include "regionflow/network.hpp"

namespace regionflow {

struct SynthConfig {
  int lattice_size = 10;  // rows
  int lattice_cols = 0;   // 0 means square
  int planted_communities = 4;
  double lambda_in = 8.0;
  double lambda_out = 1.0;
  int feature_dim = 4;
  double feature_sep = 0.4;
  double noise_sd = 0.1;
  std::uint64_t seed = 0;

  int rows() const { return lattice_size; }
  int cols() const { return lattice_cols > 0 ? lattice_cols : lattice_size; }
  void validate() const;
};

// Pairs of nodes within this many lattice hops exchange flow.
inline constexpr int kSynthFlowReach = 4;

struct SynthNetwork {
  SpatialNetwork network;
  Partition planted;
};

// Unit-square lattice cells with rook adjacency, planted rectangular blocks,
// Poisson flows between cells within kSynthFlowReach hops and block-specific
// Gaussian attributes scaled to [0, 1].
SynthNetwork generate(const SynthConfig& config);

// Writes the network directory plus planted.csv.
void save_synth(const std::filesystem::path& dir, const SynthNetwork& synth);

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b);
double adjusted_rand_index(const Partition& a, const Partition& b);

// Seeded region growing from K random seeds: repeatedly a uniformly chosen
// boundary edge (assigned, unassigned) hands its label to the unassigned end.
Partition random_contiguous_partition(const Matrix& adjacency, int k, std::uint64_t seed);

}  // namespace regionflow
