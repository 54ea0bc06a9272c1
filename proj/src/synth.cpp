#include "regionflow/synth.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "regionflow/errors.hpp"
#include "regionflow/io.hpp"

namespace regionflow {
namespace {

struct Tiling {
  int block_rows = 1;
  int block_cols = 1;
};

Tiling choose_tiling(int rows, int cols, int k) {
  Tiling best{0, 0};
  double best_aspect = 0.0;
  for (int br = 1; br <= k; ++br) {
    if (k % br) continue;
    const int bc = k / br;
    if (br > rows || bc > cols) continue;
    const double aspect = std::abs(std::log((static_cast<double>(rows) / br) / (static_cast<double>(cols) / bc)));
    if (best.block_rows == 0 || aspect < best_aspect - 1e-12) best = {br, bc}, best_aspect = aspect;
  }
  if (best.block_rows == 0)
    throw ValidationError("synth: " + std::to_string(k) + " planted communities cannot tile a " +
                          std::to_string(rows) + "x" + std::to_string(cols) + " lattice");
  return best;
}

std::string cell_id(int index, int n) {
  const int width = std::max(3, static_cast<int>(std::to_string(std::max(n - 1, 0)).size()));
  std::string s = std::to_string(index);
  return "t" + std::string(static_cast<std::size_t>(std::max(0, width - static_cast<int>(s.size()))), '0') + s;
}

}  // namespace

void SynthConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ValidationError("synth: " + msg); };
  if (lattice_size < 1 || lattice_cols < 0) fail("lattice size must be positive");
  if (planted_communities < 1) fail("planted_communities must be >= 1");
  if (!(lambda_in >= 0.0) || !(lambda_out >= 0.0)) fail("Poisson means must be non-negative");
  if (feature_dim < 1) fail("feature_dim must be >= 1");
  if (!(feature_sep >= 0.0)) fail("feature_sep must be >= 0");
  if (!(noise_sd >= 0.0)) fail("noise_sd must be >= 0");
}

SynthNetwork generate(const SynthConfig& config) {
  config.validate();
  const int rows = config.rows(), cols = config.cols(), n = rows * cols;
  const Tiling tiling = choose_tiling(rows, cols, config.planted_communities);
  std::mt19937_64 rng(config.seed);

  SynthNetwork out;
  SpatialNetwork& net = out.network;
  std::vector<int> block(static_cast<std::size_t>(n));
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      const int i = r * cols + c;
      net.node_ids.push_back(cell_id(i, n));
      block[i] = (r * tiling.block_rows / rows) * tiling.block_cols + (c * tiling.block_cols / cols);
      Ring ring{{double(c), double(r)}, {double(c + 1), double(r)}, {double(c + 1), double(r + 1)}, {double(c), double(r + 1)}};
      net.geometries.push_back(Geometry{Polygon{{ring}}});
    }
  out.planted = Partition(block);

  net.adjacency = Matrix::Zero(n, n);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      const int i = r * cols + c;
      if (c + 1 < cols) net.adjacency(i, i + 1) = net.adjacency(i + 1, i) = 1.0;
      if (r + 1 < rows) net.adjacency(i, i + cols) = net.adjacency(i + cols, i) = 1.0;
    }

  net.flows = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const int hop = std::abs(i / cols - j / cols) + std::abs(i % cols - j % cols);
      if (hop > kSynthFlowReach) continue;
      const double lambda = block[i] == block[j] ? config.lambda_in : config.lambda_out;
      if (lambda <= 0.0) continue;
      std::poisson_distribution<int> draw(lambda);
      net.flows(i, j) = net.flows(j, i) = draw(rng);
    }

  // Block means: block b moves feature (b mod m) by +-sep/sqrt(2) from 0.5,
  // so blocks on different features sit feature_sep apart.
  const int m = config.feature_dim;
  std::normal_distribution<double> noise(0.0, 1.0);
  Matrix raw(n, m);
  const double shift = config.feature_sep / std::sqrt(2.0);
  for (int i = 0; i < n; ++i)
    for (int f = 0; f < m; ++f) {
      const int b = block[i];
      double mean = 0.5;
      if (b % m == f) mean += ((b / m) % 2 == 0 ? shift : -shift);
      raw(i, f) = std::clamp(mean + config.noise_sd * noise(rng), 0.0, 1.0);
    }
  std::vector<std::string> names;
  for (int f = 0; f < m; ++f) names.push_back("f" + std::to_string(f));
  auto scaled = scale_attributes(raw, names);
  net.attributes = std::move(scaled.values);
  net.features = std::move(scaled.features);
  net.rule = Contiguity::rook;
  net.validate();
  return out;
}

void save_synth(const std::filesystem::path& dir, const SynthNetwork& synth) {
  save_network(dir, synth.network);
  save_partition(dir / "planted.csv", synth.network.node_ids, synth.planted);
}

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) throw ValidationError("adjusted_rand_index: labelings differ in length");
  const double n = static_cast<double>(a.size());
  std::map<std::pair<int, int>, double> cells;
  std::map<int, double> rows, cols;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cells[{a[i], b[i]}] += 1.0;
    rows[a[i]] += 1.0;
    cols[b[i]] += 1.0;
  }
  auto pairs = [](double x) { return x * (x - 1.0) / 2.0; };
  double index = 0.0, sum_a = 0.0, sum_b = 0.0;
  for (const auto& [key, count] : cells) index += pairs(count);
  for (const auto& [key, count] : rows) sum_a += pairs(count);
  for (const auto& [key, count] : cols) sum_b += pairs(count);
  const double total = pairs(n);
  if (total == 0.0) return 1.0;
  const double expected = sum_a * sum_b / total;
  const double max_index = 0.5 * (sum_a + sum_b);
  if (max_index == expected) return 1.0;  // both labelings trivial in the same way
  return (index - expected) / (max_index - expected);
}

double adjusted_rand_index(const Partition& a, const Partition& b) {
  return adjusted_rand_index(a.labels(), b.labels());
}

Partition random_contiguous_partition(const Matrix& adjacency, int k, std::uint64_t seed) {
  const Eigen::Index n = adjacency.rows();
  if (k < 1 || k > n) throw ValidationError("random_contiguous_partition: K outside [1, n]");
  int components = 0;
  connected_components(adjacency, &components);
  if (components > k) throw InfeasibleError("random_contiguous_partition: K below component count");
  const auto neighbors = neighbor_lists(adjacency);
  std::mt19937_64 rng(seed);
  std::vector<int> label(static_cast<std::size_t>(n), -1);
  std::vector<int> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) order[i] = static_cast<int>(i);
  std::shuffle(order.begin(), order.end(), rng);

  // One seed per component first so every component gets covered.
  std::vector<int> comp = connected_components(adjacency);
  std::vector<bool> comp_seeded(static_cast<std::size_t>(components), false);
  int next = 0;
  for (int v : order)
    if (!comp_seeded[comp[v]]) comp_seeded[comp[v]] = true, label[v] = next++;
  for (int v : order)
    if (next < k && label[v] < 0) label[v] = next++;

  std::vector<std::pair<int, int>> frontier;
  for (Eigen::Index v = 0; v < n; ++v)
    if (label[v] >= 0)
      for (int u : neighbors[v])
        if (label[u] < 0) frontier.emplace_back(static_cast<int>(v), u);
  while (!frontier.empty()) {
    std::uniform_int_distribution<std::size_t> pick(0, frontier.size() - 1);
    const std::size_t idx = pick(rng);
    auto [from, to] = frontier[idx];
    frontier[idx] = frontier.back();
    frontier.pop_back();
    if (label[to] >= 0) continue;
    label[to] = label[from];
    for (int u : neighbors[to])
      if (label[u] < 0) frontier.emplace_back(to, u);
  }
  return Partition(label);
}

}  // namespace regionflow
