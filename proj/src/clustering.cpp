#include "regionflow/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

#include "regionflow/errors.hpp"
#include "regionflow/io.hpp"

namespace regionflow {

Partition::Partition(const std::vector<int>& raw_labels) {
  std::unordered_map<int, int> remap;
  labels_.reserve(raw_labels.size());
  for (int raw : raw_labels) {
    auto [it, inserted] = remap.emplace(raw, static_cast<int>(remap.size()) + 1);
    labels_.push_back(it->second);
  }
  k_ = static_cast<int>(remap.size());
}

std::vector<std::vector<int>> Partition::members() const {
  std::vector<std::vector<int>> out(static_cast<std::size_t>(k_));
  for (std::size_t i = 0; i < labels_.size(); ++i) out[labels_[i] - 1].push_back(static_cast<int>(i));
  return out;
}

Linkage parse_linkage(const std::string& name) {
  if (name == "ward") return Linkage::ward;
  if (name == "average") return Linkage::average;
  if (name == "complete") return Linkage::complete;
  throw ValidationError("unknown linkage '" + name + "' (expected ward, average or complete)");
}

std::string to_string(Linkage linkage) {
  switch (linkage) {
    case Linkage::ward: return "ward";
    case Linkage::average: return "average";
    case Linkage::complete: return "complete";
  }
  return "ward";
}

AgglomerativeResult constrained_agglomerative_trace(const Matrix& embeddings, const Matrix& adjacency, int k,
                                                    Linkage linkage) {
  const Eigen::Index n = embeddings.rows();
  if (adjacency.rows() != n || adjacency.cols() != n)
    throw ValidationError("agglomerative: adjacency does not match embedding rows");
  if (k < 1 || k > n)
    throw ValidationError("agglomerative: K = " + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
  int components = 0;
  connected_components(adjacency, &components);
  if (k < components)
    throw InfeasibleError("agglomerative: K = " + std::to_string(k) + " is below the " + std::to_string(components) +
                          " connected components of the adjacency graph");

  // Lance-Williams over a dense dissimilarity matrix. Ward works on squared
  // Euclidean distances, where d(A, B) = 2 nA nB / (nA + nB) |cA - cB|^2.
  Matrix dist(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) {
      double sq = (embeddings.row(i) - embeddings.row(j)).squaredNorm();
      dist(i, j) = dist(j, i) = linkage == Linkage::ward ? sq : std::sqrt(sq);
    }

  std::vector<std::set<Eigen::Index>> neighbors(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j && adjacency(i, j) != 0.0) neighbors[i].insert(j);
  std::vector<double> size(static_cast<std::size_t>(n), 1.0);
  std::vector<bool> active(static_cast<std::size_t>(n), true);
  std::vector<int> owner(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) owner[i] = static_cast<int>(i);

  AgglomerativeResult result;
  for (Eigen::Index clusters = n; clusters > k; --clusters) {
    Eigen::Index best_a = -1, best_b = -1;
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index a = 0; a < n; ++a) {
      if (!active[a]) continue;
      for (Eigen::Index b : neighbors[a]) {
        if (b <= a) continue;
        if (dist(a, b) < best) best = dist(a, b), best_a = a, best_b = b;
      }
    }
    if (best_a < 0)
      throw InfeasibleError("agglomerative: no adjacent clusters left to merge");

    const double na = size[best_a], nb = size[best_b];
    for (Eigen::Index c = 0; c < n; ++c) {
      if (!active[c] || c == best_a || c == best_b) continue;
      const double nc = size[c];
      double merged = 0.0;
      switch (linkage) {
        case Linkage::ward:
          merged = ((na + nc) * dist(best_a, c) + (nb + nc) * dist(best_b, c) - nc * dist(best_a, best_b)) /
                   (na + nb + nc);
          break;
        case Linkage::average:
          merged = (na * dist(best_a, c) + nb * dist(best_b, c)) / (na + nb);
          break;
        case Linkage::complete:
          merged = std::max(dist(best_a, c), dist(best_b, c));
          break;
      }
      dist(best_a, c) = dist(c, best_a) = merged;
    }
    result.merge_costs.push_back(linkage == Linkage::ward ? 0.5 * best : best);
    size[best_a] = na + nb;
    active[best_b] = false;
    for (Eigen::Index c : neighbors[best_b]) {
      neighbors[c].erase(best_b);
      if (c != best_a) {
        neighbors[c].insert(best_a);
        neighbors[best_a].insert(c);
      }
    }
    neighbors[best_a].erase(best_b);
    neighbors[best_b].clear();
    for (auto& o : owner)
      if (o == best_b) o = static_cast<int>(best_a);
  }
  result.partition = Partition(owner);
  return result;
}

Partition constrained_agglomerative(const Matrix& embeddings, const Matrix& adjacency, int k, Linkage linkage) {
  return constrained_agglomerative_trace(embeddings, adjacency, k, linkage).partition;
}

namespace {

// Nearest-centroid assignment. A cluster left empty takes the point farthest
// from its centroid among clusters with more than one member, and its
// centroid moves onto that point.
std::vector<int> assign(const Matrix& points, Matrix& centroids, int k, double* inertia) {
  const Eigen::Index n = points.rows();
  std::vector<int> labels(static_cast<std::size_t>(n));
  std::vector<double> dist(static_cast<std::size_t>(n));
  std::vector<int> counts(static_cast<std::size_t>(k), 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (int c = 0; c < k; ++c) {
      double d = (points.row(i) - centroids.row(c)).squaredNorm();
      if (d < best) best = d, arg = c;
    }
    labels[i] = arg;
    dist[i] = best;
    ++counts[arg];
  }
  for (int c = 0; c < k; ++c) {
    if (counts[c] > 0) continue;
    Eigen::Index far = -1;
    for (Eigen::Index i = 0; i < n; ++i)
      if (counts[labels[i]] > 1 && (far < 0 || dist[i] > dist[far])) far = i;
    --counts[labels[far]];
    labels[far] = c;
    counts[c] = 1;
    dist[far] = 0.0;
    centroids.row(c) = points.row(far);
  }
  if (inertia) *inertia = std::accumulate(dist.begin(), dist.end(), 0.0);
  return labels;
}

}  // namespace

KMeansResult kmeans_trace(const Matrix& points, int k, std::uint64_t seed, int max_iter) {
  const Eigen::Index n = points.rows();
  if (k < 1 || k > n) throw ValidationError("kmeans: K = " + std::to_string(k) + " outside [1, " + std::to_string(n) + "]");
  if (max_iter < 1) throw ValidationError("kmeans: max_iter must be >= 1");
  std::mt19937_64 rng(seed);

  // k-means++ seeding
  Matrix centroids(k, points.cols());
  std::uniform_int_distribution<Eigen::Index> first(0, n - 1);
  centroids.row(0) = points.row(first(rng));
  Eigen::VectorXd nearest(n);
  for (Eigen::Index i = 0; i < n; ++i) nearest(i) = (points.row(i) - centroids.row(0)).squaredNorm();
  for (int c = 1; c < k; ++c) {
    double total = nearest.sum();
    Eigen::Index pick = 0;
    if (total > 0.0) {
      std::uniform_real_distribution<double> u(0.0, total);
      double r = u(rng), acc = 0.0;
      pick = n - 1;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += nearest(i);
        if (r < acc && nearest(i) > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = first(rng);
    }
    centroids.row(c) = points.row(pick);
    for (Eigen::Index i = 0; i < n; ++i)
      nearest(i) = std::min(nearest(i), (points.row(i) - centroids.row(c)).squaredNorm());
  }

  KMeansResult result;
  double inertia = 0.0;
  std::vector<int> labels = assign(points, centroids, k, &inertia);
  result.inertia_trace.push_back(inertia);
  for (int iter = 0; iter < max_iter; ++iter) {
    result.iterations = iter + 1;
    Matrix sums = Matrix::Zero(k, points.cols());
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) sums.row(labels[i]) += points.row(i), ++counts[labels[i]];
    for (int c = 0; c < k; ++c) centroids.row(c) = sums.row(c) / counts[c];
    std::vector<int> next = assign(points, centroids, k, &inertia);
    result.inertia_trace.push_back(inertia);
    if (next == labels) break;
    labels = std::move(next);
  }

  result.partition = Partition(labels);
  // Reorder centroid rows to follow the renumbered labels.
  result.centroids = Matrix(k, points.cols());
  std::vector<bool> done(static_cast<std::size_t>(k), false);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    int to = result.partition.label(i) - 1;
    if (!done[to]) result.centroids.row(to) = centroids.row(labels[i]), done[to] = true;
  }
  return result;
}

Partition kmeans(const Matrix& points, int k, std::uint64_t seed, int max_iter) {
  return kmeans_trace(points, k, seed, max_iter).partition;
}

double within_sum_of_squares(const Matrix& points, const Partition& partition) {
  double total = 0.0;
  for (const auto& members : partition.members()) {
    Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(points.cols());
    for (int i : members) mean += points.row(i);
    mean /= static_cast<double>(members.size());
    for (int i : members) total += (points.row(i) - mean).squaredNorm();
  }
  return total;
}

std::string partition_to_csv(const std::vector<std::string>& node_ids, const Partition& partition) {
  if (node_ids.size() != partition.size()) throw ValidationError("partition length does not match node count");
  std::ostringstream out;
  out << "node_id,community\n";
  for (std::size_t i = 0; i < node_ids.size(); ++i) out << node_ids[i] << "," << partition.label(i) << "\n";
  return out.str();
}

void save_partition(const std::filesystem::path& path, const std::vector<std::string>& node_ids,
                    const Partition& partition) {
  io::write_text(path, partition_to_csv(node_ids, partition));
}

Partition load_partition(const std::filesystem::path& path, const std::vector<std::string>& node_ids) {
  auto table = io::read_csv(path);
  if (table.header != std::vector<std::string>{"node_id", "community"})
    throw ValidationError(path.string() + ": header must be node_id,community");
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < node_ids.size(); ++i) index.emplace(node_ids[i], i);
  std::vector<int> raw(node_ids.size(), 0);
  std::vector<bool> seen(node_ids.size(), false);
  for (const auto& row : table.rows) {
    std::string where = path.string() + " row " + std::to_string(row.line);
    auto it = index.find(row.cells[0]);
    if (it == index.end()) throw ValidationError(where + ": unknown node id '" + row.cells[0] + "'");
    if (seen[it->second]) throw ValidationError(where + ": duplicate node id");
    double v = io::parse_double(row.cells[1], where);
    if (v != std::floor(v)) throw ValidationError(where + ": community must be an integer");
    raw[it->second] = static_cast<int>(v);
    seen[it->second] = true;
  }
  for (std::size_t i = 0; i < seen.size(); ++i)
    if (!seen[i]) throw ValidationError(path.string() + ": no community for node '" + node_ids[i] + "'");
  return Partition(raw);
}

}  // namespace regionflow
