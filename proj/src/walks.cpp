#include <algorithm>
#include <cmath>
#include <random>

#include "regionflow/baselines.hpp"
#include "regionflow/errors.hpp"
#include "regionflow/parallel.hpp"

namespace regionflow {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

WalkCorpus random_walks(const Matrix& adjacency, int walk_length, int walks_per_node, double p, double q,
                        std::uint64_t seed) {
  if (walk_length < 1) throw ValidationError("random_walks: walk_length must be >= 1");
  if (walks_per_node < 0) throw ValidationError("random_walks: walks_per_node must be >= 0");
  if (!(p > 0.0) || !(q > 0.0)) throw ValidationError("random_walks: p and q must be positive");
  const auto neighbors = neighbor_lists(adjacency);
  const std::size_t n = neighbors.size();

  WalkCorpus corpus;
  corpus.walk_length = walk_length;
  corpus.walks_per_node = walks_per_node;
  corpus.p = p;
  corpus.q = q;
  corpus.walks.resize(n * static_cast<std::size_t>(walks_per_node));

  auto is_edge = [&](int a, int b) { return std::binary_search(neighbors[a].begin(), neighbors[a].end(), b); };

  parallel_for(corpus.walks.size(), [&](std::size_t index) {
    std::mt19937_64 rng(splitmix64(seed ^ index));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int start = static_cast<int>(index % n);
    std::vector<int>& walk = corpus.walks[index];
    walk.reserve(static_cast<std::size_t>(walk_length));
    walk.push_back(start);
    std::vector<double> weights;
    while (static_cast<int>(walk.size()) < walk_length) {
      const int cur = walk.back();
      const auto& nb = neighbors[cur];
      if (nb.empty()) break;
      if (walk.size() == 1) {
        std::uniform_int_distribution<std::size_t> pick(0, nb.size() - 1);
        walk.push_back(nb[pick(rng)]);
        continue;
      }
      const int prev = walk[walk.size() - 2];
      weights.resize(nb.size());
      double total = 0.0;
      for (std::size_t k = 0; k < nb.size(); ++k) {
        const int x = nb[k];
        weights[k] = x == prev ? 1.0 / p : (is_edge(prev, x) ? 1.0 : 1.0 / q);
        total += weights[k];
      }
      double r = unit(rng) * total;
      std::size_t k = 0;
      for (; k + 1 < nb.size(); ++k) {
        r -= weights[k];
        if (r < 0.0) break;
      }
      walk.push_back(nb[k]);
    }
  });
  return corpus;
}

Matrix skipgram_embed(const WalkCorpus& corpus, std::size_t node_count, const SkipGramConfig& config) {
  if (config.dim < 2) throw ValidationError("skipgram: dim must be >= 2");
  if (config.window < 1) throw ValidationError("skipgram: window must be >= 1");
  if (config.negative_samples < 0 || config.epochs < 0) throw ValidationError("skipgram: counts must be >= 0");
  if (corpus.walks.empty()) throw ValidationError("skipgram: empty corpus");
  const auto n = static_cast<Eigen::Index>(node_count);
  const Eigen::Index dim = config.dim;
  std::mt19937_64 rng(config.seed);

  Matrix input(n, dim);
  {
    std::uniform_real_distribution<double> init(-0.5 / static_cast<double>(dim), 0.5 / static_cast<double>(dim));
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index d = 0; d < dim; ++d) input(i, d) = init(rng);
  }
  Matrix output = Matrix::Zero(n, dim);

  std::vector<double> freq(node_count, 0.0);
  std::size_t tokens = 0;
  for (const auto& walk : corpus.walks)
    for (int v : walk) {
      if (v < 0 || static_cast<std::size_t>(v) >= node_count) throw ValidationError("skipgram: node index out of range");
      freq[v] += 1.0, ++tokens;
    }
  std::vector<double> cumulative(node_count);
  double acc = 0.0;
  for (std::size_t i = 0; i < node_count; ++i) cumulative[i] = (acc += std::pow(freq[i], 0.75));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto draw_noise = [&]() {
    double r = unit(rng) * acc;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), r);
    return static_cast<int>(std::min<std::size_t>(it - cumulative.begin(), node_count - 1));
  };
  auto sigmoid = [](double x) {
    x = std::clamp(x, -30.0, 30.0);
    return 1.0 / (1.0 + std::exp(-x));
  };

  const double total_steps = static_cast<double>(tokens) * config.epochs;
  double step = 0.0;
  Eigen::RowVectorXd grad_in(dim);
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (const auto& walk : corpus.walks) {
      for (std::size_t pos = 0; pos < walk.size(); ++pos, step += 1.0) {
        const double lr = std::max(config.learning_rate * 1e-4, config.learning_rate * (1.0 - step / total_steps));
        const int center = walk[pos];
        const std::size_t lo = pos >= static_cast<std::size_t>(config.window) ? pos - config.window : 0;
        const std::size_t hi = std::min(walk.size() - 1, pos + config.window);
        for (std::size_t c = lo; c <= hi; ++c) {
          if (c == pos) continue;
          const int context = walk[c];
          grad_in.setZero();
          for (int s = 0; s <= config.negative_samples; ++s) {
            int target = context;
            double label = 1.0;
            if (s > 0) {
              target = draw_noise();
              if (target == context) continue;
              label = 0.0;
            }
            const double score = sigmoid(input.row(center).dot(output.row(target)));
            const double g = lr * (label - score);
            grad_in += g * output.row(target);
            output.row(target) += g * input.row(center);
          }
          input.row(center) += grad_in;
        }
      }
    }
  }
  return input;
}

}  // namespace regionflow
