#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>

#include "regionflow/baselines.hpp"
#include "regionflow/errors.hpp"

namespace regionflow {

double modularity(const Matrix& flows, const Partition& partition, double resolution) {
  const Eigen::Index n = flows.rows();
  if (static_cast<Eigen::Index>(partition.size()) != n)
    throw ValidationError("modularity: partition length does not match flows");
  const double two_m = flows.sum();
  if (!(two_m > 0.0)) throw ValidationError("modularity: total flow weight must be positive");
  const int k = partition.k();
  std::vector<double> inside(static_cast<std::size_t>(k), 0.0), incident(static_cast<std::size_t>(k), 0.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int ci = partition.label(i) - 1;
    for (Eigen::Index j = 0; j < n; ++j) {
      incident[ci] += flows(i, j);
      if (partition.label(j) - 1 == ci) inside[ci] += flows(i, j);
    }
  }
  double q = 0.0;
  for (int c = 0; c < k; ++c) {
    const double a = incident[c] / two_m;
    q += inside[c] / two_m - resolution * a * a;
  }
  return q;
}

namespace {

// Independent node orderings tried; the best final Q is kept.
constexpr int kRestarts = 10;
// Perturb-and-polish rounds applied to the best partition: kPerturbationWork / n,
// clamped to [kMinPerturbations, kMaxPerturbations]. Small graphs have flat
// modularity landscapes and get more rounds.
constexpr int kPerturbationWork = 1600;
constexpr int kMinPerturbations = 20;
constexpr int kMaxPerturbations = 200;
// Largest community the eigenvector split is attempted on.
constexpr Eigen::Index kMaxSplit = 500;
// Largest graph the move-sequence pass runs on.
constexpr Eigen::Index kMaxSequence = 2000;

// Weighted graph where self_loop[i] holds the ordered-pair weight inside
// node i and adj[i] the weights to other nodes.
struct WeightedGraph {
  std::vector<std::vector<std::pair<int, double>>> adj;
  std::vector<double> self_loop;
  std::vector<double> strength;
  double two_m = 0.0;

  std::size_t size() const { return adj.size(); }
};

WeightedGraph from_flows(const Matrix& flows) {
  const Eigen::Index n = flows.rows();
  WeightedGraph g;
  g.adj.resize(static_cast<std::size_t>(n));
  g.self_loop.assign(static_cast<std::size_t>(n), 0.0);
  g.strength.assign(static_cast<std::size_t>(n), 0.0);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      double w = flows(i, j);
      g.strength[i] += w;
      if (w == 0.0) continue;
      if (i == j)
        g.self_loop[i] = w;
      else
        g.adj[i].emplace_back(static_cast<int>(j), w);
    }
  g.two_m = flows.sum();
  return g;
}

// One round of local moves. Returns community per node (0-based, compact).
std::vector<int> local_moving(const WeightedGraph& g, double resolution, std::mt19937_64& rng, bool* moved) {
  const std::size_t n = g.size();
  std::vector<int> community(n);
  std::iota(community.begin(), community.end(), 0);
  std::vector<double> total(g.strength);  // incident weight per community
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<double> link(n, 0.0);
  std::vector<int> touched;
  *moved = false;
  constexpr double kMinGain = 1e-12;
  bool improved = true;
  while (improved) {
    improved = false;
    for (int v : order) {
      const int home = community[v];
      const double kv = g.strength[v];
      touched.clear();
      for (auto [u, w] : g.adj[v]) {
        int c = community[u];
        if (link[c] == 0.0) touched.push_back(c);
        link[c] += w;
      }
      total[home] -= kv;
      // gain(c) proportional to k_{v,c} - resolution * tot_c * k_v / 2m
      auto gain = [&](int c) { return link[c] - resolution * total[c] * kv / g.two_m; };
      int best = home;
      double best_gain = gain(home);
      for (int c : touched) {
        double gc = gain(c);
        if (gc > best_gain + kMinGain) {
          best_gain = gc;
          best = c;
        }
      }
      total[best] += kv;
      if (best != home) {
        community[v] = best;
        improved = true;
        *moved = true;
      }
      for (int c : touched) link[c] = 0.0;
    }
  }
  // compact ids in node order
  std::map<int, int> remap;
  for (auto& c : community) {
    auto [it, inserted] = remap.emplace(c, static_cast<int>(remap.size()));
    c = it->second;
  }
  return community;
}

WeightedGraph aggregate(const WeightedGraph& g, const std::vector<int>& community, int count) {
  WeightedGraph out;
  out.adj.resize(static_cast<std::size_t>(count));
  out.self_loop.assign(static_cast<std::size_t>(count), 0.0);
  out.strength.assign(static_cast<std::size_t>(count), 0.0);
  std::vector<std::map<int, double>> acc(static_cast<std::size_t>(count));
  for (std::size_t v = 0; v < g.size(); ++v) {
    const int cv = community[v];
    out.self_loop[cv] += g.self_loop[v];
    out.strength[cv] += g.strength[v];
    for (auto [u, w] : g.adj[v]) {
      const int cu = community[u];
      if (cu == cv)
        out.self_loop[cv] += w;
      else
        acc[cv][cu] += w;
    }
  }
  for (int c = 0; c < count; ++c)
    for (auto [d, w] : acc[c]) out.adj[c].emplace_back(d, w);
  out.two_m = g.two_m;
  return out;
}

// Splits every community by the sign of the leading eigenvector of its
// generalised modularity matrix and considers moving either half to a fresh
// community or into another existing one. Applies the best positive move.
bool split_best(const Matrix& s, const Vector& strength, double two_m, double resolution,
                std::vector<int>& membership) {
  const int count = *std::max_element(membership.begin(), membership.end()) + 1;
  std::vector<std::vector<int>> members(static_cast<std::size_t>(count));
  std::vector<double> total(static_cast<std::size_t>(count), 0.0);
  for (std::size_t i = 0; i < membership.size(); ++i) {
    members[membership[i]].push_back(static_cast<int>(i));
    total[membership[i]] += strength[static_cast<Eigen::Index>(i)];
  }
  double best_gain = 1e-12;
  std::vector<int> best_part;
  int best_target = -1;
  for (int home = 0; home < count; ++home) {
    const auto& group = members[home];
    const auto size = static_cast<Eigen::Index>(group.size());
    if (size < 2 || size > kMaxSplit) continue;
    Matrix b(size, size);
    for (Eigen::Index x = 0; x < size; ++x)
      for (Eigen::Index y = 0; y < size; ++y)
        b(x, y) = s(group[x], group[y]) - resolution * strength[group[x]] * strength[group[y]] / two_m;
    const Vector rows = b.rowwise().sum();
    b.diagonal() -= rows;
    Eigen::SelfAdjointEigenSolver<Matrix> eig(b);
    const Vector lead = eig.eigenvectors().col(size - 1);
    std::vector<int> halves[2];
    for (Eigen::Index x = 0; x < size; ++x) halves[lead[x] > 0.0 ? 0 : 1].push_back(group[x]);
    if (halves[0].empty() || halves[1].empty()) continue;
    for (const auto& part : halves) {
      // gain of moving part into c: link(part, c) - link(part, rest) - resolution * k_part * (tot_c - tot_rest) / 2m
      std::vector<double> link(static_cast<std::size_t>(count) + 1, 0.0);
      std::vector<char> in_part(membership.size(), 0);
      double k_part = 0.0;
      for (int v : part) in_part[v] = 1, k_part += strength[v];
      for (int v : part)
        for (std::size_t u = 0; u < membership.size(); ++u)
          if (!in_part[u]) link[membership[u]] += s(v, static_cast<Eigen::Index>(u));
      const double rest_total = total[home] - k_part;
      for (int c = 0; c <= count; ++c) {
        if (c == home) continue;
        const double tot_c = c < count ? total[c] : 0.0;
        const double gain = (c < count ? link[c] : 0.0) - link[home] - resolution * k_part * (tot_c - rest_total) / two_m;
        if (gain > best_gain) best_gain = gain, best_part = part, best_target = c;
      }
    }
  }
  if (best_target < 0) return false;
  for (int v : best_part) membership[v] = best_target;
  return true;
}

// Kernighan-Lin style pass: every node is moved once, each time taking the
// best available move even when it lowers Q, and the best prefix of the
// sequence is kept.
bool move_sequence(const Matrix& s, const Vector& strength, double two_m, double resolution,
                   std::vector<int>& membership) {
  const auto n = static_cast<Eigen::Index>(membership.size());
  if (n > kMaxSequence) return false;
  int count = *std::max_element(membership.begin(), membership.end()) + 1;
  // link(v, c) = weight from v to the other members of c; one spare column for a fresh community
  Matrix link = Matrix::Zero(n, n + 1);
  std::vector<double> total(static_cast<std::size_t>(n) + 1, 0.0);
  for (Eigen::Index v = 0; v < n; ++v) {
    total[membership[v]] += strength[v];
    for (Eigen::Index u = 0; u < n; ++u)
      if (u != v) link(v, membership[u]) += s(v, u);
  }
  std::vector<int> state(membership);
  std::vector<char> moved(static_cast<std::size_t>(n), 0);
  std::vector<std::pair<Eigen::Index, int>> history;  // (node, previous community)
  double running = 0.0, best = 1e-12;
  std::size_t best_length = 0;
  for (Eigen::Index step = 0; step < n; ++step) {
    double step_gain = -std::numeric_limits<double>::infinity();
    Eigen::Index pick = -1;
    int target = -1;
    for (Eigen::Index v = 0; v < n; ++v) {
      if (moved[v]) continue;
      const int home = state[v];
      const double stay = link(v, home) - resolution * strength[v] * (total[home] - strength[v]) / two_m;
      for (int c = 0; c <= count && c <= n; ++c) {
        if (c == home) continue;
        const double g = link(v, c) - resolution * strength[v] * total[c] / two_m - stay;
        if (g > step_gain) step_gain = g, pick = v, target = c;
      }
    }
    if (pick < 0) break;
    const int home = state[pick];
    for (Eigen::Index u = 0; u < n; ++u)
      if (u != pick) link(u, home) -= s(u, pick), link(u, target) += s(u, pick);
    total[home] -= strength[pick];
    total[target] += strength[pick];
    state[pick] = target;
    moved[pick] = 1;
    if (target == count) ++count;
    history.emplace_back(pick, home);
    running += step_gain;
    if (running > best) best = running, best_length = history.size();
  }
  if (best_length == 0) return false;
  for (std::size_t i = history.size(); i > best_length; --i) state[history[i - 1].first] = history[i - 1].second;
  membership = Partition(state).labels();
  for (auto& m : membership) --m;
  return true;
}

// Polishes a partition of the original graph: single-node moves (to a
// neighbouring community or a fresh one) and merges of linked community
// pairs, each applied while it raises Q.
void refine(const Matrix& s, double resolution, std::vector<int>& membership) {
  const Eigen::Index n = s.rows();
  const double two_m = s.sum();
  constexpr double kMinGain = 1e-12;
  const Vector strength = s.rowwise().sum();
  bool changed = true;
  while (changed) {
    changed = false;
    int count = *std::max_element(membership.begin(), membership.end()) + 1;
    std::vector<double> total(static_cast<std::size_t>(count), 0.0);
    for (Eigen::Index i = 0; i < n; ++i) total[membership[i]] += strength[i];
    std::vector<double> link;
    for (Eigen::Index v = 0; v < n; ++v) {
      const int home = membership[v];
      const double kv = strength[v];
      link.assign(total.size() + 1, 0.0);
      for (Eigen::Index u = 0; u < n; ++u)
        if (u != v) link[membership[u]] += s(v, u);
      total[home] -= kv;
      total.push_back(0.0);  // fresh community
      auto gain = [&](std::size_t c) { return link[c] - resolution * total[c] * kv / two_m; };
      std::size_t best = static_cast<std::size_t>(home);
      double best_gain = gain(best);
      for (std::size_t c = 0; c < total.size(); ++c)
        if (gain(c) > best_gain + kMinGain) best_gain = gain(c), best = c;
      if (best + 1 < total.size()) total.pop_back();
      total[best] += kv;
      if (best != static_cast<std::size_t>(home)) {
        membership[v] = static_cast<int>(best);
        changed = true;
      }
    }
    membership = Partition(membership).labels();
    for (auto& m : membership) --m;
    count = *std::max_element(membership.begin(), membership.end()) + 1;
    total.assign(static_cast<std::size_t>(count), 0.0);
    Matrix between = Matrix::Zero(count, count);
    for (Eigen::Index i = 0; i < n; ++i) {
      total[membership[i]] += strength[i];
      for (Eigen::Index j = 0; j < n; ++j) between(membership[i], membership[j]) += s(i, j);
    }
    double best_gain = kMinGain;
    int merge_a = -1, merge_b = -1;
    for (int a = 0; a < count; ++a)
      for (int b = a + 1; b < count; ++b) {
        const double g = between(a, b) - resolution * total[a] * total[b] / two_m;
        if (between(a, b) > 0.0 && g > best_gain) best_gain = g, merge_a = a, merge_b = b;
      }
    if (merge_a >= 0) {
      for (auto& m : membership)
        if (m == merge_b) m = merge_a;
      membership = Partition(membership).labels();
      for (auto& m : membership) --m;
      changed = true;
      continue;
    }
    if (split_best(s, strength, two_m, resolution, membership)) {
      changed = true;
      continue;
    }
    if (move_sequence(s, strength, two_m, resolution, membership)) changed = true;
  }
}

LouvainResult single_run(const Matrix& sym, double resolution, std::mt19937_64& rng) {
  WeightedGraph g = from_flows(sym);
  std::vector<int> membership(static_cast<std::size_t>(sym.rows()));
  std::iota(membership.begin(), membership.end(), 0);

  LouvainResult result;
  result.quality = modularity(sym, Partition(membership), resolution);
  while (true) {
    bool moved = false;
    std::vector<int> community = local_moving(g, resolution, rng, &moved);
    if (!moved) break;
    const int count = *std::max_element(community.begin(), community.end()) + 1;
    std::vector<int> candidate(membership);
    for (auto& m : candidate) m = community[m];
    const double q = modularity(sym, Partition(candidate), resolution);
    if (q <= result.quality + 1e-12) break;
    membership = std::move(candidate);
    result.quality = q;
    result.pass_quality.push_back(q);
    ++result.passes;
    if (count == static_cast<int>(g.size())) break;
    g = aggregate(g, community, count);
  }
  refine(sym, resolution, membership);
  const double polished = modularity(sym, Partition(membership), resolution);
  if (polished > result.quality + 1e-12) result.pass_quality.push_back(polished);
  result.partition = Partition(membership);
  result.quality = modularity(sym, result.partition, resolution);
  return result;
}

}  // namespace

LouvainResult louvain(const Matrix& flows, std::uint64_t seed, double resolution) {
  if (flows.rows() != flows.cols()) throw ValidationError("louvain: flow matrix must be square");
  if (!(flows.sum() > 0.0)) throw ValidationError("louvain: total flow weight must be positive");
  // Modularity gains assume an undirected graph.
  const Matrix sym = 0.5 * (flows + flows.transpose());
  std::mt19937_64 rng(seed);
  LouvainResult best = single_run(sym, resolution, rng);
  for (int restart = 1; restart < kRestarts; ++restart) {
    LouvainResult r = single_run(sym, resolution, rng);
    if (r.quality > best.quality + 1e-12) best = std::move(r);
  }
  // Divisive candidate: recursive eigenvector bisection from one community.
  std::vector<int> divisive(static_cast<std::size_t>(sym.rows()), 0);
  refine(sym, resolution, divisive);
  const double q = modularity(sym, Partition(divisive), resolution);
  if (q > best.quality + 1e-12) {
    best.partition = Partition(divisive);
    best.quality = q;
    best.pass_quality.push_back(q);
  }
  // Perturbation search: reassign a random fifth (even rounds) or two fifths
  // (odd rounds) of the nodes and polish.
  std::vector<int> current = best.partition.labels();
  for (auto& m : current) --m;
  const int rounds = static_cast<int>(std::clamp<Eigen::Index>(kPerturbationWork / sym.rows(), kMinPerturbations,
                                                               kMaxPerturbations));
  for (int round = 0; round < rounds; ++round) {
    std::vector<int> trial(current);
    const int count = *std::max_element(trial.begin(), trial.end()) + 1;
    std::uniform_int_distribution<int> pick_label(0, count);
    std::bernoulli_distribution pick_node(round % 2 == 0 ? 0.2 : 0.4);
    for (auto& m : trial)
      if (pick_node(rng)) m = pick_label(rng);
    trial = Partition(trial).labels();
    for (auto& m : trial) --m;
    refine(sym, resolution, trial);
    const double tq = modularity(sym, Partition(trial), resolution);
    if (tq > best.quality + 1e-12) {
      best.partition = Partition(trial);
      best.quality = tq;
      best.pass_quality.push_back(tq);
      current = std::move(trial);
    }
  }
  return best;
}

}  // namespace regionflow
