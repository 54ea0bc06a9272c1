#include "regionflow/pipeline.hpp"

#include <sstream>
#include <unordered_map>

#include "regionflow/errors.hpp"
#include "regionflow/io.hpp"
#include "regionflow/parallel.hpp"
#include "regionflow/render.hpp"

namespace regionflow {

DetectResult run_detect(const SpatialNetwork& network, const ModelConfig& model, const ClusterOptions& cluster,
                        std::uint64_t palette_seed) {
  network.validate();
  if (cluster.k < 1 || cluster.k > static_cast<int>(network.size()))
    throw ValidationError("detect: K = " + std::to_string(cluster.k) + " outside [1, n]");
  DetectResult out;
  out.training = train(network, model);
  out.partition = constrained_agglomerative(out.training.embeddings, network.adjacency, cluster.k, cluster.linkage);
  out.metrics = evaluate_partition(network, out.partition, "region2vec-" + to_string(model.model));
  if (!network.geometries.empty()) out.svg = render_choropleth(network.geometries, out.partition, palette_seed);
  return out;
}

BaselineKind parse_baseline(const std::string& name) {
  if (name == "louvain") return BaselineKind::louvain;
  if (name == "kmeans") return BaselineKind::kmeans;
  if (name == "node2vec") return BaselineKind::node2vec;
  if (name == "deepwalk") return BaselineKind::deepwalk;
  throw ValidationError("unknown baseline '" + name + "'");
}

std::string to_string(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::louvain: return "louvain";
    case BaselineKind::kmeans: return "kmeans";
    case BaselineKind::node2vec: return "node2vec";
    case BaselineKind::deepwalk: return "deepwalk";
  }
  return "louvain";
}

Matrix walk_embedding(const SpatialNetwork& network, BaselineKind kind, const BaselineOptions& options) {
  WalkOptions w = options.walks;
  if (kind == BaselineKind::deepwalk) w.p = w.q = 1.0;
  auto corpus = random_walks(network.adjacency, w.walk_length, w.walks_per_node, w.p, w.q, options.seed);
  SkipGramConfig sg = w.skipgram;
  sg.seed = options.seed;
  return skipgram_embed(corpus, network.size(), sg);
}

BaselineResult run_baseline(const SpatialNetwork& network, BaselineKind kind, const BaselineOptions& options) {
  network.validate();
  BaselineResult out;
  switch (kind) {
    case BaselineKind::louvain: {
      out.louvain = louvain(network.flows, options.seed, options.resolution);
      out.partition = out.louvain->partition;
      break;
    }
    case BaselineKind::kmeans:
      out.partition = kmeans(network.attributes, options.cluster.k, options.seed, options.kmeans_max_iter);
      break;
    case BaselineKind::node2vec:
    case BaselineKind::deepwalk: {
      out.embeddings = walk_embedding(network, kind, options);
      out.partition =
          constrained_agglomerative(*out.embeddings, network.adjacency, options.cluster.k, options.cluster.linkage);
      break;
    }
  }
  return out;
}

std::vector<SweepRow> run_sweep(const SpatialNetwork& network, const std::vector<SweepInput>& methods,
                                const std::vector<int>& k_values, Linkage linkage, std::uint64_t seed) {
  network.validate();
  int components = 0;
  connected_components(network.adjacency, &components);
  struct Cell {
    std::optional<MetricsReport> report;
    std::string note;
  };
  const std::size_t jobs = methods.size() * k_values.size();
  std::vector<Cell> cells(jobs);
  parallel_for(jobs, [&](std::size_t job) {
    const SweepInput& method = methods[job / k_values.size()];
    const int k = k_values[job % k_values.size()];
    Cell& cell = cells[job];
    try {
      if (k < 1 || k > static_cast<int>(network.size()))
        throw ValidationError("K outside [1, n]");
      Partition p;
      if (method.use_kmeans) {
        p = kmeans(network.attributes, k, seed);
      } else {
        if (!method.embeddings) throw ValidationError("method has no embeddings");
        if (k < components) throw InfeasibleError("K below the " + std::to_string(components) + " components");
        p = constrained_agglomerative(*method.embeddings, network.adjacency, k, linkage);
      }
      cell.report = evaluate_partition(network, p, method.method);
    } catch (const std::exception& e) {
      cell.note = e.what();
    }
  });

  std::vector<MetricsReport> batch;
  for (const auto& c : cells)
    if (c.report) batch.push_back(*c.report);
  normalize_batch(batch);

  std::vector<SweepRow> rows;
  std::size_t b = 0;
  for (std::size_t job = 0; job < jobs; ++job) {
    const std::string& name = methods[job / k_values.size()].method;
    const int k = k_values[job % k_values.size()];
    if (!cells[job].report) {
      rows.push_back({name, k, "skipped", std::nullopt, cells[job].note});
      continue;
    }
    const MetricsReport& r = batch[b++];
    rows.push_back({name, k, "intra_flow_ratio", r.intra_flow_ratio, {}});
    rows.push_back({name, k, "inequality_raw", r.inequality_raw, {}});
    rows.push_back({name, k, "inequality_norm", r.inequality_norm, {}});
    rows.push_back({name, k, "cosine_similarity", r.cosine_similarity, {}});
    rows.push_back({name, k, "synthetic_score", r.synthetic_score, {}});
    rows.push_back({name, k, "join_count_ratio", r.join_count_ratio, {}});
  }
  return rows;
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "method,K,metric,value\n";
  for (const auto& r : rows) {
    out << r.method << "," << r.k << "," << r.metric << ",";
    if (r.value) out << io::format_double(*r.value);
    out << "\n";
  }
  return out.str();
}

std::string embeddings_to_csv(const std::vector<std::string>& node_ids, const Matrix& embeddings) {
  if (static_cast<Eigen::Index>(node_ids.size()) != embeddings.rows())
    throw ValidationError("embeddings: row count does not match node ids");
  std::ostringstream out;
  out << "node_id";
  for (Eigen::Index d = 0; d < embeddings.cols(); ++d) out << ",e" << d;
  out << "\n";
  for (Eigen::Index i = 0; i < embeddings.rows(); ++i) {
    out << node_ids[i];
    for (Eigen::Index d = 0; d < embeddings.cols(); ++d) out << "," << io::format_double(embeddings(i, d), 9);
    out << "\n";
  }
  return out.str();
}

Matrix load_embeddings(const std::filesystem::path& path, const std::vector<std::string>& node_ids) {
  auto table = io::read_csv(path);
  if (table.header.size() < 2 || table.header[0] != "node_id")
    throw ValidationError(path.string() + ": header must be node_id,e0,...");
  std::unordered_map<std::string, Eigen::Index> index;
  for (std::size_t i = 0; i < node_ids.size(); ++i) index.emplace(node_ids[i], static_cast<Eigen::Index>(i));
  const auto d = static_cast<Eigen::Index>(table.header.size() - 1);
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(node_ids.size()), d);
  std::vector<bool> seen(node_ids.size(), false);
  for (const auto& row : table.rows) {
    std::string where = path.string() + " row " + std::to_string(row.line);
    auto it = index.find(row.cells[0]);
    if (it == index.end()) throw ValidationError(where + ": unknown node id '" + row.cells[0] + "'");
    seen[it->second] = true;
    for (Eigen::Index c = 0; c < d; ++c) out(it->second, c) = io::parse_double(row.cells[c + 1], where);
  }
  for (std::size_t i = 0; i < seen.size(); ++i)
    if (!seen[i]) throw ValidationError(path.string() + ": no embedding for node '" + node_ids[i] + "'");
  return out;
}

std::string loss_history_to_csv(const std::vector<double>& history) {
  std::ostringstream out;
  out << "epoch,loss\n";
  for (std::size_t e = 0; e < history.size(); ++e) out << e << "," << io::format_double(history[e]) << "\n";
  return out.str();
}

}  // namespace regionflow
