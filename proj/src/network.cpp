#include "regionflow/network.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "json.hpp"
#include "regionflow/errors.hpp"
#include "regionflow/io.hpp"
#include "regionflow/parallel.hpp"

namespace regionflow {
namespace {

std::unordered_map<std::string, Eigen::Index> index_ids(const std::vector<std::string>& ids) {
  std::unordered_map<std::string, Eigen::Index> index;
  for (std::size_t i = 0; i < ids.size(); ++i) index.emplace(ids[i], static_cast<Eigen::Index>(i));
  return index;
}

void check_square(const Matrix& m, std::size_t n, const char* what) {
  if (static_cast<std::size_t>(m.rows()) != n || static_cast<std::size_t>(m.cols()) != n)
    throw ValidationError(std::string(what) + " must be " + std::to_string(n) + "x" + std::to_string(n));
}

}  // namespace

void SpatialNetwork::validate() const {
  const std::size_t n = node_ids.size();
  if (n == 0) throw ValidationError("network has no nodes");
  if (index_ids(node_ids).size() != n) throw ValidationError("node ids are not unique");
  check_square(adjacency, n, "adjacency");
  check_square(flows, n, "flows");
  if (static_cast<std::size_t>(attributes.rows()) != n)
    throw ValidationError("attribute rows do not match node count");
  if (!features.empty() && features.size() != static_cast<std::size_t>(attributes.cols()))
    throw ValidationError("feature metadata does not match attribute columns");
  for (Eigen::Index i = 0; i < adjacency.rows(); ++i) {
    if (adjacency(i, i) != 0.0) throw ValidationError("adjacency diagonal must be zero");
    for (Eigen::Index j = 0; j < adjacency.cols(); ++j) {
      double a = adjacency(i, j);
      if ((a != 0.0 && a != 1.0) || a != adjacency(j, i))
        throw ValidationError("adjacency must be binary and symmetric");
      double s = flows(i, j);
      if (!std::isfinite(s) || s < 0.0) throw ValidationError("flows must be finite and non-negative");
    }
  }
  for (Eigen::Index i = 0; i < attributes.size(); ++i) {
    double v = attributes.data()[i];
    if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("attributes must lie in [0, 1]");
  }
  if (!geometries.empty() && geometries.size() != n)
    throw ValidationError("geometry count does not match node count");
}

std::vector<std::vector<int>> neighbor_lists(const Matrix& adjacency) {
  std::vector<std::vector<int>> out(static_cast<std::size_t>(adjacency.rows()));
  for (Eigen::Index i = 0; i < adjacency.rows(); ++i)
    for (Eigen::Index j = 0; j < adjacency.cols(); ++j)
      if (i != j && adjacency(i, j) != 0.0) out[i].push_back(static_cast<int>(j));
  return out;
}

HopMatrix compute_hops(const Matrix& adjacency) {
  const auto n = static_cast<std::size_t>(adjacency.rows());
  auto neighbors = neighbor_lists(adjacency);
  HopMatrix hops(n);
  parallel_for(n, [&](std::size_t src) {
    hops(src, src) = 0;
    std::deque<std::size_t> queue{src};
    while (!queue.empty()) {
      std::size_t u = queue.front();
      queue.pop_front();
      for (int v : neighbors[u]) {
        if (hops(src, v) == HopMatrix::unreachable) {
          hops(src, v) = hops(src, u) + 1;
          queue.push_back(static_cast<std::size_t>(v));
        }
      }
    }
  });
  return hops;
}

std::vector<int> connected_components(const Matrix& adjacency, int* count) {
  const auto n = static_cast<std::size_t>(adjacency.rows());
  auto neighbors = neighbor_lists(adjacency);
  std::vector<int> label(n, -1);
  int next = 0;
  for (std::size_t s = 0; s < n; ++s) {
    if (label[s] >= 0) continue;
    std::vector<std::size_t> stack{s};
    label[s] = next;
    while (!stack.empty()) {
      std::size_t u = stack.back();
      stack.pop_back();
      for (int v : neighbors[u])
        if (label[v] < 0) label[v] = next, stack.push_back(static_cast<std::size_t>(v));
    }
    ++next;
  }
  if (count) *count = next;
  return label;
}

Matrix load_flows(const std::filesystem::path& path, const std::vector<std::string>& node_ids,
                  bool symmetrize) {
  auto table = io::read_csv(path);
  if (table.header != std::vector<std::string>{"origin", "destination", "weight"})
    throw ValidationError(path.string() + ": header must be origin,destination,weight");
  auto index = index_ids(node_ids);
  const auto n = static_cast<Eigen::Index>(node_ids.size());
  Matrix flows = Matrix::Zero(n, n);
  for (const auto& row : table.rows) {
    std::string where = path.string() + " row " + std::to_string(row.line);
    auto o = index.find(row.cells[0]);
    auto d = index.find(row.cells[1]);
    if (o == index.end()) throw ValidationError(where + ": unknown origin id '" + row.cells[0] + "'");
    if (d == index.end()) throw ValidationError(where + ": unknown destination id '" + row.cells[1] + "'");
    double w = io::parse_double(row.cells[2], where);
    if (w < 0.0) throw ValidationError(where + ": negative weight");
    flows(o->second, d->second) += w;
  }
  if (symmetrize) {
    const Vector self = flows.diagonal();
    Matrix t = flows.transpose();
    flows += t;
    flows.diagonal() = self;  // self-flows are kept as given
  }
  return flows;
}

ScaledAttributes scale_attributes(const Matrix& raw, const std::vector<std::string>& names) {
  if (names.size() != static_cast<std::size_t>(raw.cols()))
    throw ValidationError("feature name count does not match attribute columns");
  ScaledAttributes out;
  out.values = Matrix(raw.rows(), raw.cols());
  for (Eigen::Index c = 0; c < raw.cols(); ++c) {
    FeatureScaling rec{names[static_cast<std::size_t>(c)], 0.0, 0.0, false};
    if (raw.rows() > 0) {
      rec.min = raw.col(c).minCoeff();
      rec.max = raw.col(c).maxCoeff();
    }
    rec.constant = rec.min == rec.max;
    for (Eigen::Index r = 0; r < raw.rows(); ++r)
      out.values(r, c) = rec.constant ? 0.5 : std::clamp((raw(r, c) - rec.min) / (rec.max - rec.min), 0.0, 1.0);
    out.features.push_back(std::move(rec));
  }
  return out;
}

ScaledAttributes load_attributes(const std::filesystem::path& path,
                                 const std::vector<std::string>& node_ids) {
  auto table = io::read_csv(path);
  if (table.header.empty() || table.header[0] != "id")
    throw ValidationError(path.string() + ": header must start with 'id'");
  std::vector<std::string> names(table.header.begin() + 1, table.header.end());
  auto index = index_ids(node_ids);
  const auto n = static_cast<Eigen::Index>(node_ids.size());
  const auto m = static_cast<Eigen::Index>(names.size());
  Matrix raw = Matrix::Zero(n, m);
  std::vector<bool> seen(node_ids.size(), false);
  for (const auto& row : table.rows) {
    std::string where = path.string() + " row " + std::to_string(row.line);
    auto it = index.find(row.cells[0]);
    if (it == index.end()) throw ValidationError(where + ": unknown id '" + row.cells[0] + "'");
    if (seen[it->second]) throw ValidationError(where + ": duplicate id '" + row.cells[0] + "'");
    seen[it->second] = true;
    for (Eigen::Index c = 0; c < m; ++c) raw(it->second, c) = io::parse_double(row.cells[c + 1], where);
  }
  for (std::size_t i = 0; i < seen.size(); ++i)
    if (!seen[i]) throw ValidationError(path.string() + ": missing row for node '" + node_ids[i] + "'");
  return scale_attributes(raw, names);
}

SpatialNetwork assemble_network(const std::filesystem::path& geojson,
                                const std::filesystem::path& flows,
                                const std::filesystem::path& attributes,
                                const AssemblyOptions& options) {
  for (const auto& p : {geojson, flows, attributes})
    if (!std::filesystem::exists(p)) throw ValidationError("input file not found: " + p.string());
  auto table = load_geometries(geojson);
  SpatialNetwork net;
  net.node_ids = table.node_ids;
  net.adjacency = derive_adjacency(table.geometries, options.rule, options.tolerance);
  if (options.connect_islands) connect_islands(net.adjacency, table.geometries);
  net.flows = load_flows(flows, net.node_ids, options.symmetrize);
  auto scaled = load_attributes(attributes, net.node_ids);
  net.attributes = std::move(scaled.values);
  net.features = std::move(scaled.features);
  net.rule = options.rule;
  net.geometries = std::move(table.geometries);
  net.validate();
  return net;
}

void save_network(const std::filesystem::path& dir, const SpatialNetwork& net) {
  net.validate();
  const auto n = static_cast<Eigen::Index>(net.size());
  std::ostringstream nodes, adj, flows, attrs;
  nodes << "node_id\n";
  for (const auto& id : net.node_ids) nodes << id << "\n";
  adj << "i,j\n";
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      if (net.adjacency(i, j) != 0.0) adj << i << "," << j << "\n";
  flows << "origin,destination,weight\n";
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (net.flows(i, j) != 0.0)
        flows << net.node_ids[i] << "," << net.node_ids[j] << "," << io::format_double(net.flows(i, j)) << "\n";
  attrs << "id";
  for (const auto& f : net.features) attrs << "," << f.name;
  attrs << "\n";
  for (Eigen::Index i = 0; i < n; ++i) {
    attrs << net.node_ids[i];
    for (Eigen::Index c = 0; c < net.attributes.cols(); ++c) attrs << "," << io::format_double(net.attributes(i, c));
    attrs << "\n";
  }
  nlohmann::json meta;
  meta["n"] = net.size();
  meta["m"] = net.feature_count();
  meta["contiguity"] = to_string(net.rule);
  meta["features"] = nlohmann::json::array();
  for (const auto& f : net.features)
    meta["features"].push_back({{"name", f.name}, {"min", f.min}, {"max", f.max}, {"constant", f.constant}});
  meta["has_geometry"] = !net.geometries.empty();

  std::filesystem::create_directories(dir);
  io::write_text(dir / "nodes.csv", nodes.str());
  io::write_text(dir / "adjacency.csv", adj.str());
  io::write_text(dir / "flows.csv", flows.str());
  io::write_text(dir / "attributes.csv", attrs.str());
  io::write_text(dir / "meta.json", meta.dump(2) + "\n");
  if (!net.geometries.empty()) save_geometries(dir / "geometry.geojson", {net.node_ids, net.geometries});
}

SpatialNetwork load_network(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw ValidationError("network directory not found: " + dir.string());
  SpatialNetwork net;
  auto nodes = io::read_csv(dir / "nodes.csv");
  if (nodes.header != std::vector<std::string>{"node_id"})
    throw ValidationError((dir / "nodes.csv").string() + ": header must be node_id");
  for (auto& row : nodes.rows) net.node_ids.push_back(row.cells[0]);
  const auto n = static_cast<Eigen::Index>(net.node_ids.size());

  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(io::read_text(dir / "meta.json"));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError((dir / "meta.json").string() + ": " + e.what());
  }
  net.rule = parse_contiguity(meta.value("contiguity", "rook"));
  if (meta.value("n", -1) != n) throw ValidationError("meta.json node count does not match nodes.csv");

  net.adjacency = Matrix::Zero(n, n);
  auto adj = io::read_csv(dir / "adjacency.csv");
  for (const auto& row : adj.rows) {
    std::string where = (dir / "adjacency.csv").string() + " row " + std::to_string(row.line);
    double i = io::parse_double(row.cells.at(0), where), j = io::parse_double(row.cells.at(1), where);
    if (i < 0 || j < 0 || i >= n || j >= n || i == j || i != std::floor(i) || j != std::floor(j))
      throw ValidationError(where + ": invalid node index");
    net.adjacency(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 1.0;
    net.adjacency(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = 1.0;
  }
  net.flows = load_flows(dir / "flows.csv", net.node_ids, false);

  auto attrs = io::read_csv(dir / "attributes.csv");
  if (attrs.header.empty() || attrs.header[0] != "id")
    throw ValidationError((dir / "attributes.csv").string() + ": header must start with 'id'");
  const auto m = static_cast<Eigen::Index>(attrs.header.size() - 1);
  net.attributes = Matrix::Zero(n, m);
  if (static_cast<Eigen::Index>(attrs.rows.size()) != n)
    throw ValidationError((dir / "attributes.csv").string() + ": expected one row per node");
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = attrs.rows[i];
    if (row.cells[0] != net.node_ids[i])
      throw ValidationError((dir / "attributes.csv").string() + ": row order does not match nodes.csv");
    for (Eigen::Index c = 0; c < m; ++c)
      net.attributes(i, c) = io::parse_double(row.cells[c + 1], "attributes.csv row " + std::to_string(row.line));
  }
  if (meta.contains("features")) {
    for (const auto& f : meta["features"])
      net.features.push_back({f.at("name").get<std::string>(), f.at("min").get<double>(),
                              f.at("max").get<double>(), f.at("constant").get<bool>()});
  }
  if (net.features.empty())
    for (Eigen::Index c = 0; c < m; ++c) net.features.push_back({attrs.header[c + 1], 0.0, 1.0, false});

  if (std::filesystem::exists(dir / "geometry.geojson")) {
    auto table = load_geometries(dir / "geometry.geojson");
    if (table.node_ids != net.node_ids)
      throw ValidationError("geometry.geojson ids do not match nodes.csv");
    net.geometries = std::move(table.geometries);
  }
  net.validate();
  return net;
}

}  // namespace regionflow
