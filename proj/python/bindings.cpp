#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "regionflow/baselines.hpp"
#include "regionflow/errors.hpp"
#include "regionflow/hpsa.hpp"
#include "regionflow/metrics.hpp"
#include "regionflow/network.hpp"
#include "regionflow/pipeline.hpp"
#include "regionflow/render.hpp"
#include "regionflow/synth.hpp"
#include "regionflow/version.hpp"

namespace py = pybind11;
using namespace regionflow;

namespace {

Partition to_partition(const std::vector<int>& labels) { return Partition(labels); }

py::dict report_dict(const MetricsReport& r) {
  py::dict d;
  d["name"] = r.name;
  d["communities"] = r.communities;
  d["intra_flow_ratio"] = r.intra_flow_ratio;
  d["inequality_raw"] = r.inequality_raw;
  d["inequality_norm"] = r.inequality_norm;
  d["cosine_similarity"] = r.cosine_similarity;
  d["synthetic_score"] = r.synthetic_score;
  d["join_count_ratio"] = r.join_count_ratio;
  return d;
}

ModelConfig model_config(const std::string& model, int layers, int hidden, int output, int heads, int epochs,
                         double lr, int hop_epsilon, std::optional<double> pos_threshold, double weight_threshold,
                         std::uint64_t seed) {
  ModelConfig c;
  c.model = parse_model(model);
  c.layers = layers;
  c.hidden_dim = hidden;
  c.output_dim = output;
  c.heads = heads;
  c.epochs = epochs;
  c.learning_rate = lr;
  c.hop_epsilon = hop_epsilon;
  c.pos_threshold = pos_threshold;
  c.weight_threshold = weight_threshold;
  c.seed = seed;
  c.validate();
  return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "regionflow native core";
  m.attr("__version__") = kVersion;

  static py::exception<ValidationError> validation(m, "ValidationError", PyExc_ValueError);
  static py::exception<NumericalError> numerical(m, "NumericalError", PyExc_ArithmeticError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ValidationError& e) {
      PyErr_SetString(validation.ptr(), e.what());
    } catch (const NumericalError& e) {
      PyErr_SetString(numerical.ptr(), e.what());
    }
  });

  py::class_<SpatialNetwork>(m, "SpatialNetwork")
      .def_readonly("node_ids", &SpatialNetwork::node_ids)
      .def_readonly("adjacency", &SpatialNetwork::adjacency)
      .def_readonly("flows", &SpatialNetwork::flows)
      .def_readonly("attributes", &SpatialNetwork::attributes)
      .def_property_readonly("feature_names",
                             [](const SpatialNetwork& n) {
                               std::vector<std::string> names;
                               for (const auto& f : n.features) names.push_back(f.name);
                               return names;
                             })
      .def_property_readonly("has_geometry", [](const SpatialNetwork& n) { return !n.geometries.empty(); })
      .def("__len__", &SpatialNetwork::size)
      .def("__repr__", [](const SpatialNetwork& n) {
        return "<SpatialNetwork n=" + std::to_string(n.size()) + " features=" + std::to_string(n.feature_count()) + ">";
      });

  m.def("load_network", &load_network, py::arg("directory"));
  m.def("save_network", &save_network, py::arg("directory"), py::arg("network"));
  m.def(
      "assemble_network",
      [](const std::filesystem::path& geojson, const std::filesystem::path& flows,
         const std::filesystem::path& attributes, const std::string& contiguity, double tolerance, bool symmetrize,
         bool connect_islands) {
        AssemblyOptions o;
        o.rule = parse_contiguity(contiguity);
        o.tolerance = tolerance;
        o.symmetrize = symmetrize;
        o.connect_islands = connect_islands;
        return assemble_network(geojson, flows, attributes, o);
      },
      py::arg("geojson"), py::arg("flows"), py::arg("attributes"), py::arg("contiguity") = "rook",
      py::arg("tolerance") = 0.0, py::arg("symmetrize") = true, py::arg("connect_islands") = false);

  m.def(
      "synth",
      [](int size, int cols, int planted, double lambda_in, double lambda_out, int feature_dim, double feature_sep,
         double noise_sd, std::uint64_t seed) {
        SynthConfig c;
        c.lattice_size = size;
        c.lattice_cols = cols;
        c.planted_communities = planted;
        c.lambda_in = lambda_in;
        c.lambda_out = lambda_out;
        c.feature_dim = feature_dim;
        c.feature_sep = feature_sep;
        c.noise_sd = noise_sd;
        c.seed = seed;
        c.validate();
        SynthNetwork s = generate(c);
        return py::make_tuple(std::move(s.network), s.planted.labels());
      },
      "Planted-partition lattice; returns (network, planted_labels).", py::arg("size") = 10, py::arg("cols") = 0,
      py::arg("planted") = 4, py::arg("lambda_in") = 8.0, py::arg("lambda_out") = 1.0, py::arg("feature_dim") = 4,
      py::arg("feature_sep") = 0.4, py::arg("noise_sd") = 0.1, py::arg("seed") = 0);

  m.def(
      "train",
      [](const SpatialNetwork& net, const std::string& model, int layers, int hidden, int output, int heads, int epochs,
         double lr, int hop_epsilon, std::optional<double> pos_threshold, double weight_threshold, std::uint64_t seed) {
        const ModelConfig c = model_config(model, layers, hidden, output, heads, epochs, lr, hop_epsilon,
                                           pos_threshold, weight_threshold, seed);
        TrainResult r;
        {
          py::gil_scoped_release release;
          r = train(net, c);
        }
        return py::make_tuple(r.embeddings, r.loss_history);
      },
      "Train a region2vec model; returns (embeddings, loss_history).", py::arg("network"),
      py::arg("model") = "weighted-gat", py::arg("layers") = 2, py::arg("hidden") = 64, py::arg("output") = 32,
      py::arg("heads") = 1, py::arg("epochs") = 300, py::arg("lr") = 0.01, py::arg("hop_epsilon") = 2,
      py::arg("pos_threshold") = py::none(), py::arg("weight_threshold") = 100.0, py::arg("seed") = 0);

  m.def(
      "constrained_agglomerative",
      [](const Matrix& z, const Matrix& adjacency, int k, const std::string& linkage) {
        return constrained_agglomerative(z, adjacency, k, parse_linkage(linkage)).labels();
      },
      py::arg("embeddings"), py::arg("adjacency"), py::arg("k"), py::arg("linkage") = "ward");
  m.def(
      "kmeans", [](const Matrix& x, int k, std::uint64_t seed, int max_iter) { return kmeans(x, k, seed, max_iter).labels(); },
      py::arg("points"), py::arg("k"), py::arg("seed") = 0, py::arg("max_iter") = 300);
  m.def(
      "louvain",
      [](const Matrix& flows, std::uint64_t seed, double resolution) {
        LouvainResult r = louvain(flows, seed, resolution);
        return py::make_tuple(r.partition.labels(), r.quality);
      },
      "Returns (labels, modularity).", py::arg("flows"), py::arg("seed") = 0, py::arg("resolution") = 1.0);
  m.def(
      "modularity",
      [](const Matrix& flows, const std::vector<int>& labels, double resolution) {
        return modularity(flows, to_partition(labels), resolution);
      },
      py::arg("flows"), py::arg("labels"), py::arg("resolution") = 1.0);
  m.def(
      "walk_embedding",
      [](const SpatialNetwork& net, const std::string& method, int walk_length, int walks_per_node, double p, double q,
         int dim, int window, std::uint64_t seed) {
        BaselineOptions o;
        o.seed = seed;
        o.walks.walk_length = walk_length;
        o.walks.walks_per_node = walks_per_node;
        o.walks.p = p;
        o.walks.q = q;
        o.walks.skipgram.dim = dim;
        o.walks.skipgram.window = window;
        return walk_embedding(net, parse_baseline(method), o);
      },
      py::arg("network"), py::arg("method") = "node2vec", py::arg("walk_length") = 80, py::arg("walks_per_node") = 10,
      py::arg("p") = 1.0, py::arg("q") = 1.0, py::arg("dim") = 32, py::arg("window") = 10, py::arg("seed") = 0);

  m.def(
      "intra_flow_ratio",
      [](const Matrix& flows, const std::vector<int>& labels) { return intra_flow_ratio(flows, to_partition(labels)); },
      py::arg("flows"), py::arg("labels"));
  m.def(
      "inequality_raw",
      [](const Matrix& x, const std::vector<int>& labels) { return inequality_raw(x, to_partition(labels)).value; },
      py::arg("attributes"), py::arg("labels"));
  m.def(
      "cosine_within",
      [](const Matrix& x, const std::vector<int>& labels) { return cosine_within(x, to_partition(labels)).value; },
      py::arg("attributes"), py::arg("labels"));
  m.def(
      "join_count_ratio",
      [](const Matrix& a, const std::vector<int>& labels) { return join_count_ratio(a, to_partition(labels)); },
      py::arg("adjacency"), py::arg("labels"));
  m.def(
      "evaluate",
      [](const SpatialNetwork& net, const std::vector<std::vector<int>>& partitions, std::vector<std::string> names) {
        if (!names.empty() && names.size() != partitions.size())
          throw ValidationError("evaluate: names and partitions differ in length");
        std::vector<MetricsReport> reports;
        for (std::size_t i = 0; i < partitions.size(); ++i)
          reports.push_back(evaluate_partition(net, to_partition(partitions[i]), names.empty() ? "" : names[i]));
        normalize_batch(reports);
        py::list out;
        for (const auto& r : reports) out.append(report_dict(r));
        return out;
      },
      "Score a batch of partitions; inequality is min-max normalized across the batch.", py::arg("network"),
      py::arg("partitions"), py::arg("names") = std::vector<std::string>{});
  m.def(
      "adjusted_rand_index", [](const std::vector<int>& a, const std::vector<int>& b) { return adjusted_rand_index(a, b); },
      py::arg("a"), py::arg("b"));

  m.def(
      "designate",
      [](const std::vector<int>& labels, const std::vector<double>& population, const std::vector<double>& providers,
         const std::vector<double>& area, double threshold) {
        const auto profiles = aggregate_profiles(to_partition(labels), population, providers, area);
        const Designation d = designate(profiles, threshold);
        py::dict out;
        out["designated"] = d.designated;
        out["ratios"] = d.ratios;
        out["hpsa_count"] = d.summary.hpsa_count;
        out["mean_ratio"] = d.summary.mean_ratio;
        out["infinite_ratio_count"] = d.summary.infinite_ratio_count;
        out["total_area"] = d.summary.total_area;
        return out;
      },
      py::arg("labels"), py::arg("population"), py::arg("providers"), py::arg("area"),
      py::arg("threshold") = kDefaultRatioThreshold);

  m.def(
      "render",
      [](const SpatialNetwork& net, const std::vector<int>& labels, std::uint64_t seed) {
        if (net.geometries.empty()) throw ValidationError("render: network has no polygons");
        return render_choropleth(net.geometries, to_partition(labels), seed);
      },
      py::arg("network"), py::arg("labels"), py::arg("seed") = 0);
}
