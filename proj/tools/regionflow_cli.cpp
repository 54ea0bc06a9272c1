// regionflow command-line driver.
//
// Every subcommand reads its inputs, computes all results in memory and only
// then writes artifacts, so a validation or numerical failure never leaves
// partial output behind.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "regionflow/errors.hpp"
#include "regionflow/hpsa.hpp"
#include "regionflow/io.hpp"
#include "regionflow/network.hpp"
#include "regionflow/parallel.hpp"
#include "regionflow/pipeline.hpp"
#include "regionflow/render.hpp"
#include "regionflow/synth.hpp"
#include "regionflow/version.hpp"

namespace fs = std::filesystem;
using namespace regionflow;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kValidation = 2, kNumerical = 3 };

// ---------------------------------------------------------------------------
// Option registry: every flag is also a config key (the long name without
// dashes) and is echoed into run metadata.

struct Entry {
  CLI::Option* option = nullptr;
  std::function<std::string()> show;
};

class Command {
 public:
  Command(CLI::App* app, std::string path) : app_(app), path_(std::move(path)) {}

  CLI::App* app() const { return app_; }
  const std::string& path() const { return path_; }

  template <typename T>
  CLI::Option* add(const std::string& name, T& var, const std::string& help) {
    CLI::Option* opt = app_->add_option("--" + name, var, help)->capture_default_str();
    entries_[name] = {opt, [&var] { return show_value(var); }};
    return opt;
  }

  CLI::Option* flag(const std::string& name, bool& var, const std::string& help) {
    CLI::Option* opt = app_->add_flag("--" + name + ",!--no-" + name, var, help);
    entries_[name] = {opt, [&var] { return std::string(var ? "true" : "false"); }};
    return opt;
  }

  // Config values fill every option the command line left unset.
  void apply_config(const std::map<std::string, std::string>& config) {
    for (const auto& [key, value] : config) {
      auto it = entries_.find(key);
      if (it == entries_.end() || it->second.option->count() > 0) continue;
      CLI::Option* opt = it->second.option;
      try {
        opt->add_result(value);
        opt->run_callback();
      } catch (const CLI::Error& e) {
        throw ValidationError("config key '" + key + "': " + e.what());
      }
    }
  }

  bool knows(const std::string& key) const { return entries_.count(key) > 0; }

  nlohmann::ordered_json echo() const {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& [key, entry] : entries_) j[key] = entry.show();
    return j;
  }

  std::function<void()> run;

 private:
  static std::string show_value(const std::string& v) { return v; }
  static std::string show_value(double v) { return io::format_double(v); }
  static std::string show_value(int v) { return std::to_string(v); }
  static std::string show_value(std::uint64_t v) { return std::to_string(v); }
  static std::string show_value(const std::vector<std::string>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + v[i];
    return out;
  }

  CLI::App* app_;
  std::string path_;
  std::map<std::string, Entry> entries_;
};

std::map<std::string, std::string> read_config(const fs::path& path) {
  if (!fs::exists(path)) throw ValidationError("config file not found: " + path.string());
  std::istringstream in(io::read_text(path));
  std::map<std::string, std::string> out;
  std::string line;
  int number = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++number;
    if (number == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError(path.string() + ":" + std::to_string(number) + ": expected key=value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    std::replace(key.begin(), key.end(), '_', '-');
    if (key.empty()) throw ValidationError(path.string() + ":" + std::to_string(number) + ": empty key");
    out[key] = value;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Shared option groups.

struct NetworkInput {
  std::string network;
  std::string geojson;
  std::string flows;
  std::string attributes;
  std::string contiguity = "rook";
  double tolerance = 0.0;
  bool symmetrize = true;
  bool connect_islands = false;

  void add(Command& cmd, bool raw_inputs) {
    cmd.add("network", network, "Network directory written by `graph build` or `synth`");
    if (!raw_inputs) return;
    cmd.add("geojson", geojson, "Polygon FeatureCollection (feature property \"id\")");
    cmd.add("flows", flows, "Flow CSV: origin,destination,weight");
    cmd.add("attributes", attributes, "Attribute CSV: id,<feature>...");
    cmd.add("contiguity", contiguity, "Adjacency rule: rook or queen");
    cmd.add("tolerance", tolerance, "Vertex snapping tolerance");
    cmd.flag("symmetrize", symmetrize, "Use S + S^T for directed flows (default on)");
    cmd.flag("connect-islands", connect_islands, "Link isolated units to the nearest centroid");
  }

  SpatialNetwork load() const {
    const bool raw = !geojson.empty() || !flows.empty() || !attributes.empty();
    if (!network.empty() && raw) throw ValidationError("give either --network or --geojson/--flows/--attributes");
    if (!network.empty()) {
      require_dir(network);
      return load_network(network);
    }
    if (geojson.empty() || flows.empty() || attributes.empty())
      throw ValidationError("network input missing: give --network or all of --geojson, --flows, --attributes");
    require_file(geojson);
    require_file(flows);
    require_file(attributes);
    AssemblyOptions opts;
    opts.rule = parse_contiguity(contiguity);
    opts.tolerance = tolerance;
    opts.symmetrize = symmetrize;
    opts.connect_islands = connect_islands;
    return assemble_network(geojson, flows, attributes, opts);
  }

  static void require_file(const std::string& path) {
    if (!fs::is_regular_file(path)) throw ValidationError("file not found: " + path);
  }
  static void require_dir(const std::string& path) {
    if (!fs::is_directory(path)) throw ValidationError("network directory not found: " + path);
  }
};

struct ModelOptions {
  std::string model = "weighted-gat";
  int layers = 2;
  int hidden = 64;
  int output = 32;
  int heads = 1;
  int epochs = 300;
  double lr = 0.01;
  int hop_epsilon = 2;
  std::string pos_threshold = "auto";
  double weight_threshold = 100.0;

  void add(Command& cmd) {
    cmd.add("model", model, "gcn, gat or weighted-gat");
    cmd.add("layers", layers, "Graph layers");
    cmd.add("hidden", hidden, "Hidden width per head");
    cmd.add("output", output, "Embedding dimension");
    cmd.add("heads", heads, "Attention heads (gat, weighted-gat)");
    cmd.add("epochs", epochs, "Training epochs");
    cmd.add("lr", lr, "Adam learning rate");
    cmd.add("hop-epsilon", hop_epsilon, "Pairs beyond this hop distance enter the hop term");
    cmd.add("pos-threshold", pos_threshold, "Positive-pair flow threshold t; auto = 0 (gcn), 5 (gat), 200 (weighted-gat)");
    cmd.add("weight-threshold", weight_threshold, "Flow threshold t' for weighted-gat attention weights");
  }

  ModelConfig resolve(std::uint64_t seed) const {
    ModelConfig c;
    c.model = parse_model(model);
    c.layers = layers;
    c.hidden_dim = hidden;
    c.output_dim = output;
    c.heads = heads;
    c.epochs = epochs;
    c.learning_rate = lr;
    c.hop_epsilon = hop_epsilon;
    if (pos_threshold != "auto") c.pos_threshold = io::parse_double(pos_threshold, "--pos-threshold");
    c.weight_threshold = weight_threshold;
    c.seed = seed;
    c.validate();
    return c;
  }
};

struct ClusterFlags {
  int k = 14;
  std::string linkage = "ward";

  void add(Command& cmd) {
    cmd.add("k", k, "Number of communities");
    cmd.add("linkage", linkage, "ward, average or complete");
  }
  ClusterOptions resolve() const {
    if (k < 1) throw ValidationError("--k must be >= 1");
    return {k, parse_linkage(linkage)};
  }
};

struct WalkFlags {
  int walk_length = 80;
  int walks_per_node = 10;
  double p = 1.0;
  double q = 1.0;
  int dim = 32;
  int window = 10;
  int negative = 5;
  int sg_epochs = 1;
  double sg_lr = 0.025;

  void add(Command& cmd) {
    cmd.add("walk-length", walk_length, "Steps per walk");
    cmd.add("walks-per-node", walks_per_node, "Walks started at every node");
    cmd.add("p", p, "node2vec return parameter");
    cmd.add("q", q, "node2vec in-out parameter");
    cmd.add("dim", dim, "Skip-gram embedding dimension");
    cmd.add("window", window, "Skip-gram context window");
    cmd.add("negative", negative, "Negative samples per context pair");
    cmd.add("sg-epochs", sg_epochs, "Skip-gram passes over the corpus");
    cmd.add("sg-lr", sg_lr, "Initial skip-gram learning rate");
  }
  WalkOptions resolve() const {
    if (walk_length < 1 || walks_per_node < 1) throw ValidationError("walk length and walks per node must be >= 1");
    if (!(p > 0.0) || !(q > 0.0)) throw ValidationError("--p and --q must be > 0");
    if (dim < 1 || window < 1 || negative < 0 || sg_epochs < 1 || !(sg_lr > 0.0))
      throw ValidationError("invalid skip-gram settings");
    WalkOptions w;
    w.walk_length = walk_length;
    w.walks_per_node = walks_per_node;
    w.p = p;
    w.q = q;
    w.skipgram.dim = dim;
    w.skipgram.window = window;
    w.skipgram.negative_samples = negative;
    w.skipgram.epochs = sg_epochs;
    w.skipgram.learning_rate = sg_lr;
    return w;
  }
};

std::vector<int> parse_k_values(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  auto to_int = [](const std::string& s) {
    const double v = io::parse_double(s, "--k-values");
    if (v != std::floor(v) || v < 1) throw ValidationError("--k-values entries must be integers >= 1: " + s);
    return static_cast<int>(v);
  };
  while (std::getline(ss, item, ',')) {
    const auto dots = item.find("..");
    if (dots == std::string::npos) {
      out.push_back(to_int(item));
      continue;
    }
    const int lo = to_int(item.substr(0, dots)), hi = to_int(item.substr(dots + 2));
    if (lo > hi) throw ValidationError("--k-values range is empty: " + item);
    for (int k = lo; k <= hi; ++k) out.push_back(k);
  }
  if (out.empty()) throw ValidationError("--k-values is empty");
  return out;
}

std::string json_text(const nlohmann::ordered_json& j) { return j.dump(2) + "\n"; }

const auto kStart = std::chrono::steady_clock::now();

nlohmann::ordered_json run_metadata(const Command& cmd, std::uint64_t seed) {
  nlohmann::ordered_json j;
  j["tool"] = "regionflow";
  j["version"] = kVersion;
  j["command"] = cmd.path();
  j["seed"] = seed;
  j["config"] = cmd.echo();
  j["threads"] = thread_count();
  j["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - kStart).count();
  return j;
}

// Writes are staged so nothing touches disk until every result exists.
class Outputs {
 public:
  void add(fs::path path, std::string content) { files_.emplace_back(std::move(path), std::move(content)); }
  void commit() const {
    for (const auto& [path, content] : files_) io::write_text(path, content);
  }

 private:
  std::vector<std::pair<fs::path, std::string>> files_;
};

void require_output(const std::string& out, const std::string& flag) {
  if (out.empty()) throw ValidationError(flag + " is required");
}

void log(const std::string& message) { std::cerr << message << "\n"; }

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

void log_training(const TrainResult& r) {
  const std::size_t n = r.loss_history.size();
  const std::size_t step = std::max<std::size_t>(1, n / 10);
  for (std::size_t e = 0; e < n; e += step) log("epoch " + std::to_string(e) + " loss " + io::format_double(r.loss_history[e], 6));
  log("final loss " + io::format_double(r.final_loss, 6));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"regionflow: community detection on spatial interaction networks"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::vector<std::unique_ptr<Command>> commands;
  auto make = [&](CLI::App* parent, const std::string& name, const std::string& help, const std::string& path) {
    commands.push_back(std::make_unique<Command>(parent->add_subcommand(name, help), path));
    return commands.back().get();
  };
  std::string config_path;
  auto with_config = [&](Command* cmd) {
    cmd->app()->add_option("--config", config_path, "Flat key=value file; command-line flags take precedence");
  };

  // synth ------------------------------------------------------------------
  SynthConfig synth_cfg;
  std::string synth_out;
  {
    Command* c = make(&app, "synth", "Generate a planted-partition lattice network", "synth");
    with_config(c);
    c->add("out", synth_out, "Output network directory")->required(false);
    c->add("size", synth_cfg.lattice_size, "Lattice rows (and columns unless --cols)");
    c->add("cols", synth_cfg.lattice_cols, "Lattice columns; 0 = square");
    c->add("planted", synth_cfg.planted_communities, "Planted blocks");
    c->add("lambda-in", synth_cfg.lambda_in, "Poisson mean for intra-block flows");
    c->add("lambda-out", synth_cfg.lambda_out, "Poisson mean for inter-block flows");
    c->add("feature-dim", synth_cfg.feature_dim, "Attribute count");
    c->add("feature-sep", synth_cfg.feature_sep, "Distance between block feature means");
    c->add("noise-sd", synth_cfg.noise_sd, "Feature noise standard deviation");
    c->add("seed", synth_cfg.seed, "Random seed");
    c->run = [&, c] {
      require_output(synth_out, "--out");
      synth_cfg.validate();
      const SynthNetwork s = generate(synth_cfg);
      save_synth(synth_out, s);
      io::write_text(fs::path(synth_out) / "run.json", json_text(run_metadata(*c, synth_cfg.seed)));
      log("wrote " + std::to_string(s.network.size()) + "-node network to " + synth_out);
    };
  }

  // graph build --------------------------------------------------------------
  NetworkInput build_in;
  std::string build_out;
  {
    CLI::App* graph = app.add_subcommand("graph", "Spatial network assembly");
    graph->require_subcommand(1);
    Command* c = make(graph, "build", "Assemble a network from polygons, flows and attributes", "graph build");
    with_config(c);
    build_in.add(*c, true);
    c->add("out", build_out, "Output network directory");
    c->run = [&, c] {
      require_output(build_out, "--out");
      if (!build_in.network.empty()) throw ValidationError("graph build takes --geojson/--flows/--attributes");
      const SpatialNetwork net = build_in.load();
      save_network(build_out, net);
      io::write_text(fs::path(build_out) / "run.json", json_text(run_metadata(*c, 0)));
      log("wrote " + std::to_string(net.size()) + "-node network to " + build_out);
    };
  }

  // embed ------------------------------------------------------------------
  NetworkInput embed_in;
  ModelOptions embed_model;
  std::uint64_t embed_seed = 0;
  std::string embed_out;
  {
    Command* c = make(&app, "embed", "Train a region2vec model and write node embeddings", "embed");
    with_config(c);
    embed_in.add(*c, true);
    embed_model.add(*c);
    c->add("seed", embed_seed, "Random seed");
    c->add("out", embed_out, "Output directory");
    c->run = [&, c] {
      require_output(embed_out, "--out");
      const ModelConfig mc = embed_model.resolve(embed_seed);
      const SpatialNetwork net = embed_in.load();
      const TrainResult r = train(net, mc);
      log_training(r);
      Outputs out;
      const fs::path dir = embed_out;
      out.add(dir / "embeddings.csv", embeddings_to_csv(net.node_ids, r.embeddings));
      out.add(dir / "loss.csv", loss_history_to_csv(r.loss_history));
      auto meta = run_metadata(*c, embed_seed);
      meta["resolved"] = {{"pos_threshold", mc.resolved_pos_threshold()}, {"final_loss", r.final_loss}};
      out.add(dir / "run.json", json_text(meta));
      out.commit();
    };
  }

  // cluster ----------------------------------------------------------------
  NetworkInput cluster_in;
  ClusterFlags cluster_flags;
  std::string cluster_embeddings, cluster_out;
  {
    Command* c = make(&app, "cluster", "Contiguity-constrained agglomerative clustering of embeddings", "cluster");
    with_config(c);
    cluster_in.add(*c, true);
    cluster_flags.add(*c);
    c->add("embeddings", cluster_embeddings, "Embedding CSV: id,<dims>...");
    c->add("out", cluster_out, "Output partition CSV");
    c->run = [&] {
      require_output(cluster_out, "--out");
      require_output(cluster_embeddings, "--embeddings");
      NetworkInput::require_file(cluster_embeddings);
      const ClusterOptions co = cluster_flags.resolve();
      const SpatialNetwork net = cluster_in.load();
      const Matrix z = load_embeddings(cluster_embeddings, net.node_ids);
      const Partition p = constrained_agglomerative(z, net.adjacency, co.k, co.linkage);
      io::write_text(cluster_out, partition_to_csv(net.node_ids, p));
    };
  }

  // baseline ---------------------------------------------------------------
  struct BaselineState {
    NetworkInput in;
    ClusterFlags cluster;
    WalkFlags walks;
    std::uint64_t seed = 0;
    double resolution = 1.0;
    int max_iter = 300;
    std::string out;
  };
  std::map<std::string, BaselineState> baselines;
  {
    CLI::App* parent = app.add_subcommand("baseline", "Comparison methods");
    parent->require_subcommand(1);
    for (const std::string name : {"louvain", "kmeans", "node2vec", "deepwalk"}) {
      BaselineState& st = baselines[name];
      Command* c = make(parent, name, "Run the " + name + " baseline", "baseline " + name);
      with_config(c);
      st.in.add(*c, true);
      c->add("seed", st.seed, "Random seed");
      c->add("out", st.out, "Output directory");
      if (name == "louvain") c->add("resolution", st.resolution, "Modularity resolution");
      if (name != "louvain") st.cluster.add(*c);
      if (name == "kmeans") c->add("max-iter", st.max_iter, "Lloyd iterations");
      if (name == "node2vec") st.walks.add(*c);
      if (name == "deepwalk") {
        // Same flags minus p and q, which are fixed at 1.
        WalkFlags& w = st.walks;
        c->add("walk-length", w.walk_length, "Steps per walk");
        c->add("walks-per-node", w.walks_per_node, "Walks started at every node");
        c->add("dim", w.dim, "Skip-gram embedding dimension");
        c->add("window", w.window, "Skip-gram context window");
        c->add("negative", w.negative, "Negative samples per context pair");
        c->add("sg-epochs", w.sg_epochs, "Skip-gram passes over the corpus");
        c->add("sg-lr", w.sg_lr, "Initial skip-gram learning rate");
      }
      c->run = [&st, c, name] {
        require_output(st.out, "--out");
        const BaselineKind kind = parse_baseline(name);
        BaselineOptions bo;
        bo.seed = st.seed;
        bo.resolution = st.resolution;
        bo.kmeans_max_iter = st.max_iter;
        if (kind != BaselineKind::louvain) bo.cluster = st.cluster.resolve();
        if (kind == BaselineKind::node2vec || kind == BaselineKind::deepwalk) bo.walks = st.walks.resolve();
        if (!(bo.resolution > 0.0)) throw ValidationError("--resolution must be > 0");
        if (bo.kmeans_max_iter < 1) throw ValidationError("--max-iter must be >= 1");
        const SpatialNetwork net = st.in.load();
        const BaselineResult r = run_baseline(net, kind, bo);
        Outputs out;
        const fs::path dir = st.out;
        out.add(dir / "partition.csv", partition_to_csv(net.node_ids, r.partition));
        if (r.embeddings) out.add(dir / "embeddings.csv", embeddings_to_csv(net.node_ids, *r.embeddings));
        if (r.louvain) {
          nlohmann::ordered_json q;
          q["modularity"] = r.louvain->quality;
          q["resolution"] = bo.resolution;
          q["communities"] = r.partition.k();
          q["passes"] = r.louvain->passes;
          q["pass_modularity"] = r.louvain->pass_quality;
          out.add(dir / "quality.json", json_text(q));
        }
        out.add(dir / "run.json", json_text(run_metadata(*c, st.seed)));
        out.commit();
        log(name + ": " + std::to_string(r.partition.k()) + " communities");
      };
    }
  }

  // detect -----------------------------------------------------------------
  NetworkInput detect_in;
  ModelOptions detect_model;
  ClusterFlags detect_cluster;
  std::uint64_t detect_seed = 0;
  std::string detect_out;
  {
    Command* c = make(&app, "detect", "Full pipeline: train, cluster, score and map", "detect");
    with_config(c);
    detect_in.add(*c, true);
    detect_model.add(*c);
    detect_cluster.add(*c);
    c->add("seed", detect_seed, "Random seed (training and palette)");
    c->add("out", detect_out, "Output directory");
    c->run = [&, c] {
      require_output(detect_out, "--out");
      const ModelConfig mc = detect_model.resolve(detect_seed);
      const ClusterOptions co = detect_cluster.resolve();
      const SpatialNetwork net = detect_in.load();
      const DetectResult r = run_detect(net, mc, co, detect_seed);
      log_training(r.training);
      Outputs out;
      const fs::path dir = detect_out;
      out.add(dir / "embeddings.csv", embeddings_to_csv(net.node_ids, r.training.embeddings));
      out.add(dir / "partition.csv", partition_to_csv(net.node_ids, r.partition));
      out.add(dir / "metrics.json", metrics_to_json({r.metrics}));
      out.add(dir / "loss.csv", loss_history_to_csv(r.training.loss_history));
      if (r.svg)
        out.add(dir / "map.svg", *r.svg);
      else
        log("warning: network has no polygons; map.svg not written");
      auto meta = run_metadata(*c, detect_seed);
      meta["resolved"] = {{"pos_threshold", mc.resolved_pos_threshold()},
                          {"final_loss", r.training.final_loss},
                          {"communities", r.partition.k()}};
      out.add(dir / "run.json", json_text(meta));
      out.commit();
      log("intra_flow_ratio " + fmt(r.metrics.intra_flow_ratio) + ", cosine " + fmt(r.metrics.cosine_similarity));
    };
  }

  // sweep ------------------------------------------------------------------
  NetworkInput sweep_in;
  ModelOptions sweep_model;
  std::string sweep_k = "2..14", sweep_linkage = "ward", sweep_embeddings, sweep_out;
  std::vector<std::string> sweep_baselines;
  WalkFlags sweep_walks;
  std::uint64_t sweep_seed = 0;
  {
    Command* c = make(&app, "sweep", "Cluster one trained embedding for a list of K values", "sweep");
    with_config(c);
    sweep_in.add(*c, true);
    sweep_model.add(*c);
    sweep_walks.add(*c);
    c->add("k-values", sweep_k, "K list: comma-separated values and lo..hi ranges");
    c->add("linkage", sweep_linkage, "ward, average or complete");
    c->add("embeddings", sweep_embeddings, "Reuse this embedding CSV instead of training");
    c->add("baselines", sweep_baselines, "Extra methods: kmeans, node2vec, deepwalk")->delimiter(',');
    c->add("seed", sweep_seed, "Random seed");
    c->add("out", sweep_out, "Output CSV");
    c->run = [&, c] {
      require_output(sweep_out, "--out");
      const std::vector<int> ks = parse_k_values(sweep_k);
      const Linkage linkage = parse_linkage(sweep_linkage);
      const ModelConfig mc = sweep_model.resolve(sweep_seed);
      std::vector<BaselineKind> extra;
      for (const auto& b : sweep_baselines) {
        const BaselineKind kind = parse_baseline(b);
        if (kind == BaselineKind::louvain) throw ValidationError("louvain chooses its own K and cannot be swept");
        extra.push_back(kind);
      }
      BaselineOptions bo;
      bo.seed = sweep_seed;
      if (!extra.empty()) bo.walks = sweep_walks.resolve();
      if (!sweep_embeddings.empty()) NetworkInput::require_file(sweep_embeddings);
      const SpatialNetwork net = sweep_in.load();

      std::vector<SweepInput> methods;
      if (!sweep_embeddings.empty()) {
        methods.push_back({"region2vec-" + to_string(mc.model), load_embeddings(sweep_embeddings, net.node_ids), false});
      } else {
        const TrainResult r = train(net, mc);
        log_training(r);
        methods.push_back({"region2vec-" + to_string(mc.model), r.embeddings, false});
      }
      for (BaselineKind kind : extra) {
        if (kind == BaselineKind::kmeans)
          methods.push_back({"kmeans", std::nullopt, true});
        else
          methods.push_back({to_string(kind), walk_embedding(net, kind, bo), false});
      }
      const auto rows = run_sweep(net, methods, ks, linkage, sweep_seed);
      for (const auto& row : rows)
        if (!row.value) log("warning: " + row.method + " K=" + std::to_string(row.k) + " skipped: " + row.note);
      io::write_text(sweep_out, sweep_to_csv(rows));
    };
  }

  // metrics ----------------------------------------------------------------
  NetworkInput metrics_in;
  std::vector<std::string> metrics_partitions, metrics_names;
  std::string metrics_out;
  {
    Command* c = make(&app, "metrics", "Score one or more partitions as a batch", "metrics");
    with_config(c);
    metrics_in.add(*c, true);
    c->add("partition", metrics_partitions, "Partition CSV (repeatable)")->delimiter(',');
    c->add("names", metrics_names, "Run names, one per partition (default: the partition paths)")->delimiter(',');
    c->add("out", metrics_out, "Output JSON; a CSV mirror is written next to it");
    c->run = [&] {
      require_output(metrics_out, "--out");
      if (metrics_partitions.empty()) throw ValidationError("--partition is required");
      if (!metrics_names.empty() && metrics_names.size() != metrics_partitions.size())
        throw ValidationError("--names needs one entry per partition");
      for (const auto& p : metrics_partitions) NetworkInput::require_file(p);
      const SpatialNetwork net = metrics_in.load();
      std::vector<MetricsReport> reports;
      for (std::size_t i = 0; i < metrics_partitions.size(); ++i) {
        const Partition p = load_partition(metrics_partitions[i], net.node_ids);
        const std::string name = metrics_names.empty() ? metrics_partitions[i] : metrics_names[i];
        reports.push_back(evaluate_partition(net, p, name));
      }
      normalize_batch(reports);
      Outputs out;
      fs::path json_path = metrics_out;
      fs::path csv_path = json_path;
      csv_path.replace_extension(".csv");
      if (csv_path == json_path) csv_path += ".csv";
      out.add(json_path, metrics_to_json(reports));
      out.add(csv_path, metrics_to_csv(reports));
      out.commit();
    };
  }

  // hpsa -------------------------------------------------------------------
  NetworkInput hpsa_in;
  std::string hpsa_partition, hpsa_health, hpsa_out;
  double hpsa_threshold = kDefaultRatioThreshold;
  {
    Command* c = make(&app, "hpsa", "Shortage-area designation over detected communities", "hpsa");
    with_config(c);
    hpsa_in.add(*c, true);
    c->add("partition", hpsa_partition, "Partition CSV");
    c->add("health", hpsa_health, "Health CSV: id,population,providers,area_km2[,extra...]");
    c->add("threshold", hpsa_threshold, "Population-to-provider ratio that designates a community");
    c->add("out", hpsa_out, "Output JSON");
    c->run = [&] {
      require_output(hpsa_out, "--out");
      require_output(hpsa_partition, "--partition");
      require_output(hpsa_health, "--health");
      NetworkInput::require_file(hpsa_partition);
      NetworkInput::require_file(hpsa_health);
      if (!(hpsa_threshold > 0.0)) throw ValidationError("--threshold must be > 0");
      const SpatialNetwork net = hpsa_in.load();
      const Partition p = load_partition(hpsa_partition, net.node_ids);
      const HealthTable h = load_health(hpsa_health, net.node_ids);
      const auto profiles = aggregate_profiles(p, h.population, h.providers, h.area, h.extra);
      const Designation d = designate(profiles, hpsa_threshold);
      io::write_text(hpsa_out, hpsa_to_json(profiles, d, hpsa_threshold));
      log(std::to_string(d.summary.hpsa_count) + " of " + std::to_string(profiles.size()) + " communities designated");
    };
  }

  // render -----------------------------------------------------------------
  std::string render_network, render_geojson, render_partition, render_out;
  std::uint64_t render_seed = 0;
  {
    Command* c = make(&app, "render", "SVG choropleth of a partition", "render");
    with_config(c);
    c->add("network", render_network, "Network directory with geometry.geojson");
    c->add("geojson", render_geojson, "Polygon FeatureCollection");
    c->add("partition", render_partition, "Partition CSV");
    c->add("seed", render_seed, "Palette seed");
    c->add("out", render_out, "Output SVG");
    c->run = [&] {
      require_output(render_out, "--out");
      require_output(render_partition, "--partition");
      if (render_network.empty() == render_geojson.empty()) throw ValidationError("give exactly one of --network or --geojson");
      NetworkInput::require_file(render_partition);
      GeometryTable geoms;
      if (!render_geojson.empty()) {
        NetworkInput::require_file(render_geojson);
        geoms = load_geometries(render_geojson);
      } else {
        const fs::path g = fs::path(render_network) / "geometry.geojson";
        NetworkInput::require_file(g.string());
        geoms = load_geometries(g);
      }
      const Partition p = load_partition(render_partition, geoms.node_ids);
      io::write_text(render_out, render_choropleth(geoms.geometries, p, render_seed));
    };
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    for (auto& cmd : commands) {
      if (!cmd->app()->parsed()) continue;
      if (!config_path.empty()) {
        const auto config = read_config(config_path);
        for (const auto& [key, value] : config)
          if (key != "config" && std::none_of(commands.begin(), commands.end(),
                                              [&](const auto& c) { return c->knows(key); }))
            throw ValidationError("unknown config key '" + key + "'");
        cmd->apply_config(config);
      }
      cmd->run();
      return kOk;
    }
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kNumerical;
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kValidation;
  } catch (const CLI::Error& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  }
  return kUsage;
}
