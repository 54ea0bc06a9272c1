#include "regionflow/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "regionflow/errors.hpp"

namespace regionflow {

using autodiff::EdgeList;
using autodiff::SparseMatrix;
using autodiff::Tape;
using autodiff::Var;

ModelKind parse_model(const std::string& name) {
  if (name == "gcn") return ModelKind::gcn;
  if (name == "gat") return ModelKind::gat;
  if (name == "weighted-gat" || name == "weighted_gat") return ModelKind::weighted_gat;
  throw ValidationError("unknown model '" + name + "' (expected gcn, gat or weighted-gat)");
}

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::gcn: return "gcn";
    case ModelKind::gat: return "gat";
    case ModelKind::weighted_gat: return "weighted-gat";
  }
  return "gcn";
}

double ModelConfig::resolved_pos_threshold() const {
  if (pos_threshold) return *pos_threshold;
  switch (model) {
    case ModelKind::gcn: return 0.0;
    case ModelKind::gat: return 5.0;
    case ModelKind::weighted_gat: return 200.0;
  }
  return 0.0;
}

void ModelConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ValidationError("model config: " + msg); };
  if (layers < 1) fail("layers must be >= 1");
  if (hidden_dim < 1) fail("hidden_dim must be >= 1");
  if (output_dim < 2) fail("output_dim must be >= 2");
  if (heads < 1) fail("heads must be >= 1");
  if (epochs < 0) fail("epochs must be >= 0");
  if (!(learning_rate > 0.0)) fail("learning_rate must be positive");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0))
    fail("adam betas must lie in [0, 1)");
  if (!(adam_eps > 0.0)) fail("adam_eps must be positive");
  if (hop_epsilon < 1) fail("hop_epsilon must be >= 1");
  if (!(resolved_pos_threshold() >= 0.0)) fail("pos_threshold must be >= 0");
  if (!(weight_threshold >= 0.0)) fail("weight_threshold must be >= 0");
}

std::vector<Matrix*> ParamSet::tensors() {
  std::vector<Matrix*> out;
  for (auto& layer : layers) {
    for (auto& w : layer.weights) out.push_back(&w);
    for (auto& a : layer.attention) out.push_back(&a);
  }
  return out;
}

std::vector<const Matrix*> ParamSet::tensors() const {
  std::vector<const Matrix*> out;
  for (const auto& layer : layers) {
    for (const auto& w : layer.weights) out.push_back(&w);
    for (const auto& a : layer.attention) out.push_back(&a);
  }
  return out;
}

std::size_t ParamSet::scalar_count() const {
  std::size_t total = 0;
  for (const Matrix* t : tensors()) total += static_cast<std::size_t>(t->size());
  return total;
}

ParamSet init_params(const ModelConfig& config, Eigen::Index input_dim) {
  config.validate();
  std::mt19937_64 rng(config.seed);
  auto glorot = [&rng](Eigen::Index rows, Eigen::Index cols) {
    double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    std::uniform_real_distribution<double> dist(-limit, limit);
    Matrix m(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c)
      for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = dist(rng);
    return m;
  };
  ParamSet params;
  const bool attention = config.model != ModelKind::gcn;
  const int heads = attention ? config.heads : 1;
  Eigen::Index in = input_dim;
  for (int l = 0; l < config.layers; ++l) {
    const bool last = l + 1 == config.layers;
    const Eigen::Index out = last ? config.output_dim : config.hidden_dim;
    ParamSet::Layer layer;
    for (int h = 0; h < heads; ++h) {
      layer.weights.push_back(glorot(in, out));
      if (attention) layer.attention.push_back(glorot(2 * out, 1));
    }
    params.layers.push_back(std::move(layer));
    in = (attention && !last) ? out * heads : out;
  }
  return params;
}

PairSets build_pairs(const Matrix& flows, double threshold) {
  PairSets sets;
  for (Eigen::Index i = 0; i < flows.rows(); ++i)
    for (Eigen::Index j = i + 1; j < flows.cols(); ++j) {
      double s = flows(i, j);
      if (s > threshold)
        sets.positives.push_back({static_cast<int>(i), static_cast<int>(j), std::log(s)});
      else if (s == 0.0)
        sets.negatives.push_back({static_cast<int>(i), static_cast<int>(j)});
    }
  return sets;
}

Matrix build_gat_input(const Matrix& adjacency, const Matrix& flows, double threshold) {
  const Eigen::Index n = adjacency.rows();
  Matrix mask = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j && (adjacency(i, j) != 0.0 || flows(i, j) > threshold)) mask(i, j) = 1.0;
  return mask;
}

Matrix normalize_flow_weights(const Matrix& flows, const Matrix& adjacency, double weight_threshold) {
  const Eigen::Index n = flows.rows();
  double s_max = 0.0;
  bool any = false;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j && flows(i, j) > weight_threshold) s_max = std::max(s_max, flows(i, j)), any = true;
  if (!any) {
    std::ostringstream msg;
    msg << "no flow exceeds the weight threshold t' = " << weight_threshold << "; lower the threshold";
    throw ValidationError(msg.str());
  }
  const double denom = std::log1p(s_max);
  const double floor = std::min(1.0, 1.0 / denom);
  Matrix out = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) {
        out(i, j) = 1.0;
      } else if (flows(i, j) > weight_threshold) {
        out(i, j) = std::log1p(flows(i, j)) / denom;
      } else if (adjacency.size() && adjacency(i, j) != 0.0) {
        out(i, j) = floor;
      }
    }
  return out;
}

SparseMatrix gcn_propagation(const Matrix& adjacency) {
  const Eigen::Index n = adjacency.rows();
  Eigen::VectorXd inv_sqrt(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double deg = 1.0;
    for (Eigen::Index j = 0; j < n; ++j)
      if (j != i) deg += adjacency(i, j);
    inv_sqrt(i) = 1.0 / std::sqrt(deg);
  }
  std::vector<Eigen::Triplet<double>> trips;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      double a = i == j ? 1.0 : adjacency(i, j);
      if (a != 0.0) trips.emplace_back(i, j, a * inv_sqrt(i) * inv_sqrt(j));
    }
  SparseMatrix p(n, n);
  p.setFromTriplets(trips.begin(), trips.end());
  return p;
}

EdgeList mask_edges(const Matrix& mask) {
  EdgeList edges;
  for (Eigen::Index i = 0; i < mask.rows(); ++i) {
    for (Eigen::Index j = 0; j < mask.cols(); ++j)
      if (i == j || mask(i, j) != 0.0) edges.cols.push_back(static_cast<int>(j));
    edges.ptr.push_back(static_cast<int>(edges.cols.size()));
  }
  return edges;
}

namespace {

void check_input_dim(const ParamSet& params, Eigen::Index m) {
  if (params.layers.empty() || params.layers[0].weights.empty() || params.layers[0].weights[0].rows() != m)
    throw ValidationError("parameter shapes do not match the attribute dimension");
}

Var gcn_layers(Tape& tape, const SparseMatrix& p, Var x, const std::vector<Var>& weights) {
  Var z = x;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (tape.value(z).cols() != tape.value(weights[l]).rows())
      throw ValidationError("gcn: layer " + std::to_string(l) + " weight shape mismatch");
    z = autodiff::propagate(tape, p, autodiff::matmul(tape, z, weights[l]));
    if (l + 1 < weights.size()) z = autodiff::relu(tape, z);
  }
  return z;
}

// weights/attention are indexed [layer][head].
Var gat_layers(Tape& tape, const EdgeList& edges, const std::vector<double>* edge_weights, Var x,
               const std::vector<std::vector<Var>>& weights, const std::vector<std::vector<Var>>& attention,
               AttentionTrace* trace) {
  constexpr double kAttentionSlope = 0.2;
  Matrix edge_w;
  if (edge_weights) edge_w = Eigen::Map<const Matrix>(edge_weights->data(), static_cast<Eigen::Index>(edge_weights->size()), 1);
  if (trace) trace->assign(weights.size(), {});
  Var z = x;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    const bool last = l + 1 == weights.size();
    std::vector<Var> heads;
    for (std::size_t h = 0; h < weights[l].size(); ++h) {
      if (tape.value(z).cols() != tape.value(weights[l][h]).rows())
        throw ValidationError("gat: layer " + std::to_string(l) + " weight shape mismatch");
      Var wz = autodiff::matmul(tape, z, weights[l][h]);
      const Eigen::Index out = tape.value(wz).cols();
      if (tape.value(attention[l][h]).rows() != 2 * out)
        throw ValidationError("gat: layer " + std::to_string(l) + " attention shape mismatch");
      Var left = autodiff::matmul(tape, wz, autodiff::slice_rows(tape, attention[l][h], 0, out));
      Var right = autodiff::matmul(tape, wz, autodiff::slice_rows(tape, attention[l][h], out, out));
      Var scores = autodiff::leaky_relu(tape, autodiff::edge_scores(tape, left, right, edges), kAttentionSlope);
      Var alpha = autodiff::segment_softmax(tape, scores, edges);
      if (trace) {
        const Matrix& a = tape.value(alpha);
        (*trace)[l].emplace_back(a.data(), a.data() + a.size());
      }
      Var coef = edge_weights ? autodiff::hadamard(tape, alpha, edge_w) : alpha;
      Var agg = autodiff::edge_aggregate(tape, coef, wz, edges);
      heads.push_back(last ? agg : autodiff::elu(tape, agg));
    }
    z = last ? autodiff::mean(tape, heads) : autodiff::concat_cols(tape, heads);
  }
  return z;
}

struct RecordedParams {
  std::vector<Var> flat;
  std::vector<std::vector<Var>> weights;
  std::vector<std::vector<Var>> attention;
};

RecordedParams record_params(Tape& tape, const ParamSet& params, bool trainable) {
  RecordedParams rp;
  for (const auto& layer : params.layers) {
    rp.weights.emplace_back();
    rp.attention.emplace_back();
    for (const auto& w : layer.weights) {
      Var v = trainable ? tape.variable(w) : tape.constant(w);
      rp.weights.back().push_back(v);
      rp.flat.push_back(v);
    }
    for (const auto& a : layer.attention) {
      Var v = trainable ? tape.variable(a) : tape.constant(a);
      rp.attention.back().push_back(v);
      rp.flat.push_back(v);
    }
  }
  return rp;
}

std::vector<Var> first_heads(const std::vector<std::vector<Var>>& per_layer) {
  std::vector<Var> out;
  for (const auto& l : per_layer) {
    if (l.size() != 1) throw ValidationError("gcn: expected exactly one weight matrix per layer");
    out.push_back(l[0]);
  }
  return out;
}

}  // namespace

Matrix gcn_forward(const SpatialNetwork& network, const ParamSet& params) {
  check_input_dim(params, network.attributes.cols());
  SparseMatrix p = gcn_propagation(network.adjacency);
  Tape tape;
  Var x = tape.constant(network.attributes);
  auto rp = record_params(tape, params, false);
  return tape.value(gcn_layers(tape, p, x, first_heads(rp.weights)));
}

Matrix gat_forward(const SpatialNetwork& network, const ParamSet& params, const Matrix& mask,
                   const std::optional<Matrix>& flow_weights, AttentionTrace* attention) {
  check_input_dim(params, network.attributes.cols());
  EdgeList edges = mask_edges(mask);
  std::vector<double> weights;
  if (flow_weights) {
    for (std::size_t i = 0; i < edges.nodes(); ++i)
      for (int k = edges.ptr[i]; k < edges.ptr[i + 1]; ++k)
        weights.push_back(edges.cols[k] == static_cast<int>(i) ? 1.0 : (*flow_weights)(static_cast<Eigen::Index>(i), edges.cols[k]));
  }
  Tape tape;
  Var x = tape.constant(network.attributes);
  auto rp = record_params(tape, params, false);
  Var z = gat_layers(tape, edges, flow_weights ? &weights : nullptr, x, rp.weights, rp.attention, attention);
  return tape.value(z);
}

LossTerms make_loss_terms(PairSets pairs, const HopMatrix& hops, int hop_epsilon, double delta) {
  if (hop_epsilon < 1) throw ValidationError("hop_epsilon must be >= 1");
  LossTerms terms;
  terms.pairs = std::move(pairs);
  terms.delta = delta;
  for (std::size_t i = 0; i < hops.size(); ++i)
    for (std::size_t j = i + 1; j < hops.size(); ++j) {
      std::int32_t h = hops(i, j);
      if (h > hop_epsilon && h != HopMatrix::unreachable) {
        terms.far_pairs.push_back({static_cast<int>(i), static_cast<int>(j)});
        terms.far_coef.push_back(1.0 / std::log(static_cast<double>(h)));
      }
    }
  return terms;
}

namespace {

struct LossParts {
  double numerator = 0.0;
  double denominator = 0.0;
  double value = 0.0;
};

double row_distance(const Matrix& z, int i, int j) { return (z.row(i) - z.row(j)).norm(); }

LossParts evaluate(const Matrix& z, const LossTerms& terms, const std::vector<NodePair>& negatives) {
  const auto& pos = terms.pairs.positives;
  if (pos.empty()) throw ValidationError("loss: no positive pairs");
  LossParts parts;
  for (const auto& p : pos) parts.numerator += p.weight * row_distance(z, p.i, p.j);
  parts.numerator /= static_cast<double>(pos.size());
  double neg = 0.0;
  for (const auto& q : negatives) neg += row_distance(z, q.i, q.j);
  if (!negatives.empty()) neg /= static_cast<double>(negatives.size());
  double hop = 0.0;
  for (std::size_t k = 0; k < terms.far_pairs.size(); ++k)
    hop += terms.far_coef[k] * row_distance(z, terms.far_pairs[k].i, terms.far_pairs[k].j);
  parts.denominator = neg + hop + terms.delta;
  parts.value = parts.numerator / parts.denominator;
  return parts;
}

void check_finite(const Matrix& z) {
  if (!z.allFinite()) throw NumericalError("loss: embeddings contain non-finite values");
}

void accumulate_pair(Matrix& g, const Matrix& z, int i, int j, double coef) {
  Eigen::RowVectorXd diff = z.row(i) - z.row(j);
  double d = diff.norm();
  if (d == 0.0) return;
  diff *= coef / d;
  g.row(i) += diff;
  g.row(j) -= diff;
}

Var loss_op_with(Tape& tape, Var embeddings, const LossTerms& terms, const std::vector<NodePair>& negatives) {
  const Matrix& z = tape.value(embeddings);
  check_finite(z);
  LossParts parts = evaluate(z, terms, negatives);
  Matrix out(1, 1);
  out(0, 0) = parts.value;
  return tape.record(std::move(out), tape.requires_grad(embeddings),
                     [embeddings, &terms, &negatives, parts](Tape& t, const Matrix& g) {
                       const Matrix& z = t.value(embeddings);
                       const double up = g(0, 0);
                       const double den2 = parts.denominator * parts.denominator;
                       Matrix gz = Matrix::Zero(z.rows(), z.cols());
                       const double pos_scale = up / (static_cast<double>(terms.pairs.positives.size()) * parts.denominator);
                       for (const auto& p : terms.pairs.positives) accumulate_pair(gz, z, p.i, p.j, pos_scale * p.weight);
                       const double den_scale = -up * parts.numerator / den2;
                       if (!negatives.empty()) {
                         const double neg_scale = den_scale / static_cast<double>(negatives.size());
                         for (const auto& q : negatives) accumulate_pair(gz, z, q.i, q.j, neg_scale);
                       }
                       for (std::size_t k = 0; k < terms.far_pairs.size(); ++k)
                         accumulate_pair(gz, z, terms.far_pairs[k].i, terms.far_pairs[k].j, den_scale * terms.far_coef[k]);
                       t.add_grad(embeddings, gz);
                     });
}

}  // namespace

double compute_loss(const Matrix& embeddings, const LossTerms& terms) {
  check_finite(embeddings);
  return evaluate(embeddings, terms, terms.pairs.negatives).value;
}

double compute_loss(const Matrix& embeddings, const PairSets& pairs, const HopMatrix& hops, int hop_epsilon,
                    double delta) {
  return compute_loss(embeddings, make_loss_terms(pairs, hops, hop_epsilon, delta));
}

Var loss_op(Tape& tape, Var embeddings, const LossTerms& terms) {
  return loss_op_with(tape, embeddings, terms, terms.pairs.negatives);
}

ModelContext::ModelContext(const SpatialNetwork& network, const ModelConfig& config)
    : config_(config), attributes_(network.attributes) {
  config_.validate();
  network.validate();
  const double t = config_.resolved_pos_threshold();
  pairs_ = build_pairs(network.flows, t);
  hops_ = compute_hops(network.adjacency);
  if (config_.model == ModelKind::gcn) {
    propagation_ = gcn_propagation(network.adjacency);
  } else {
    Matrix mask = build_gat_input(network.adjacency, network.flows, t);
    edges_ = mask_edges(mask);
    if (config_.model == ModelKind::weighted_gat) {
      Matrix sw = normalize_flow_weights(network.flows, network.adjacency, config_.weight_threshold);
      for (std::size_t i = 0; i < edges_.nodes(); ++i)
        for (int k = edges_.ptr[i]; k < edges_.ptr[i + 1]; ++k)
          edge_weights_.push_back(edges_.cols[k] == static_cast<int>(i) ? 1.0 : sw(static_cast<Eigen::Index>(i), edges_.cols[k]));
    }
  }
  terms_ = make_loss_terms(pairs_, hops_, config_.hop_epsilon);
}

Var ModelContext::forward(Tape& tape, const std::vector<Var>& params, const ParamSet& shapes,
                          AttentionTrace* attention) const {
  Var x = tape.constant(attributes_);
  std::vector<std::vector<Var>> weights, att;
  std::size_t k = 0;
  for (const auto& layer : shapes.layers) {
    weights.emplace_back();
    att.emplace_back();
    for (std::size_t h = 0; h < layer.weights.size(); ++h) weights.back().push_back(params.at(k++));
    for (std::size_t h = 0; h < layer.attention.size(); ++h) att.back().push_back(params.at(k++));
  }
  if (config_.model == ModelKind::gcn) return gcn_layers(tape, propagation_, x, first_heads(weights));
  return gat_layers(tape, edges_, config_.model == ModelKind::weighted_gat ? &edge_weights_ : nullptr, x, weights,
                    att, attention);
}

Matrix ModelContext::embed(const ParamSet& params) const {
  check_input_dim(params, attributes_.cols());
  Tape tape;
  auto rp = record_params(tape, params, false);
  return tape.value(forward(tape, rp.flat, params));
}

double ModelContext::loss_and_grad(const ParamSet& params, std::vector<Matrix>* grads,
                                   const std::vector<NodePair>* negatives) const {
  check_input_dim(params, attributes_.cols());
  Tape tape;
  auto rp = record_params(tape, params, grads != nullptr);
  Var z = forward(tape, rp.flat, params);
  Var loss = loss_op_with(tape, z, terms_, negatives ? *negatives : terms_.pairs.negatives);
  double value = tape.value(loss)(0, 0);
  if (grads) {
    tape.backward(loss);
    grads->clear();
    for (Var v : rp.flat) grads->push_back(tape.grad(v));
  }
  return value;
}

TrainResult train(const SpatialNetwork& network, const ModelConfig& config) {
  ModelContext ctx(network, config);
  if (ctx.pairs().positives.empty()) {
    std::ostringstream msg;
    msg << "no positive pairs: no flow exceeds pos_threshold t = " << config.resolved_pos_threshold();
    throw ValidationError(msg.str());
  }
  TrainResult result;
  result.params = init_params(config, network.attributes.cols());
  auto tensors = result.params.tensors();
  std::vector<Matrix> m1, m2, grads;
  for (const Matrix* t : tensors) {
    m1.push_back(Matrix::Zero(t->rows(), t->cols()));
    m2.push_back(Matrix::Zero(t->rows(), t->cols()));
  }

  // Above this size the negative set is subsampled every epoch.
  constexpr std::size_t kFullBatchNodes = 5000;
  constexpr std::size_t kNegativesPerPositive = 50;
  const auto& all_neg = ctx.pairs().negatives;
  const bool subsample = network.size() > kFullBatchNodes &&
                         all_neg.size() > kNegativesPerPositive * ctx.pairs().positives.size();
  std::mt19937_64 neg_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<NodePair> sampled;

  double b1t = 1.0, b2t = 1.0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const std::vector<NodePair>* negatives = nullptr;
    if (subsample) {
      std::uniform_int_distribution<std::size_t> pick(0, all_neg.size() - 1);
      sampled.resize(kNegativesPerPositive * ctx.pairs().positives.size());
      for (auto& q : sampled) q = all_neg[pick(neg_rng)];
      negatives = &sampled;
    }
    double loss = 0.0;
    try {
      loss = ctx.loss_and_grad(result.params, &grads, negatives);
    } catch (const NumericalError&) {
      loss = std::numeric_limits<double>::quiet_NaN();
    }
    if (!std::isfinite(loss)) {
      std::ostringstream msg;
      msg << "non-finite loss at epoch " << epoch;
      if (!result.loss_history.empty()) msg << " (last finite loss " << result.loss_history.back() << ")";
      throw NumericalError(msg.str());
    }
    result.loss_history.push_back(loss);
    b1t *= config.adam_beta1;
    b2t *= config.adam_beta2;
    for (std::size_t k = 0; k < tensors.size(); ++k) {
      m1[k] = config.adam_beta1 * m1[k] + (1.0 - config.adam_beta1) * grads[k];
      m2[k] = config.adam_beta2 * m2[k] + (1.0 - config.adam_beta2) * grads[k].cwiseProduct(grads[k]);
      Matrix m_hat = m1[k] / (1.0 - b1t);
      Matrix v_hat = m2[k] / (1.0 - b2t);
      *tensors[k] -= config.learning_rate * m_hat.cwiseQuotient((v_hat.array().sqrt() + config.adam_eps).matrix());
    }
  }
  result.embeddings = ctx.embed(result.params);
  if (!result.embeddings.allFinite()) throw NumericalError("training produced non-finite embeddings");
  result.final_loss = ctx.loss_and_grad(result.params, nullptr);
  return result;
}

double gradient_check(const SpatialNetwork& network, const ModelConfig& config, double h) {
  if (!(h > 0.0)) throw ValidationError("gradient_check: perturbation must be positive");
  if (network.size() > 15) throw ValidationError("gradient_check: network must have at most 15 nodes");
  ModelContext ctx(network, config);
  if (ctx.pairs().positives.empty()) throw ValidationError("gradient_check: no positive pairs");
  ParamSet params = init_params(config, network.attributes.cols());
  std::vector<Matrix> grads;
  ctx.loss_and_grad(params, &grads);
  auto tensors = params.tensors();
  double worst = 0.0;
  for (std::size_t k = 0; k < tensors.size(); ++k) {
    Matrix& t = *tensors[k];
    for (Eigen::Index e = 0; e < t.size(); ++e) {
      const double saved = t.data()[e];
      t.data()[e] = saved + h;
      const double up = ctx.loss_and_grad(params, nullptr);
      t.data()[e] = saved - h;
      const double down = ctx.loss_and_grad(params, nullptr);
      t.data()[e] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double analytic = grads[k].data()[e];
      const double scale = std::max({std::abs(analytic), std::abs(numeric), kGradientCheckFloor});
      worst = std::max(worst, std::abs(analytic - numeric) / scale);
    }
  }
  return worst;
}

}  // namespace regionflow
