#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "regionflow/autodiff.hpp"
#include "regionflow/network.hpp"

namespace regionflow {

enum class ModelKind { gcn, gat, weighted_gat };

ModelKind parse_model(const std::string& name);
std::string to_string(ModelKind kind);

struct ModelConfig {
  ModelKind model = ModelKind::gcn;
  int layers = 2;
  int hidden_dim = 64;
  int output_dim = 32;
  int heads = 1;
  int epochs = 300;
  double learning_rate = 0.01;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  int hop_epsilon = 2;
  // Unset means the per-model default: 0 (gcn), 5 (gat), 200 (weighted-gat).
  std::optional<double> pos_threshold;
  double weight_threshold = 100.0;
  std::uint64_t seed = 0;

  double resolved_pos_threshold() const;
  // Throws ValidationError for out-of-range fields.
  void validate() const;
};

// Learnable tensors per layer. GCN layers hold one weight matrix and no
// attention vectors; GAT layers hold one weight matrix and one (2*out) x 1
// attention vector per head.
struct ParamSet {
  struct Layer {
    std::vector<Matrix> weights;
    std::vector<Matrix> attention;
  };
  std::vector<Layer> layers;

  std::vector<Matrix*> tensors();
  std::vector<const Matrix*> tensors() const;
  std::size_t scalar_count() const;
};

// Glorot-uniform initialisation shaped for `input_dim` attributes.
ParamSet init_params(const ModelConfig& config, Eigen::Index input_dim);

struct PositivePair {
  int i = 0;
  int j = 0;
  double weight = 0.0;  // log(s_ij)
};

struct NodePair {
  int i = 0;
  int j = 0;
};

struct PairSets {
  std::vector<PositivePair> positives;
  std::vector<NodePair> negatives;
};

// Unordered off-diagonal pairs: s_ij > t are positive with weight log(s_ij),
// s_ij == 0 are negative, anything in between is neither.
PairSets build_pairs(const Matrix& flows, double threshold);

// Neighbourhood mask of A + S_{p_t}: entry (i, j) is 1 when a_ij = 1 or
// s_ij > t, for i != j.
Matrix build_gat_input(const Matrix& adjacency, const Matrix& flows, double threshold);

// Flow weights in [0, 1]: log(1 + s) / log(1 + s_max) for s > t', zero
// otherwise, except adjacency neighbours which keep the floor
// min(1, 1 / log(1 + s_max)). Throws ValidationError when no flow survives.
Matrix normalize_flow_weights(const Matrix& flows, const Matrix& adjacency, double weight_threshold);

// Symmetrically normalised D^-1/2 (A + I) D^-1/2.
autodiff::SparseMatrix gcn_propagation(const Matrix& adjacency);

// CSR neighbourhoods of a mask, self-loop included for every node.
autodiff::EdgeList mask_edges(const Matrix& mask);

Matrix gcn_forward(const SpatialNetwork& network, const ParamSet& params);

// Attention coefficients per layer and head, in mask_edges order.
using AttentionTrace = std::vector<std::vector<std::vector<double>>>;

// Plain GAT when flow_weights is empty, weighted GAT otherwise (the self-loop
// always carries weight 1).
Matrix gat_forward(const SpatialNetwork& network, const ParamSet& params, const Matrix& mask,
                   const std::optional<Matrix>& flow_weights, AttentionTrace* attention = nullptr);

inline constexpr double kLossGuard = 1e-8;

struct LossTerms {
  PairSets pairs;
  std::vector<NodePair> far_pairs;  // epsilon < hop < unreachable
  std::vector<double> far_coef;     // 1 / log(hop)
  double delta = kLossGuard;
};

LossTerms make_loss_terms(PairSets pairs, const HopMatrix& hops, int hop_epsilon, double delta = kLossGuard);

double compute_loss(const Matrix& embeddings, const LossTerms& terms);
double compute_loss(const Matrix& embeddings, const PairSets& pairs, const HopMatrix& hops, int hop_epsilon,
                    double delta = kLossGuard);

// Loss as a tape op on the embedding matrix.
autodiff::Var loss_op(autodiff::Tape& tape, autodiff::Var embeddings, const LossTerms& terms);

// Everything a model needs that does not change between epochs.
class ModelContext {
 public:
  ModelContext(const SpatialNetwork& network, const ModelConfig& config);

  const ModelConfig& config() const { return config_; }
  const PairSets& pairs() const { return pairs_; }
  const HopMatrix& hops() const { return hops_; }

  autodiff::Var forward(autodiff::Tape& tape, const std::vector<autodiff::Var>& params,
                        const ParamSet& shapes, AttentionTrace* attention = nullptr) const;
  Matrix embed(const ParamSet& params) const;

  // Loss and gradient (same layout as params.tensors()) at params. A
  // non-empty negative override replaces the full negative set.
  double loss_and_grad(const ParamSet& params, std::vector<Matrix>* grads,
                       const std::vector<NodePair>* negatives = nullptr) const;

 private:
  ModelConfig config_;
  Matrix attributes_;
  autodiff::SparseMatrix propagation_;
  autodiff::EdgeList edges_;
  std::vector<double> edge_weights_;  // empty unless weighted GAT
  PairSets pairs_;
  HopMatrix hops_;
  LossTerms terms_;
};

struct TrainResult {
  Matrix embeddings;
  std::vector<double> loss_history;
  ParamSet params;
  double final_loss = 0.0;
};

// Full-batch Adam on the region loss. Deterministic for fixed
// (seed, config, network).
TrainResult train(const SpatialNetwork& network, const ModelConfig& config);

// Max over all parameters of |analytic - central difference| relative to
// max(|analytic|, |numeric|, floor).
inline constexpr double kGradientCheckFloor = 1e-6;
double gradient_check(const SpatialNetwork& network, const ModelConfig& config, double h);

}  // namespace regionflow
