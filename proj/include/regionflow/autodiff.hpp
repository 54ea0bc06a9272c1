#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace regionflow::autodiff {

using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// Handle to a value recorded on a Tape.
struct Var {
  std::size_t id = 0;
};

// Reverse-mode tape over dense matrices. Nodes are appended in evaluation
// order, so replaying them backwards is a valid topological order.
class Tape {
 public:
  using Backward = std::function<void(Tape&, const Matrix& out_grad)>;

  Var constant(Matrix value);
  Var variable(Matrix value);

  // Adds an op result; `backward` receives d(root)/d(result) and must
  // accumulate into its inputs with add_grad.
  Var record(Matrix value, bool requires_grad, Backward backward);

  const Matrix& value(Var v) const { return nodes_[v.id].value; }
  bool requires_grad(Var v) const { return nodes_[v.id].requires_grad; }
  // Zero matrix of the value's shape if nothing flowed into v.
  Matrix grad(Var v) const;
  void add_grad(Var v, const Matrix& g);

  // Seeds d(root)/d(root) = 1 for a 1x1 root and runs every backward closure.
  void backward(Var root);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    bool has_grad = false;
    Backward backward;
  };
  std::vector<Node> nodes_;
};

// Neighbourhood lists in CSR form: row i aggregates over cols[ptr[i]..ptr[i+1]).
struct EdgeList {
  std::vector<int> ptr{0};
  std::vector<int> cols;
  std::size_t nodes() const { return ptr.size() - 1; }
  std::size_t edges() const { return cols.size(); }
};

Var matmul(Tape& tape, Var a, Var b);
// P * x for a constant sparse P.
Var propagate(Tape& tape, const SparseMatrix& p, Var x);
Var add(Tape& tape, Var a, Var b);
Var scale(Tape& tape, Var a, double factor);
// Elementwise product with a constant of the same shape.
Var hadamard(Tape& tape, Var a, const Matrix& weights);
Var relu(Tape& tape, Var a);
Var elu(Tape& tape, Var a, double alpha = 1.0);
Var leaky_relu(Tape& tape, Var a, double slope);
Var slice_rows(Tape& tape, Var a, Eigen::Index start, Eigen::Index count);
Var concat_cols(Tape& tape, const std::vector<Var>& parts);
Var mean(Tape& tape, const std::vector<Var>& parts);

// e_k = left[i] + right[j] for the k-th edge (i, j). Inputs are n x 1,
// output is edges x 1.
Var edge_scores(Tape& tape, Var left, Var right, const EdgeList& edges);
// Softmax of an edges x 1 vector within each CSR row.
Var segment_softmax(Tape& tape, Var scores, const EdgeList& edges);
// out_i = sum_k coef_k * h_j over the edges (i, j) of row i.
Var edge_aggregate(Tape& tape, Var coef, Var h, const EdgeList& edges);

}  // namespace regionflow::autodiff
