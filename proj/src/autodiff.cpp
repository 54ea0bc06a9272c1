#include "regionflow/autodiff.hpp"

#include <cmath>
#include <stdexcept>

namespace regionflow::autodiff {

Var Tape::constant(Matrix value) { return record(std::move(value), false, nullptr); }

Var Tape::variable(Matrix value) { return record(std::move(value), true, nullptr); }

Var Tape::record(Matrix value, bool requires_grad, Backward backward) {
  nodes_.push_back({std::move(value), Matrix(), requires_grad, false, std::move(backward)});
  return Var{nodes_.size() - 1};
}

Matrix Tape::grad(Var v) const {
  const Node& n = nodes_[v.id];
  if (n.has_grad) return n.grad;
  return Matrix::Zero(n.value.rows(), n.value.cols());
}

void Tape::add_grad(Var v, const Matrix& g) {
  Node& n = nodes_[v.id];
  if (!n.requires_grad) return;
  if (!n.has_grad) {
    n.grad = g;
    n.has_grad = true;
  } else {
    n.grad += g;
  }
}

void Tape::backward(Var root) {
  if (value(root).size() != 1) throw std::logic_error("backward: root must be a scalar");
  add_grad(root, Matrix::Ones(1, 1));
  for (std::size_t id = root.id + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (!n.has_grad || !n.backward) continue;
    Matrix g = n.grad;
    n.backward(*this, g);
  }
}

Var matmul(Tape& tape, Var a, Var b) {
  Matrix out = tape.value(a) * tape.value(b);
  bool rg = tape.requires_grad(a) || tape.requires_grad(b);
  return tape.record(std::move(out), rg, [a, b](Tape& t, const Matrix& g) {
    if (t.requires_grad(a)) t.add_grad(a, g * t.value(b).transpose());
    if (t.requires_grad(b)) t.add_grad(b, t.value(a).transpose() * g);
  });
}

Var propagate(Tape& tape, const SparseMatrix& p, Var x) {
  Matrix out = p * tape.value(x);
  return tape.record(std::move(out), tape.requires_grad(x), [&p, x](Tape& t, const Matrix& g) {
    t.add_grad(x, p.transpose() * g);
  });
}

Var add(Tape& tape, Var a, Var b) {
  Matrix out = tape.value(a) + tape.value(b);
  bool rg = tape.requires_grad(a) || tape.requires_grad(b);
  return tape.record(std::move(out), rg, [a, b](Tape& t, const Matrix& g) {
    t.add_grad(a, g);
    t.add_grad(b, g);
  });
}

Var scale(Tape& tape, Var a, double factor) {
  Matrix out = tape.value(a) * factor;
  return tape.record(std::move(out), tape.requires_grad(a),
                     [a, factor](Tape& t, const Matrix& g) { t.add_grad(a, g * factor); });
}

Var hadamard(Tape& tape, Var a, const Matrix& weights) {
  Matrix out = tape.value(a).cwiseProduct(weights);
  return tape.record(std::move(out), tape.requires_grad(a), [a, weights](Tape& t, const Matrix& g) {
    t.add_grad(a, g.cwiseProduct(weights));
  });
}

Var relu(Tape& tape, Var a) {
  Matrix out = tape.value(a).cwiseMax(0.0);
  return tape.record(std::move(out), tape.requires_grad(a), [a](Tape& t, const Matrix& g) {
    const Matrix& x = t.value(a);
    t.add_grad(a, (x.array() > 0.0).select(g, 0.0));
  });
}

Var elu(Tape& tape, Var a, double alpha) {
  Matrix out = tape.value(a).unaryExpr([alpha](double x) { return x > 0.0 ? x : alpha * std::expm1(x); });
  return tape.record(std::move(out), tape.requires_grad(a), [a, alpha](Tape& t, const Matrix& g) {
    Matrix d = t.value(a).unaryExpr([alpha](double x) { return x > 0.0 ? 1.0 : alpha * std::exp(x); });
    t.add_grad(a, g.cwiseProduct(d));
  });
}

Var leaky_relu(Tape& tape, Var a, double slope) {
  Matrix out = tape.value(a).unaryExpr([slope](double x) { return x > 0.0 ? x : slope * x; });
  return tape.record(std::move(out), tape.requires_grad(a), [a, slope](Tape& t, const Matrix& g) {
    const Matrix& x = t.value(a);
    t.add_grad(a, (x.array() > 0.0).select(g, slope * g));
  });
}

Var slice_rows(Tape& tape, Var a, Eigen::Index start, Eigen::Index count) {
  Matrix out = tape.value(a).middleRows(start, count);
  return tape.record(std::move(out), tape.requires_grad(a), [a, start, count](Tape& t, const Matrix& g) {
    Matrix full = Matrix::Zero(t.value(a).rows(), t.value(a).cols());
    full.middleRows(start, count) = g;
    t.add_grad(a, full);
  });
}

Var concat_cols(Tape& tape, const std::vector<Var>& parts) {
  if (parts.size() == 1) return parts[0];
  Eigen::Index rows = tape.value(parts[0]).rows(), cols = 0;
  bool rg = false;
  for (Var p : parts) cols += tape.value(p).cols(), rg = rg || tape.requires_grad(p);
  Matrix out(rows, cols);
  Eigen::Index c = 0;
  for (Var p : parts) {
    out.middleCols(c, tape.value(p).cols()) = tape.value(p);
    c += tape.value(p).cols();
  }
  return tape.record(std::move(out), rg, [parts](Tape& t, const Matrix& g) {
    Eigen::Index c = 0;
    for (Var p : parts) {
      Eigen::Index w = t.value(p).cols();
      t.add_grad(p, g.middleCols(c, w));
      c += w;
    }
  });
}

Var mean(Tape& tape, const std::vector<Var>& parts) {
  if (parts.size() == 1) return parts[0];
  Matrix out = tape.value(parts[0]);
  bool rg = tape.requires_grad(parts[0]);
  for (std::size_t i = 1; i < parts.size(); ++i) out += tape.value(parts[i]), rg = rg || tape.requires_grad(parts[i]);
  const double inv = 1.0 / static_cast<double>(parts.size());
  out *= inv;
  return tape.record(std::move(out), rg, [parts, inv](Tape& t, const Matrix& g) {
    for (Var p : parts) t.add_grad(p, g * inv);
  });
}

Var edge_scores(Tape& tape, Var left, Var right, const EdgeList& edges) {
  const Matrix& l = tape.value(left);
  const Matrix& r = tape.value(right);
  Matrix out(static_cast<Eigen::Index>(edges.edges()), 1);
  for (std::size_t i = 0; i < edges.nodes(); ++i)
    for (int k = edges.ptr[i]; k < edges.ptr[i + 1]; ++k) out(k, 0) = l(static_cast<Eigen::Index>(i), 0) + r(edges.cols[k], 0);
  bool rg = tape.requires_grad(left) || tape.requires_grad(right);
  return tape.record(std::move(out), rg, [left, right, &edges](Tape& t, const Matrix& g) {
    Matrix gl = Matrix::Zero(t.value(left).rows(), 1);
    Matrix gr = Matrix::Zero(t.value(right).rows(), 1);
    for (std::size_t i = 0; i < edges.nodes(); ++i)
      for (int k = edges.ptr[i]; k < edges.ptr[i + 1]; ++k) {
        gl(static_cast<Eigen::Index>(i), 0) += g(k, 0);
        gr(edges.cols[k], 0) += g(k, 0);
      }
    t.add_grad(left, gl);
    t.add_grad(right, gr);
  });
}

Var segment_softmax(Tape& tape, Var scores, const EdgeList& edges) {
  const Matrix& e = tape.value(scores);
  Matrix out(e.rows(), 1);
  for (std::size_t i = 0; i < edges.nodes(); ++i) {
    int lo = edges.ptr[i], hi = edges.ptr[i + 1];
    if (lo == hi) continue;
    double mx = e(lo, 0);
    for (int k = lo + 1; k < hi; ++k) mx = std::max(mx, e(k, 0));
    double sum = 0.0;
    for (int k = lo; k < hi; ++k) sum += (out(k, 0) = std::exp(e(k, 0) - mx));
    for (int k = lo; k < hi; ++k) out(k, 0) /= sum;
  }
  Matrix alpha = out;
  return tape.record(std::move(out), tape.requires_grad(scores),
                     [scores, alpha = std::move(alpha), &edges](Tape& t, const Matrix& g) {
                       Matrix ge(alpha.rows(), 1);
                       for (std::size_t i = 0; i < edges.nodes(); ++i) {
                         int lo = edges.ptr[i], hi = edges.ptr[i + 1];
                         double dot = 0.0;
                         for (int k = lo; k < hi; ++k) dot += alpha(k, 0) * g(k, 0);
                         for (int k = lo; k < hi; ++k) ge(k, 0) = alpha(k, 0) * (g(k, 0) - dot);
                       }
                       t.add_grad(scores, ge);
                     });
}

Var edge_aggregate(Tape& tape, Var coef, Var h, const EdgeList& edges) {
  const Matrix& c = tape.value(coef);
  const Matrix& hv = tape.value(h);
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(edges.nodes()), hv.cols());
  for (std::size_t i = 0; i < edges.nodes(); ++i)
    for (int k = edges.ptr[i]; k < edges.ptr[i + 1]; ++k)
      out.row(static_cast<Eigen::Index>(i)) += c(k, 0) * hv.row(edges.cols[k]);
  bool rg = tape.requires_grad(coef) || tape.requires_grad(h);
  return tape.record(std::move(out), rg, [coef, h, &edges](Tape& t, const Matrix& g) {
    const Matrix& c = t.value(coef);
    const Matrix& hv = t.value(h);
    Matrix gc(c.rows(), 1);
    Matrix gh = Matrix::Zero(hv.rows(), hv.cols());
    for (std::size_t i = 0; i < edges.nodes(); ++i)
      for (int k = edges.ptr[i]; k < edges.ptr[i + 1]; ++k) {
        gc(k, 0) = g.row(static_cast<Eigen::Index>(i)).dot(hv.row(edges.cols[k]));
        gh.row(edges.cols[k]) += c(k, 0) * g.row(static_cast<Eigen::Index>(i));
      }
    t.add_grad(coef, gc);
    t.add_grad(h, gh);
  });
}

}  // namespace regionflow::autodiff
