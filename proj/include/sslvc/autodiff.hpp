// sslvc/autodiff.hpp

// Copyright 2026  sslvc authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SSLVC_AUTODIFF_HPP
#define SSLVC_AUTODIFF_HPP

// Reverse-mode differentiation over dense time-major matrices.
//
// A Tape records every operation of one forward pass. Each node owns its
// value and, once backward() runs, its gradient. Parameters enter the tape
// by reference; flush_param_grads() adds the tape's gradients into
// Parameter::grad. Nodes that do not depend on any differentiable leaf are
// skipped during the backward sweep.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "sslvc/errors.hpp"
#include "sslvc/types.hpp"

namespace sslvc::ad {

template <typename Scalar>
struct Parameter {
  std::string name;
  Matrix<Scalar> value;
  Matrix<Scalar> grad;

  Parameter() = default;
  Parameter(std::string n, Matrix<Scalar> v)
      : name(std::move(n)), value(std::move(v)), grad(Matrix<Scalar>::Zero(value.rows(), value.cols())) {}

  void zero_grad() { grad.setZero(); }
  Eigen::Index size() const { return value.size(); }
};

template <typename Scalar>
using ParameterList = std::vector<Parameter<Scalar> *>;

template <typename Scalar>
class Tape;

template <typename Scalar>
struct Var {
  Tape<Scalar> *tape = nullptr;
  int id = -1;

  const Matrix<Scalar> &value() const { return tape->value(*this); }
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  Scalar scalar() const { return value()(0, 0); }
};

template <typename Scalar>
class Tape {
 public:
  using Mat = Matrix<Scalar>;
  using Backward = std::function<void(Tape &, int)>;

  Tape() = default;
  Tape(const Tape &) = delete;
  Tape &operator=(const Tape &) = delete;

  Var<Scalar> constant(Mat value) { return push(std::move(value), false, {}); }

  // Differentiable leaf that owns its value (used for loss inputs in tests
  // and for routing externally computed gradients).
  Var<Scalar> leaf(Mat value) { return push(std::move(value), true, {}); }

  // Leaf that reads the parameter in place. Repeated calls return the same
  // node. Frozen parameters enter as constants.
  Var<Scalar> param(Parameter<Scalar> &p) {
    if (auto it = param_nodes_.find(&p); it != param_nodes_.end()) return {this, it->second};
    const bool trainable = !frozen_.count(&p);
    Node node;
    node.ref = &p.value;
    node.needs_grad = trainable;
    node.param = trainable ? &p : nullptr;
    nodes_.push_back(std::move(node));
    const int id = static_cast<int>(nodes_.size()) - 1;
    param_nodes_.emplace(&p, id);
    return {this, id};
  }

  void freeze(const ParameterList<Scalar> &params) {
    for (auto *p : params) frozen_.insert(p);
  }

  Var<Scalar> push(Mat value, bool needs_grad, Backward backward) {
    Node node;
    node.own = std::move(value);
    node.needs_grad = needs_grad;
    node.backward = std::move(backward);
    nodes_.push_back(std::move(node));
    return {this, static_cast<int>(nodes_.size()) - 1};
  }

  bool needs_grad(Var<Scalar> v) const { return nodes_[static_cast<std::size_t>(v.id)].needs_grad; }
  bool needs_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].needs_grad; }

  const Mat &value(Var<Scalar> v) const { return value(v.id); }
  const Mat &value(int id) const {
    const Node &n = nodes_[static_cast<std::size_t>(id)];
    return n.ref ? *n.ref : n.own;
  }

  // Gradient of the last backward sweep (zeros if the node received none).
  Mat grad(Var<Scalar> v) const {
    const Node &n = nodes_[static_cast<std::size_t>(v.id)];
    if (n.grad.size() == 0) return Mat::Zero(value(v).rows(), value(v).cols());
    return n.grad;
  }

  // Backward helpers for op implementations.
  const Mat &grad_of(int id) const { return nodes_[static_cast<std::size_t>(id)].grad; }
  template <typename Expr>
  void accumulate(int id, const Expr &g) {
    Node &n = nodes_[static_cast<std::size_t>(id)];
    if (!n.needs_grad) return;
    if (n.grad.size() == 0) {
      n.grad = g;
    } else {
      n.grad += g;
    }
  }
  Mat &grad_buffer(int id) {
    Node &n = nodes_[static_cast<std::size_t>(id)];
    if (n.grad.size() == 0) {
      const Mat &v = value(id);
      n.grad = Mat::Zero(v.rows(), v.cols());
    }
    return n.grad;
  }

  // Seeds d(root)/d(root) = 1 for a 1x1 root and sweeps backward.
  void backward(Var<Scalar> root) {
    if (root.rows() != 1 || root.cols() != 1)
      throw ShapeError("backward: root must be a 1x1 scalar");
    backward({{root, Mat::Constant(1, 1, Scalar(1))}});
  }

  // Seeds arbitrary output gradients and sweeps backward once.
  void backward(const std::vector<std::pair<Var<Scalar>, Mat>> &seeds) {
    for (auto &n : nodes_) n.grad.resize(0, 0);
    int last = -1;
    for (const auto &[v, g] : seeds) {
      if (g.rows() != value(v).rows() || g.cols() != value(v).cols())
        throw ShapeError("backward: seed gradient shape mismatch");
      if (!needs_grad(v)) continue;
      accumulate(v.id, g);
      last = std::max(last, v.id);
    }
    for (int i = last; i >= 0; --i) {
      Node &n = nodes_[static_cast<std::size_t>(i)];
      if (!n.needs_grad || n.grad.size() == 0 || !n.backward) continue;
      n.backward(*this, i);
    }
  }

  // Adds the gradients of every trainable parameter leaf into Parameter::grad.
  void flush_param_grads() {
    for (auto &n : nodes_)
      if (n.param && n.grad.size() != 0) n.param->grad += n.grad;
  }

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Mat own;
    const Mat *ref = nullptr;
    Mat grad;
    bool needs_grad = false;
    Backward backward;
    Parameter<Scalar> *param = nullptr;
  };

  std::vector<Node> nodes_;
  std::unordered_map<const Parameter<Scalar> *, int> param_nodes_;
  std::unordered_set<const Parameter<Scalar> *> frozen_;
};

namespace detail {

template <typename Scalar>
Tape<Scalar> &same_tape(Var<Scalar> a, Var<Scalar> b) {
  if (a.tape != b.tape) throw ShapeError("operands recorded on different tapes");
  return *a.tape;
}

template <typename Scalar>
void require_same_shape(Var<Scalar> a, Var<Scalar> b, const char *op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeError(std::string(op) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                     std::to_string(b.cols()));
}

}  // namespace detail

template <typename Scalar>
Var<Scalar> operator+(Var<Scalar> a, Var<Scalar> b) {
  auto &t = detail::same_tape(a, b);
  detail::require_same_shape(a, b, "add");
  const int ia = a.id, ib = b.id;
  return t.push(a.value() + b.value(), t.needs_grad(a) || t.needs_grad(b), [ia, ib](Tape<Scalar> &t, int self) {
    t.accumulate(ia, t.grad_of(self));
    t.accumulate(ib, t.grad_of(self));
  });
}

template <typename Scalar>
Var<Scalar> operator-(Var<Scalar> a, Var<Scalar> b) {
  auto &t = detail::same_tape(a, b);
  detail::require_same_shape(a, b, "sub");
  const int ia = a.id, ib = b.id;
  return t.push(a.value() - b.value(), t.needs_grad(a) || t.needs_grad(b), [ia, ib](Tape<Scalar> &t, int self) {
    t.accumulate(ia, t.grad_of(self));
    t.accumulate(ib, -t.grad_of(self));
  });
}

// y = scale * a + shift, elementwise.
template <typename Scalar>
Var<Scalar> affine(Var<Scalar> a, Scalar scale, Scalar shift) {
  auto &t = *a.tape;
  const int ia = a.id;
  Matrix<Scalar> y = (scale * a.value().array() + shift).matrix();
  // A zero scale contributes exactly nothing, so the branch is pruned.
  return t.push(std::move(y), t.needs_grad(a) && scale != Scalar(0), [ia, scale](Tape<Scalar> &t, int self) {
    t.accumulate(ia, scale * t.grad_of(self));
  });
}

template <typename Scalar>
Var<Scalar> operator*(Scalar s, Var<Scalar> a) {
  return affine(a, s, Scalar(0));
}

template <typename Scalar>
Var<Scalar> hadamard(Var<Scalar> a, Var<Scalar> b) {
  auto &t = detail::same_tape(a, b);
  detail::require_same_shape(a, b, "hadamard");
  const int ia = a.id, ib = b.id;
  return t.push(a.value().cwiseProduct(b.value()), t.needs_grad(a) || t.needs_grad(b),
                [ia, ib](Tape<Scalar> &t, int self) {
                  const auto &g = t.grad_of(self);
                  if (t.needs_grad(ia)) t.accumulate(ia, g.cwiseProduct(t.value(ib)));
                  if (t.needs_grad(ib)) t.accumulate(ib, g.cwiseProduct(t.value(ia)));
                });
}

// Elementwise product with a constant matrix (dropout masks).
template <typename Scalar>
Var<Scalar> mul_const(Var<Scalar> a, Matrix<Scalar> mask) {
  auto &t = *a.tape;
  if (mask.rows() != a.rows() || mask.cols() != a.cols()) throw ShapeError("mul_const: shape mismatch");
  const int ia = a.id;
  Matrix<Scalar> y = a.value().cwiseProduct(mask);
  return t.push(std::move(y), t.needs_grad(a), [ia, mask = std::move(mask)](Tape<Scalar> &t, int self) {
    t.accumulate(ia, t.grad_of(self).cwiseProduct(mask));
  });
}

template <typename Scalar>
Var<Scalar> add_const(Var<Scalar> a, const Matrix<Scalar> &c) {
  if (c.rows() != a.rows() || c.cols() != a.cols()) throw ShapeError("add_const: shape mismatch");
  auto &t = *a.tape;
  const int ia = a.id;
  return t.push(a.value() + c, t.needs_grad(a), [ia](Tape<Scalar> &t, int self) {
    t.accumulate(ia, t.grad_of(self));
  });
}

// a [T x C] + row [1 x C], broadcast over rows.
template <typename Scalar>
Var<Scalar> add_row(Var<Scalar> a, Var<Scalar> row) {
  auto &t = detail::same_tape(a, row);
  if (row.rows() != 1 || row.cols() != a.cols()) throw ShapeError("add_row: bias shape mismatch");
  const int ia = a.id, ib = row.id;
  Matrix<Scalar> y = a.value().rowwise() + row.value().row(0);
  return t.push(std::move(y), t.needs_grad(a) || t.needs_grad(row), [ia, ib](Tape<Scalar> &t, int self) {
    t.accumulate(ia, t.grad_of(self));
    if (t.needs_grad(ib)) t.accumulate(ib, t.grad_of(self).colwise().sum());
  });
}

template <typename Scalar>
Var<Scalar> matmul(Var<Scalar> a, Var<Scalar> b) {
  auto &t = detail::same_tape(a, b);
  if (a.cols() != b.rows())
    throw ShapeError("matmul: inner dimensions " + std::to_string(a.cols()) + " and " +
                     std::to_string(b.rows()) + " differ");
  const int ia = a.id, ib = b.id;
  Matrix<Scalar> y = a.value() * b.value();
  return t.push(std::move(y), t.needs_grad(a) || t.needs_grad(b), [ia, ib](Tape<Scalar> &t, int self) {
    const auto &g = t.grad_of(self);
    if (t.needs_grad(ia)) t.grad_buffer(ia).noalias() += g * t.value(ib).transpose();
    if (t.needs_grad(ib)) t.grad_buffer(ib).noalias() += t.value(ia).transpose() * g;
  });
}

// a * b^T
template <typename Scalar>
Var<Scalar> matmul_bt(Var<Scalar> a, Var<Scalar> b) {
  auto &t = detail::same_tape(a, b);
  if (a.cols() != b.cols()) throw ShapeError("matmul_bt: column counts differ");
  const int ia = a.id, ib = b.id;
  Matrix<Scalar> y = a.value() * b.value().transpose();
  return t.push(std::move(y), t.needs_grad(a) || t.needs_grad(b), [ia, ib](Tape<Scalar> &t, int self) {
    const auto &g = t.grad_of(self);
    if (t.needs_grad(ia)) t.grad_buffer(ia).noalias() += g * t.value(ib);
    if (t.needs_grad(ib)) t.grad_buffer(ib).noalias() += g.transpose() * t.value(ia);
  });
}

template <typename Scalar>
Var<Scalar> relu(Var<Scalar> a) {
  return leaky_relu(a, Scalar(0));
}

template <typename Scalar>
Var<Scalar> leaky_relu(Var<Scalar> a, Scalar slope) {
  auto &t = *a.tape;
  const int ia = a.id;
  Matrix<Scalar> y = a.value().unaryExpr([slope](Scalar v) { return v > 0 ? v : slope * v; });
  return t.push(std::move(y), t.needs_grad(a), [ia, slope](Tape<Scalar> &t, int self) {
    const auto &x = t.value(ia);
    Matrix<Scalar> d = x.unaryExpr([slope](Scalar v) { return v > 0 ? Scalar(1) : slope; });
    t.accumulate(ia, t.grad_of(self).cwiseProduct(d));
  });
}

// Logistic sigmoid kept strictly inside (0, 1): outputs are clamped to
// [eps, 1 - eps]. The derivative is taken from the logit as
// exp(-|x|) / (1 + exp(-|x|))^2, which stays nonzero where the clamped
// value has already rounded to a bound; a saturated discriminator can
// still recover.
template <typename Scalar>
Var<Scalar> sigmoid(Var<Scalar> a) {
  auto &t = *a.tape;
  const int ia = a.id;
  const Scalar eps = std::numeric_limits<Scalar>::epsilon();
  Matrix<Scalar> y = a.value().unaryExpr([eps](Scalar v) {
    const Scalar s = v >= 0 ? Scalar(1) / (Scalar(1) + std::exp(-v)) : std::exp(v) / (Scalar(1) + std::exp(v));
    return std::clamp(s, eps, Scalar(1) - eps);
  });
  return t.push(std::move(y), t.needs_grad(a), [ia](Tape<Scalar> &t, int self) {
    Matrix<Scalar> d = t.value(ia).unaryExpr([](Scalar v) {
      const Scalar e = std::exp(-std::abs(v));
      return e / ((Scalar(1) + e) * (Scalar(1) + e));
    });
    t.accumulate(ia, t.grad_of(self).cwiseProduct(d));
  });
}

template <typename Scalar>
Var<Scalar> abs(Var<Scalar> a) {
  auto &t = *a.tape;
  const int ia = a.id;
  return t.push(a.value().cwiseAbs(), t.needs_grad(a), [ia](Tape<Scalar> &t, int self) {
    Matrix<Scalar> sign = t.value(ia).unaryExpr([](Scalar v) {
      return v > 0 ? Scalar(1) : (v < 0 ? Scalar(-1) : Scalar(0));
    });
    t.accumulate(ia, t.grad_of(self).cwiseProduct(sign));
  });
}

template <typename Scalar>
Var<Scalar> square(Var<Scalar> a) {
  auto &t = *a.tape;
  const int ia = a.id;
  return t.push(a.value().cwiseAbs2(), t.needs_grad(a), [ia](Tape<Scalar> &t, int self) {
    t.accumulate(ia, Scalar(2) * t.grad_of(self).cwiseProduct(t.value(ia)));
  });
}

// -log(a), elementwise. Inputs must be positive.
template <typename Scalar>
Var<Scalar> neg_log(Var<Scalar> a) {
  auto &t = *a.tape;
  const int ia = a.id;
  if ((a.value().array() <= Scalar(0)).any()) throw DomainError("neg_log: non-positive input");
  return t.push(-a.value().array().log().matrix(), t.needs_grad(a), [ia](Tape<Scalar> &t, int self) {
    t.accumulate(ia, -t.grad_of(self).cwiseQuotient(t.value(ia)));
  });
}

template <typename Scalar>
Var<Scalar> softmax_rows(Var<Scalar> a) {
  auto &t = *a.tape;
  const int ia = a.id;
  Matrix<Scalar> y = a.value();
  for (Eigen::Index r = 0; r < y.rows(); ++r) {
    y.row(r).array() -= y.row(r).maxCoeff();
    y.row(r) = y.row(r).array().exp();
    y.row(r) /= y.row(r).sum();
  }
  return t.push(std::move(y), t.needs_grad(a), [ia](Tape<Scalar> &t, int self) {
    const auto &s = t.value(self);
    const auto &g = t.grad_of(self);
    Vector<Scalar> dot = g.cwiseProduct(s).rowwise().sum();
    Matrix<Scalar> d = s.cwiseProduct(g - dot.replicate(1, g.cols()));
    t.accumulate(ia, d);
  });
}

// Per-row normalization across channels with learned gain and bias.
template <typename Scalar>
Var<Scalar> layer_norm(Var<Scalar> x, Var<Scalar> gamma, Var<Scalar> beta, Scalar eps) {
  auto &t = *x.tape;
  const auto &xv = x.value();
  const Eigen::Index c = xv.cols();
  if (gamma.rows() != 1 || gamma.cols() != c || beta.rows() != 1 || beta.cols() != c)
    throw ShapeError("layer_norm: gain/bias shape mismatch");
  Vector<Scalar> mean = xv.rowwise().mean();
  Matrix<Scalar> centered = xv.colwise() - mean;
  Vector<Scalar> inv_std =
      (centered.cwiseAbs2().rowwise().mean().array() + eps).rsqrt().matrix();
  Matrix<Scalar> xhat = inv_std.asDiagonal() * centered;
  Matrix<Scalar> y = (xhat.array().rowwise() * gamma.value().row(0).array()).matrix();
  y.rowwise() += beta.value().row(0);
  const int ix = x.id, ig = gamma.id, ib = beta.id;
  const bool needs = t.needs_grad(x) || t.needs_grad(gamma) || t.needs_grad(beta);
  return t.push(std::move(y), needs,
                [ix, ig, ib, xhat = std::move(xhat), inv_std = std::move(inv_std)](Tape<Scalar> &t, int self) {
                  const auto &g = t.grad_of(self);
                  if (t.needs_grad(ib)) t.accumulate(ib, g.colwise().sum());
                  if (t.needs_grad(ig)) t.accumulate(ig, g.cwiseProduct(xhat).colwise().sum());
                  if (t.needs_grad(ix)) {
                    Matrix<Scalar> dxhat = (g.array().rowwise() * t.value(ig).row(0).array()).matrix();
                    Vector<Scalar> m1 = dxhat.rowwise().mean();
                    Vector<Scalar> m2 = dxhat.cwiseProduct(xhat).rowwise().mean();
                    Matrix<Scalar> dx = dxhat;
                    dx.colwise() -= m1;
                    dx -= m2.asDiagonal() * xhat;
                    t.accumulate(ix, inv_std.asDiagonal() * dx);
                  }
                });
}

// Per-channel normalization over time (columns over rows), no affine.
template <typename Scalar>
Var<Scalar> instance_norm(Var<Scalar> x, Scalar eps) {
  auto &t = *x.tape;
  const auto &xv = x.value();
  RowVector<Scalar> mean = xv.colwise().mean();
  Matrix<Scalar> centered = xv.rowwise() - mean;
  RowVector<Scalar> inv_std =
      (centered.cwiseAbs2().colwise().mean().array() + eps).rsqrt().matrix();
  Matrix<Scalar> xhat = centered * inv_std.asDiagonal();
  Matrix<Scalar> y = xhat;
  const int ix = x.id;
  return t.push(std::move(y), t.needs_grad(x),
                [ix, xhat = std::move(xhat), inv_std = std::move(inv_std)](Tape<Scalar> &t, int self) {
                  const auto &g = t.grad_of(self);
                  RowVector<Scalar> m1 = g.colwise().mean();
                  RowVector<Scalar> m2 = g.cwiseProduct(xhat).colwise().mean();
                  Matrix<Scalar> dx = g.rowwise() - m1;
                  dx -= xhat * m2.asDiagonal();
                  t.accumulate(ix, dx * inv_std.asDiagonal());
                });
}

template <typename Scalar>
Var<Scalar> slice_cols(Var<Scalar> a, Eigen::Index start, Eigen::Index count) {
  auto &t = *a.tape;
  if (start < 0 || count < 0 || start + count > a.cols()) throw ShapeError("slice_cols: out of range");
  const int ia = a.id;
  return t.push(a.value().middleCols(start, count), t.needs_grad(a), [ia, start, count](Tape<Scalar> &t, int self) {
    t.grad_buffer(ia).middleCols(start, count) += t.grad_of(self);
  });
}

template <typename Scalar>
Var<Scalar> slice_rows(Var<Scalar> a, Eigen::Index start, Eigen::Index count) {
  auto &t = *a.tape;
  if (start < 0 || count < 0 || start + count > a.rows()) throw ShapeError("slice_rows: out of range");
  const int ia = a.id;
  return t.push(a.value().middleRows(start, count), t.needs_grad(a), [ia, start, count](Tape<Scalar> &t, int self) {
    t.grad_buffer(ia).middleRows(start, count) += t.grad_of(self);
  });
}

template <typename Scalar>
Var<Scalar> concat_cols(const std::vector<Var<Scalar>> &parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  auto &t = *parts[0].tape;
  const Eigen::Index rows = parts[0].rows();
  Eigen::Index cols = 0;
  bool needs = false;
  for (const auto &p : parts) {
    if (p.rows() != rows) throw ShapeError("concat_cols: row counts differ");
    cols += p.cols();
    needs = needs || t.needs_grad(p);
  }
  Matrix<Scalar> y(rows, cols);
  std::vector<std::pair<int, Eigen::Index>> layout;
  Eigen::Index at = 0;
  for (const auto &p : parts) {
    y.middleCols(at, p.cols()) = p.value();
    layout.emplace_back(p.id, at);
    at += p.cols();
  }
  return t.push(std::move(y), needs, [layout](Tape<Scalar> &t, int self) {
    const auto &g = t.grad_of(self);
    for (const auto &[id, offset] : layout)
      if (t.needs_grad(id)) t.accumulate(id, g.middleCols(offset, t.value(id).cols()));
  });
}

namespace detail {

inline Eigen::Index conv_output_length(Eigen::Index length, int kernel, int stride, int pad) {
  const Eigen::Index span = length + 2 * pad - kernel;
  return span < 0 ? 0 : span / stride + 1;
}

}  // namespace detail

// Unfolds x [T x C] into [T_out x kernel*C]; row t holds input rows
// t*stride - pad ... t*stride - pad + kernel - 1 (zeros outside).
template <typename Scalar>
Var<Scalar> im2col(Var<Scalar> x, int kernel, int stride, int pad) {
  auto &t = *x.tape;
  const auto &xv = x.value();
  const Eigen::Index len = xv.rows(), c = xv.cols();
  const Eigen::Index out_len = detail::conv_output_length(len, kernel, stride, pad);
  if (out_len < 1) throw ShapeError("im2col: input shorter than the kernel");
  Matrix<Scalar> y = Matrix<Scalar>::Zero(out_len, kernel * c);
  for (Eigen::Index r = 0; r < out_len; ++r)
    for (int k = 0; k < kernel; ++k) {
      const Eigen::Index src = r * stride + k - pad;
      if (src >= 0 && src < len) y.row(r).segment(k * c, c) = xv.row(src);
    }
  const int ix = x.id;
  return t.push(std::move(y), t.needs_grad(x), [ix, kernel, stride, pad](Tape<Scalar> &t, int self) {
    const auto &g = t.grad_of(self);
    auto &dx = t.grad_buffer(ix);
    const Eigen::Index len = dx.rows(), c = dx.cols();
    for (Eigen::Index r = 0; r < g.rows(); ++r)
      for (int k = 0; k < kernel; ++k) {
        const Eigen::Index dst = r * stride + k - pad;
        if (dst >= 0 && dst < len) dx.row(dst) += g.row(r).segment(k * c, c);
      }
  });
}

// Adjoint of im2col: overlap-adds row segments of cols [T x kernel*C] into
// an [out_len x C] matrix. Used by the transposed convolution.
template <typename Scalar>
Var<Scalar> col2im(Var<Scalar> cols, int kernel, int stride, int pad, Eigen::Index out_len) {
  auto &t = *cols.tape;
  const auto &cv = cols.value();
  if (cv.cols() % kernel != 0) throw ShapeError("col2im: column count not divisible by kernel");
  const Eigen::Index c = cv.cols() / kernel;
  Matrix<Scalar> y = Matrix<Scalar>::Zero(out_len, c);
  for (Eigen::Index r = 0; r < cv.rows(); ++r)
    for (int k = 0; k < kernel; ++k) {
      const Eigen::Index dst = r * stride + k - pad;
      if (dst >= 0 && dst < out_len) y.row(dst) += cv.row(r).segment(k * c, c);
    }
  const int ic = cols.id;
  return t.push(std::move(y), t.needs_grad(cols), [ic, kernel, stride, pad, c](Tape<Scalar> &t, int self) {
    const auto &g = t.grad_of(self);
    auto &dc = t.grad_buffer(ic);
    for (Eigen::Index r = 0; r < dc.rows(); ++r)
      for (int k = 0; k < kernel; ++k) {
        const Eigen::Index src = r * stride + k - pad;
        if (src >= 0 && src < g.rows()) dc.row(r).segment(k * c, c) += g.row(src);
      }
  });
}

// Temporal mean pooling: [T x C] -> [1 x C].
template <typename Scalar>
Var<Scalar> mean_rows(Var<Scalar> a) {
  auto &t = *a.tape;
  const int ia = a.id;
  const Eigen::Index rows = a.rows();
  return t.push(a.value().colwise().mean(), t.needs_grad(a), [ia, rows](Tape<Scalar> &t, int self) {
    t.accumulate(ia, (t.grad_of(self) / static_cast<Scalar>(rows)).replicate(rows, 1));
  });
}

// Mean of every element: -> [1 x 1].
template <typename Scalar>
Var<Scalar> mean(Var<Scalar> a) {
  auto &t = *a.tape;
  const int ia = a.id;
  Matrix<Scalar> y = Matrix<Scalar>::Constant(1, 1, a.value().mean());
  const auto n = static_cast<Scalar>(a.value().size());
  return t.push(std::move(y), t.needs_grad(a), [ia, n](Tape<Scalar> &t, int self) {
    const auto &v = t.value(ia);
    t.accumulate(ia, Matrix<Scalar>::Constant(v.rows(), v.cols(), t.grad_of(self)(0, 0) / n));
  });
}

// Mean of a list of 1x1 values.
template <typename Scalar>
Var<Scalar> mean_of(const std::vector<Var<Scalar>> &items) {
  if (items.empty()) throw ShapeError("mean_of: empty batch");
  auto &t = *items[0].tape;
  Scalar sum = 0;
  bool needs = false;
  std::vector<int> ids;
  for (const auto &v : items) {
    if (v.rows() != 1 || v.cols() != 1) throw ShapeError("mean_of: items must be 1x1");
    sum += v.scalar();
    needs = needs || t.needs_grad(v);
    ids.push_back(v.id);
  }
  const auto n = static_cast<Scalar>(items.size());
  return t.push(Matrix<Scalar>::Constant(1, 1, sum / n), needs, [ids, n](Tape<Scalar> &t, int self) {
    const Scalar g = t.grad_of(self)(0, 0) / n;
    for (int id : ids) t.accumulate(id, Matrix<Scalar>::Constant(1, 1, g));
  });
}

template <typename Scalar>
Var<Scalar> scalar_constant(Tape<Scalar> &t, Scalar v) {
  return t.constant(Matrix<Scalar>::Constant(1, 1, v));
}

}  // namespace sslvc::ad

#endif  // SSLVC_AUTODIFF_HPP
