// sslvc/layers.hpp

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

#ifndef SSLVC_LAYERS_HPP
#define SSLVC_LAYERS_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "sslvc/autodiff.hpp"

namespace sslvc {

// Per-call forward settings. Dropout is active only in training mode and
// draws its masks from *rng.
template <typename Scalar>
struct ForwardContext {
  bool training = false;
  Scalar dropout = 0;
  std::mt19937_64 *rng = nullptr;
};

template <typename Scalar>
ad::Var<Scalar> dropout(ad::Var<Scalar> x, const ForwardContext<Scalar> &ctx) {
  if (!ctx.training || ctx.dropout <= 0 || ctx.rng == nullptr) return x;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Scalar keep = Scalar(1) - ctx.dropout;
  Matrix<Scalar> mask(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < mask.size(); ++i)
    mask.data()[i] = u(*ctx.rng) < keep ? Scalar(1) / keep : Scalar(0);
  return ad::mul_const(x, std::move(mask));
}

// Glorot-uniform fill over the matrix's two dimensions.
template <typename Scalar>
Matrix<Scalar> glorot(Eigen::Index rows, Eigen::Index cols, std::mt19937_64 &rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> u(-a, a);
  Matrix<Scalar> m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<Scalar>(u(rng));
  return m;
}

// Sinusoidal position table [length x dim].
template <typename Scalar>
Matrix<Scalar> positional_encoding(Eigen::Index length, Eigen::Index dim) {
  Matrix<Scalar> pe(length, dim);
  for (Eigen::Index t = 0; t < length; ++t)
    for (Eigen::Index i = 0; i < dim; ++i) {
      const double rate = std::pow(10000.0, -static_cast<double>(2 * (i / 2)) / static_cast<double>(dim));
      const double angle = static_cast<double>(t) * rate;
      pe(t, i) = static_cast<Scalar>(i % 2 == 0 ? std::sin(angle) : std::cos(angle));
    }
  return pe;
}

// y = x W + b; W is [in x out].
template <typename Scalar>
class Linear {
 public:
  Linear() = default;
  Linear(const std::string &name, int in, int out, std::mt19937_64 &rng)
      : weight(name + ".weight", glorot<Scalar>(in, out, rng)),
        bias(name + ".bias", Matrix<Scalar>::Zero(1, out)) {}

  ad::Var<Scalar> forward(ad::Tape<Scalar> &t, ad::Var<Scalar> x) {
    if (x.cols() != weight.value.rows())
      throw ShapeError(weight.name + ": expected " + std::to_string(weight.value.rows()) +
                       " input channels, got " + std::to_string(x.cols()));
    return ad::add_row(ad::matmul(x, t.param(weight)), t.param(bias));
  }

  void collect(ad::ParameterList<Scalar> &out) {
    out.push_back(&weight);
    out.push_back(&bias);
  }

  static long long parameter_count(long long in, long long out) { return in * out + out; }

  ad::Parameter<Scalar> weight, bias;
};

// Convolution over time with channels as columns. W is [kernel*in x out],
// rows ordered tap-major to match im2col.
template <typename Scalar>
class Conv1d {
 public:
  Conv1d() = default;
  Conv1d(const std::string &name, int in, int out, int kernel, int stride, int pad, std::mt19937_64 &rng)
      : weight(name + ".weight", glorot<Scalar>(static_cast<Eigen::Index>(kernel) * in, out, rng)),
        bias(name + ".bias", Matrix<Scalar>::Zero(1, out)),
        in_(in), kernel_(kernel), stride_(stride), pad_(pad) {}

  ad::Var<Scalar> forward(ad::Tape<Scalar> &t, ad::Var<Scalar> x) {
    if (x.cols() != in_)
      throw ShapeError(weight.name + ": expected " + std::to_string(in_) + " input channels, got " +
                       std::to_string(x.cols()));
    auto cols = kernel_ == 1 && stride_ == 1 && pad_ == 0 ? x : ad::im2col(x, kernel_, stride_, pad_);
    return ad::add_row(ad::matmul(cols, t.param(weight)), t.param(bias));
  }

  void collect(ad::ParameterList<Scalar> &out) {
    out.push_back(&weight);
    out.push_back(&bias);
  }

  static long long parameter_count(long long in, long long out, long long kernel) {
    return kernel * in * out + out;
  }

  ad::Parameter<Scalar> weight, bias;

 private:
  int in_ = 0, kernel_ = 1, stride_ = 1, pad_ = 0;
};

// Transposed convolution with kernel 2*factor and stride factor. The full
// output of length factor*(T+1) is cropped to factor*T, dropping factor/2
// leading rows.
template <typename Scalar>
class Upsampler {
 public:
  Upsampler() = default;
  Upsampler(const std::string &name, int channels, int factor, std::mt19937_64 &rng)
      : weight(name + ".weight", glorot<Scalar>(channels, static_cast<Eigen::Index>(2 * factor) * channels, rng)),
        bias(name + ".bias", Matrix<Scalar>::Zero(1, channels)), channels_(channels), factor_(factor) {}

  ad::Var<Scalar> forward(ad::Tape<Scalar> &t, ad::Var<Scalar> x) {
    if (x.cols() != channels_)
      throw ShapeError(weight.name + ": expected " + std::to_string(channels_) + " channels, got " +
                       std::to_string(x.cols()));
    auto cols = ad::matmul(x, t.param(weight));
    auto y = ad::col2im(cols, 2 * factor_, factor_, factor_ / 2, x.rows() * factor_);
    return ad::add_row(y, t.param(bias));
  }

  void collect(ad::ParameterList<Scalar> &out) {
    out.push_back(&weight);
    out.push_back(&bias);
  }

  static long long parameter_count(long long channels, long long factor) {
    return channels * 2 * factor * channels + channels;
  }

  ad::Parameter<Scalar> weight, bias;

 private:
  int channels_ = 0, factor_ = 1;
};

template <typename Scalar>
class LayerNorm {
 public:
  LayerNorm() = default;
  LayerNorm(const std::string &name, int dim)
      : gamma(name + ".gamma", Matrix<Scalar>::Ones(1, dim)), beta(name + ".beta", Matrix<Scalar>::Zero(1, dim)) {}

  ad::Var<Scalar> forward(ad::Tape<Scalar> &t, ad::Var<Scalar> x) {
    return ad::layer_norm(x, t.param(gamma), t.param(beta), Scalar(1e-5));
  }

  void collect(ad::ParameterList<Scalar> &out) {
    out.push_back(&gamma);
    out.push_back(&beta);
  }

  static long long parameter_count(long long dim) { return 2 * dim; }

  ad::Parameter<Scalar> gamma, beta;
};

// Full (unmasked) multi-head self-attention.
template <typename Scalar>
class MultiHeadAttention {
 public:
  MultiHeadAttention() = default;
  MultiHeadAttention(const std::string &name, int dim, int heads, std::mt19937_64 &rng)
      : query(name + ".query", dim, dim, rng), key(name + ".key", dim, dim, rng),
        value(name + ".value", dim, dim, rng), output(name + ".output", dim, dim, rng),
        dim_(dim), heads_(heads) {}

  ad::Var<Scalar> forward(ad::Tape<Scalar> &t, ad::Var<Scalar> x) {
    auto q = query.forward(t, x);
    auto k = key.forward(t, x);
    auto v = value.forward(t, x);
    const int dh = dim_ / heads_;
    const Scalar scale = Scalar(1) / std::sqrt(static_cast<Scalar>(dh));
    std::vector<ad::Var<Scalar>> heads;
    for (int h = 0; h < heads_; ++h) {
      auto qh = ad::slice_cols(q, h * dh, dh);
      auto kh = ad::slice_cols(k, h * dh, dh);
      auto vh = ad::slice_cols(v, h * dh, dh);
      auto weights = ad::softmax_rows(scale * ad::matmul_bt(qh, kh));
      heads.push_back(ad::matmul(weights, vh));
    }
    auto merged = heads_ == 1 ? heads[0] : ad::concat_cols(heads);
    return output.forward(t, merged);
  }

  void collect(ad::ParameterList<Scalar> &out) {
    query.collect(out);
    key.collect(out);
    value.collect(out);
    output.collect(out);
  }

  static long long parameter_count(long long dim) { return 4 * Linear<Scalar>::parameter_count(dim, dim); }

  Linear<Scalar> query, key, value, output;

 private:
  int dim_ = 0, heads_ = 1;
};

// Feed-forward transformer block:
//   x = LN(x + Dropout(MHA(x)))
//   x = LN(x + Dropout(Conv_1(ReLU(Conv_k(x)))))
template <typename Scalar>
class FFTBlock {
 public:
  FFTBlock() = default;
  FFTBlock(const std::string &name, int dim, int heads, int kernel, int ffn_dim, std::mt19937_64 &rng)
      : attention(name + ".attention", dim, heads, rng), norm1(name + ".norm1", dim),
        conv1(name + ".conv1", dim, ffn_dim, kernel, 1, kernel / 2, rng),
        conv2(name + ".conv2", ffn_dim, dim, 1, 1, 0, rng), norm2(name + ".norm2", dim) {}

  ad::Var<Scalar> forward(ad::Tape<Scalar> &t, ad::Var<Scalar> x, const ForwardContext<Scalar> &ctx) {
    auto a = dropout(attention.forward(t, x), ctx);
    x = norm1.forward(t, x + a);
    auto f = conv2.forward(t, ad::relu(conv1.forward(t, x)));
    f = dropout(f, ctx);
    return norm2.forward(t, x + f);
  }

  void collect(ad::ParameterList<Scalar> &out) {
    attention.collect(out);
    norm1.collect(out);
    conv1.collect(out);
    conv2.collect(out);
    norm2.collect(out);
  }

  static long long parameter_count(long long dim, long long kernel, long long ffn_dim) {
    return MultiHeadAttention<Scalar>::parameter_count(dim) + 2 * LayerNorm<Scalar>::parameter_count(dim) +
           Conv1d<Scalar>::parameter_count(dim, ffn_dim, kernel) + Conv1d<Scalar>::parameter_count(ffn_dim, dim, 1);
  }

  MultiHeadAttention<Scalar> attention;
  LayerNorm<Scalar> norm1;
  Conv1d<Scalar> conv1, conv2;
  LayerNorm<Scalar> norm2;
};

}  // namespace sslvc

#endif  // SSLVC_LAYERS_HPP
