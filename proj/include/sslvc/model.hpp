// sslvc/model.hpp

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

#ifndef SSLVC_MODEL_HPP
#define SSLVC_MODEL_HPP

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sslvc/layers.hpp"

namespace sslvc {

struct GeneratorConfig {
  int input_dim = 256;
  int hidden_dim = 256;
  int encoder_blocks = 4;
  int decoder_blocks = 4;
  int attention_heads = 2;
  int conv_kernel = 9;  // odd, so the block convolutions keep length
  int ffn_dim = 1024;   // inner width of the block feed-forward
  int upsample_factor = 2;
  int n_mels = 80;
  double dropout = 0.1;
  double in_epsilon = 1e-5;

  void validate() const;

  // Trainable scalar count:
  //   prenet      D*H + H
  //   each block  4*(H*H + H)            attention projections
  //             + 4*H                    two layer norms
  //             + k*H*F + F + F*H + H    feed-forward convolutions
  //   upsampler   H*(2f*H) + H
  //   projection  H*M + M
  // with (N_enc + N_dec) blocks, F = ffn_dim, f = upsample_factor, M = n_mels.
  long long parameter_count() const;
};

void to_json(nlohmann::json &j, const GeneratorConfig &c);
void from_json(const nlohmann::json &j, GeneratorConfig &c);

template <typename Scalar>
class Generator {
 public:
  using Var = ad::Var<Scalar>;
  using Tape = ad::Tape<Scalar>;

  struct Output {
    Var mel;        // [factor*T x n_mels]
    Var embedding;  // [T x H], instance-normalized
  };

  Generator(const GeneratorConfig &config, std::uint64_t seed) : config_(config) {
    config_.validate();
    std::mt19937_64 rng(seed);
    const int h = config_.hidden_dim;
    prenet_ = Linear<Scalar>("encoder.prenet", config_.input_dim, h, rng);
    for (int i = 0; i < config_.encoder_blocks; ++i)
      encoder_.emplace_back("encoder.block" + std::to_string(i), h, config_.attention_heads, config_.conv_kernel,
                            config_.ffn_dim, rng);
    upsampler_ = Upsampler<Scalar>("decoder.upsample", h, config_.upsample_factor, rng);
    for (int i = 0; i < config_.decoder_blocks; ++i)
      decoder_.emplace_back("decoder.block" + std::to_string(i), h, config_.attention_heads, config_.conv_kernel,
                            config_.ffn_dim, rng);
    projection_ = Linear<Scalar>("decoder.projection", h, config_.n_mels, rng);
  }

  Generator(const Generator &) = delete;
  Generator &operator=(const Generator &) = delete;

  const GeneratorConfig &config() const { return config_; }

  // Encoder stack output before instance normalization.
  Var encode_pre_norm(Tape &t, Var features, const ForwardContext<Scalar> &ctx) {
    if (features.cols() != config_.input_dim)
      throw ShapeError("encode: feature dim " + std::to_string(features.cols()) + " != input_dim " +
                       std::to_string(config_.input_dim));
    if (features.rows() < 1) throw ShapeError("encode: empty feature sequence");
    auto x = prenet_.forward(t, features);
    x = ad::add_const(x, positional_encoding<Scalar>(x.rows(), x.cols()));
    x = dropout(x, ctx);
    for (auto &block : encoder_) x = block.forward(t, x, ctx);
    return x;
  }

  Var normalize(Var pre_norm) const {
    return ad::instance_norm(pre_norm, static_cast<Scalar>(config_.in_epsilon));
  }

  Var encode(Tape &t, Var features, const ForwardContext<Scalar> &ctx) {
    return normalize(encode_pre_norm(t, features, ctx));
  }

  Var decode(Tape &t, Var embedding, const ForwardContext<Scalar> &ctx) {
    if (embedding.cols() != config_.hidden_dim)
      throw ShapeError("decode: embedding dim " + std::to_string(embedding.cols()) + " != hidden_dim " +
                       std::to_string(config_.hidden_dim));
    if (embedding.rows() < 1) throw ShapeError("decode: empty embedding");
    auto x = upsampler_.forward(t, embedding);
    x = ad::add_const(x, positional_encoding<Scalar>(x.rows(), x.cols()));
    x = dropout(x, ctx);
    for (auto &block : decoder_) x = block.forward(t, x, ctx);
    return projection_.forward(t, x);
  }

  Output forward(Tape &t, Var features, const ForwardContext<Scalar> &ctx) {
    auto e = encode(t, features, ctx);
    return {decode(t, e, ctx), e};
  }

  // Eval-mode helpers on plain matrices.
  Matrix<Scalar> encode(const Matrix<Scalar> &features) {
    Tape t;
    return encode(t, t.constant(features), {}).value();
  }
  Matrix<Scalar> decode(const Matrix<Scalar> &embedding) {
    Tape t;
    return decode(t, t.constant(embedding), {}).value();
  }
  Matrix<Scalar> convert(const Matrix<Scalar> &features) {
    Tape t;
    return forward(t, t.constant(features), {}).mel.value();
  }

  ad::ParameterList<Scalar> encoder_parameters() {
    ad::ParameterList<Scalar> out;
    prenet_.collect(out);
    for (auto &b : encoder_) b.collect(out);
    return out;
  }

  ad::ParameterList<Scalar> decoder_parameters() {
    ad::ParameterList<Scalar> out;
    upsampler_.collect(out);
    for (auto &b : decoder_) b.collect(out);
    projection_.collect(out);
    return out;
  }

  ad::ParameterList<Scalar> parameters() {
    auto out = encoder_parameters();
    auto dec = decoder_parameters();
    out.insert(out.end(), dec.begin(), dec.end());
    return out;
  }

  // Output bias of the mel projection (set from data statistics before
  // training from scratch).
  ad::Parameter<Scalar> &mel_bias() { return projection_.bias; }

 private:
  GeneratorConfig config_;
  Linear<Scalar> prenet_;
  std::vector<FFTBlock<Scalar>> encoder_;
  Upsampler<Scalar> upsampler_;
  std::vector<FFTBlock<Scalar>> decoder_;
  Linear<Scalar> projection_;
};

}  // namespace sslvc

#endif  // SSLVC_MODEL_HPP
