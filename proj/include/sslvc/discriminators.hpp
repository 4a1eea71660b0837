// sslvc/discriminators.hpp

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

#ifndef SSLVC_DISCRIMINATORS_HPP
#define SSLVC_DISCRIMINATORS_HPP

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sslvc/layers.hpp"

namespace sslvc {

// Conv stack over time -> temporal mean -> linear -> sigmoid.
struct DiscriminatorConfig {
  int input_dim = 80;
  std::vector<int> channels{128, 256, 512, 512};
  int kernel = 5;
  int stride = 2;
  double leaky_slope = 0.2;

  void validate() const;
  long long parameter_count() const;
};

using MelDiscriminatorConfig = DiscriminatorConfig;
using EmbeddingDiscriminatorConfig = DiscriminatorConfig;

MelDiscriminatorConfig default_mel_discriminator(int n_mels = 80);
EmbeddingDiscriminatorConfig default_embedding_discriminator(int hidden_dim = 256);

void to_json(nlohmann::json &j, const DiscriminatorConfig &c);
void from_json(const nlohmann::json &j, DiscriminatorConfig &c);

template <typename Scalar>
class Discriminator {
 public:
  using Var = ad::Var<Scalar>;

  Discriminator(const std::string &name, const DiscriminatorConfig &config, std::uint64_t seed)
      : config_(config) {
    config_.validate();
    std::mt19937_64 rng(seed);
    int in = config_.input_dim;
    for (std::size_t i = 0; i < config_.channels.size(); ++i) {
      convs_.emplace_back(name + ".conv" + std::to_string(i), in, config_.channels[i], config_.kernel,
                          config_.stride, config_.kernel / 2, rng);
      in = config_.channels[i];
    }
    head_ = Linear<Scalar>(name + ".head", in, 1, rng);
    // Near-zero head: untrained scores start close to 0.5 instead of
    // saturating on raw log-mel offsets.
    head_.weight.value *= Scalar(0.01);
  }

  Discriminator(const Discriminator &) = delete;
  Discriminator &operator=(const Discriminator &) = delete;

  const DiscriminatorConfig &config() const { return config_; }

  // x [T x input_dim] -> [1 x 1] probability.
  Var score(ad::Tape<Scalar> &t, Var x) {
    if (x.cols() != config_.input_dim)
      throw ShapeError("discriminator: expected " + std::to_string(config_.input_dim) + " channels, got " +
                       std::to_string(x.cols()));
    if (x.rows() < 1) throw ShapeError("discriminator: empty sequence");
    const auto slope = static_cast<Scalar>(config_.leaky_slope);
    for (auto &conv : convs_) x = ad::leaky_relu(conv.forward(t, x), slope);
    return ad::sigmoid(head_.forward(t, ad::mean_rows(x)));
  }

  Scalar score(const Matrix<Scalar> &x) {
    ad::Tape<Scalar> t;
    return score(t, t.constant(x)).scalar();
  }

  ad::ParameterList<Scalar> parameters() {
    ad::ParameterList<Scalar> out;
    for (auto &c : convs_) c.collect(out);
    head_.collect(out);
    return out;
  }

 private:
  DiscriminatorConfig config_;
  std::vector<Conv1d<Scalar>> convs_;
  Linear<Scalar> head_;
};

}  // namespace sslvc

#endif  // SSLVC_DISCRIMINATORS_HPP
