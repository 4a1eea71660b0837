// sslvc/model.cpp

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

#include "sslvc/model.hpp"
#include "sslvc/discriminators.hpp"
#include "sslvc/objective.hpp"

namespace sslvc {

void GeneratorConfig::validate() const {
  auto positive = [](int v, const char *name) {
    if (v < 1) throw ConfigError(std::string("generator.") + name + " must be >= 1");
  };
  positive(input_dim, "input_dim");
  positive(hidden_dim, "hidden_dim");
  positive(attention_heads, "attention_heads");
  positive(conv_kernel, "conv_kernel");
  positive(ffn_dim, "ffn_dim");
  positive(upsample_factor, "upsample_factor");
  positive(n_mels, "n_mels");
  if (encoder_blocks < 0 || decoder_blocks < 0) throw ConfigError("generator block counts must be >= 0");
  if (hidden_dim % attention_heads != 0)
    throw ConfigError("generator.hidden_dim (" + std::to_string(hidden_dim) +
                      ") must be divisible by attention_heads (" + std::to_string(attention_heads) + ")");
  if (conv_kernel % 2 == 0) throw ConfigError("generator.conv_kernel must be odd");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("generator.dropout must be in [0, 1)");
  if (!(in_epsilon > 0.0)) throw ConfigError("generator.in_epsilon must be > 0");
}

long long GeneratorConfig::parameter_count() const {
  const long long d = input_dim, h = hidden_dim, k = conv_kernel, f = ffn_dim, m = n_mels,
                  u = upsample_factor;
  const long long block = 4 * (h * h + h) + 4 * h + (k * h * f + f) + (f * h + h);
  return (d * h + h) + (encoder_blocks + decoder_blocks) * block + (h * 2 * u * h + h) + (h * m + m);
}

void to_json(nlohmann::json &j, const GeneratorConfig &c) {
  j = {{"input_dim", c.input_dim},     {"hidden_dim", c.hidden_dim},
       {"encoder_blocks", c.encoder_blocks}, {"decoder_blocks", c.decoder_blocks},
       {"attention_heads", c.attention_heads}, {"conv_kernel", c.conv_kernel},
       {"ffn_dim", c.ffn_dim},         {"upsample_factor", c.upsample_factor},
       {"n_mels", c.n_mels},           {"dropout", c.dropout},
       {"in_epsilon", c.in_epsilon}};
}

void from_json(const nlohmann::json &j, GeneratorConfig &c) {
  GeneratorConfig d;
  c.input_dim = j.value("input_dim", d.input_dim);
  c.hidden_dim = j.value("hidden_dim", d.hidden_dim);
  c.encoder_blocks = j.value("encoder_blocks", d.encoder_blocks);
  c.decoder_blocks = j.value("decoder_blocks", d.decoder_blocks);
  c.attention_heads = j.value("attention_heads", d.attention_heads);
  c.conv_kernel = j.value("conv_kernel", d.conv_kernel);
  c.ffn_dim = j.value("ffn_dim", d.ffn_dim);
  c.upsample_factor = j.value("upsample_factor", d.upsample_factor);
  c.n_mels = j.value("n_mels", d.n_mels);
  c.dropout = j.value("dropout", d.dropout);
  c.in_epsilon = j.value("in_epsilon", d.in_epsilon);
}

void DiscriminatorConfig::validate() const {
  if (input_dim < 1) throw ConfigError("discriminator input_dim must be >= 1");
  if (channels.empty()) throw ConfigError("discriminator needs at least one conv layer");
  for (int c : channels)
    if (c < 1) throw ConfigError("discriminator conv widths must be >= 1");
  if (kernel < 1 || stride < 1) throw ConfigError("discriminator kernel and stride must be >= 1");
  if (!(leaky_slope >= 0.0 && leaky_slope < 1.0)) throw ConfigError("discriminator leaky_slope must be in [0, 1)");
}

long long DiscriminatorConfig::parameter_count() const {
  long long total = 0, in = input_dim;
  for (int c : channels) {
    total += kernel * in * c + c;
    in = c;
  }
  return total + in + 1;
}

MelDiscriminatorConfig default_mel_discriminator(int n_mels) {
  return {n_mels, {128, 256, 512, 512}, 5, 2, 0.2};
}

EmbeddingDiscriminatorConfig default_embedding_discriminator(int hidden_dim) {
  return {hidden_dim, {256, 256, 256}, 3, 1, 0.2};
}

void to_json(nlohmann::json &j, const DiscriminatorConfig &c) {
  j = {{"input_dim", c.input_dim}, {"channels", c.channels}, {"kernel", c.kernel},
       {"stride", c.stride},       {"leaky_slope", c.leaky_slope}};
}

void from_json(const nlohmann::json &j, DiscriminatorConfig &c) {
  c.input_dim = j.value("input_dim", c.input_dim);
  c.channels = j.value("channels", c.channels);
  c.kernel = j.value("kernel", c.kernel);
  c.stride = j.value("stride", c.stride);
  c.leaky_slope = j.value("leaky_slope", c.leaky_slope);
}

void ModelConfig::validate() const {
  generator.validate();
  mel_discriminator.validate();
  embedding_discriminator.validate();
  if (mel_discriminator.input_dim != generator.n_mels)
    throw ConfigError("mel discriminator input_dim must equal generator.n_mels");
  if (embedding_discriminator.input_dim != generator.hidden_dim)
    throw ConfigError("embedding discriminator input_dim must equal generator.hidden_dim");
}

void to_json(nlohmann::json &j, const ModelConfig &c) {
  j = {{"generator", c.generator},
       {"mel_discriminator", c.mel_discriminator},
       {"embedding_discriminator", c.embedding_discriminator}};
}

void from_json(const nlohmann::json &j, ModelConfig &c) {
  c.generator = j.at("generator").get<GeneratorConfig>();
  c.mel_discriminator = default_mel_discriminator(c.generator.n_mels);
  c.embedding_discriminator = default_embedding_discriminator(c.generator.hidden_dim);
  if (j.contains("mel_discriminator")) from_json(j.at("mel_discriminator"), c.mel_discriminator);
  if (j.contains("embedding_discriminator")) from_json(j.at("embedding_discriminator"), c.embedding_discriminator);
}

}  // namespace sslvc
