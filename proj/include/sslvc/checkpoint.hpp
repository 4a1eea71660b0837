// sslvc/checkpoint.hpp

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

#ifndef SSLVC_CHECKPOINT_HPP
#define SSLVC_CHECKPOINT_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sslvc/objective.hpp"

namespace sslvc {

// Weight blob layout (little-endian):
//
//   "VCKP" | version u32 | count u64 | count x entry
//   entry: name_len u32 | name bytes | tensor_len u64 | VCTF tensor bytes
//
// The JSON sidecar lives next to the blob at "<blob>.json".
using TensorMap = std::map<std::string, MatrixF>;

void write_weight_blob(const std::filesystem::path &path, const TensorMap &tensors);
TensorMap read_weight_blob(const std::filesystem::path &path);

// FNV-1a of the canonical (sorted-key, compact) JSON of the model config.
std::string config_hash(const ModelConfig &config);

struct CheckpointMeta {
  std::int64_t step = 0;
  ModelConfig model;
  std::string config_hash;
  nlohmann::json extra = nlohmann::json::object();
};

std::filesystem::path sidecar_path(const std::filesystem::path &blob);

void save_checkpoint(const std::filesystem::path &blob, const CheckpointMeta &meta, const TensorMap &tensors);

// Reads the sidecar and checks that config_hash matches its config. A
// mismatch means the sidecar was edited or belongs to another blob.
CheckpointMeta read_checkpoint_meta(const std::filesystem::path &blob);

// Highest-step "step_*.ckpt" in dir, or empty.
std::filesystem::path latest_checkpoint(const std::filesystem::path &dir);
std::filesystem::path checkpoint_name(const std::filesystem::path &dir, std::int64_t step);

template <typename Scalar>
void export_parameters(const ad::ParameterList<Scalar> &params, const std::string &prefix, TensorMap &out) {
  for (const auto *p : params) out[prefix + p->name] = p->value.template cast<float>();
}

template <typename Scalar>
void import_parameters(const ad::ParameterList<Scalar> &params, const std::string &prefix, const TensorMap &in) {
  for (auto *p : params) {
    auto it = in.find(prefix + p->name);
    if (it == in.end()) throw FormatError("checkpoint is missing tensor " + prefix + p->name);
    if (it->second.rows() != p->value.rows() || it->second.cols() != p->value.cols())
      throw FormatError("checkpoint tensor " + prefix + p->name + " has the wrong shape");
    p->value = it->second.template cast<Scalar>();
  }
}

// Generator only, for conversion. Verifies the config hash.
struct LoadedGenerator {
  CheckpointMeta meta;
  std::unique_ptr<Generator<float>> generator;
};

LoadedGenerator load_generator(const std::filesystem::path &blob);

}  // namespace sslvc

#endif  // SSLVC_CHECKPOINT_HPP
