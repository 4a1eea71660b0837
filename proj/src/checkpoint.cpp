// sslvc/checkpoint.cpp

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

#include "sslvc/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <regex>

#include "sslvc/hash.hpp"
#include "sslvc/tensor_io.hpp"

namespace sslvc {

namespace fs = std::filesystem;

namespace {

constexpr char kBlobMagic[4] = {'V', 'C', 'K', 'P'};
constexpr std::uint32_t kBlobVersion = 1;

template <typename T>
void put(std::vector<std::uint8_t> &out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

template <typename T>
T get(std::span<const std::uint8_t> in, std::size_t &at) {
  if (at + sizeof(T) > in.size()) throw FormatError("weight blob is truncated");
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(static_cast<T>(in[at + i]) << (8 * i));
  at += sizeof(T);
  return v;
}

}  // namespace

void write_weight_blob(const fs::path &path, const TensorMap &tensors) {
  std::vector<std::uint8_t> out(kBlobMagic, kBlobMagic + 4);
  put<std::uint32_t>(out, kBlobVersion);
  put<std::uint64_t>(out, tensors.size());
  for (const auto &[name, value] : tensors) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out.insert(out.end(), name.begin(), name.end());
    auto bytes = encode_tensor(to_tensor(value));
    put<std::uint64_t>(out, bytes.size());
    out.insert(out.end(), bytes.begin(), bytes.end());
  }
  write_file_atomic(path, out);
}

TensorMap read_weight_blob(const fs::path &path) {
  const auto bytes = read_file_bytes(path);
  std::span<const std::uint8_t> in(bytes);
  if (in.size() < 4 || std::memcmp(in.data(), kBlobMagic, 4) != 0)
    throw FormatError(path.string() + ": not a weight blob");
  std::size_t at = 4;
  if (get<std::uint32_t>(in, at) != kBlobVersion) throw FormatError(path.string() + ": unsupported blob version");
  const auto count = get<std::uint64_t>(in, at);
  TensorMap out;
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto name_len = get<std::uint32_t>(in, at);
    if (at + name_len > in.size()) throw FormatError("weight blob is truncated");
    std::string name(reinterpret_cast<const char *>(in.data() + at), name_len);
    at += name_len;
    const auto len = get<std::uint64_t>(in, at);
    if (at + len > in.size()) throw FormatError("weight blob is truncated");
    auto tensor = decode_tensor(in.subspan(at, len));
    at += len;
    if (tensor.shape.size() == 2) {
      out[name] = to_matrix(tensor);
    } else {
      throw FormatError("weight blob tensor " + name + " is not 2-D");
    }
  }
  return out;
}

std::string config_hash(const ModelConfig &config) {
  nlohmann::json j = config;
  return fnv1a_hex(j.dump());
}

fs::path sidecar_path(const fs::path &blob) { return fs::path(blob.string() + ".json"); }

void save_checkpoint(const fs::path &blob, const CheckpointMeta &meta, const TensorMap &tensors) {
  if (blob.has_parent_path()) fs::create_directories(blob.parent_path());
  write_weight_blob(blob, tensors);
  nlohmann::json j = {{"step", meta.step},
                      {"generator", meta.model.generator},
                      {"mel_discriminator", meta.model.mel_discriminator},
                      {"embedding_discriminator", meta.model.embedding_discriminator},
                      {"config_hash", config_hash(meta.model)},
                      {"extra", meta.extra}};
  const std::string text = j.dump(2) + "\n";
  write_file_atomic(sidecar_path(blob), std::span(reinterpret_cast<const std::uint8_t *>(text.data()), text.size()));
}

CheckpointMeta read_checkpoint_meta(const fs::path &blob) {
  const auto side = sidecar_path(blob);
  if (!fs::exists(blob)) throw InputError("checkpoint not found: " + blob.string());
  if (!fs::exists(side)) throw FormatError("checkpoint sidecar not found: " + side.string());
  nlohmann::json j;
  try {
    std::ifstream in(side);
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception &e) {
    throw FormatError(side.string() + ": " + e.what());
  }
  CheckpointMeta meta;
  try {
    meta.step = j.at("step").get<std::int64_t>();
    meta.model = j.get<ModelConfig>();
    meta.config_hash = j.at("config_hash").get<std::string>();
    if (j.contains("extra")) meta.extra = j.at("extra");
  } catch (const nlohmann::json::exception &e) {
    throw FormatError(side.string() + ": " + e.what());
  }
  const auto actual = config_hash(meta.model);
  if (actual != meta.config_hash)
    throw FormatError(side.string() + ": config_hash " + meta.config_hash + " does not match the stored config (" +
                      actual + ")");
  return meta;
}

fs::path checkpoint_name(const fs::path &dir, std::int64_t step) {
  char name[40];
  std::snprintf(name, sizeof name, "step_%08lld.ckpt", static_cast<long long>(step));
  return dir / name;
}

fs::path latest_checkpoint(const fs::path &dir) {
  if (!fs::is_directory(dir)) return {};
  static const std::regex pattern(R"(step_(\d+)\.ckpt)");
  fs::path best;
  long long best_step = -1;
  for (const auto &entry : fs::directory_iterator(dir)) {
    std::smatch m;
    const std::string name = entry.path().filename().string();
    if (std::regex_match(name, m, pattern)) {
      const long long step = std::stoll(m[1]);
      if (step > best_step) {
        best_step = step;
        best = entry.path();
      }
    }
  }
  return best;
}

LoadedGenerator load_generator(const fs::path &blob) {
  LoadedGenerator out;
  out.meta = read_checkpoint_meta(blob);
  out.generator = std::make_unique<Generator<float>>(out.meta.model.generator, 0);
  import_parameters(out.generator->parameters(), "generator/", read_weight_blob(blob));
  return out;
}

}  // namespace sslvc
