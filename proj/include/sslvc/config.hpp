// sslvc/config.hpp

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

#ifndef SSLVC_CONFIG_HPP
#define SSLVC_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "sslvc/eval.hpp"
#include "sslvc/objective.hpp"
#include "sslvc/ssl_frontend.hpp"
#include "sslvc/training.hpp"

namespace sslvc {

// TOML subset: [table] and [dotted.table] headers, bare or dotted keys,
// basic and literal strings, integers, floats, booleans and (possibly
// multi-line) arrays. Errors are ConfigError with the line number.
nlohmann::json parse_toml(std::string_view text, const std::string &source = "<config>");
nlohmann::json read_toml(const std::filesystem::path &path);

// Applies "dotted.key=value"; the value is read as a TOML value, falling
// back to a bare string.
void apply_override(nlohmann::json &config, const std::string &assignment);

// Throws ConfigError naming the first key of `given` that `known` lacks.
// Objects are compared recursively; arrays are leaves.
void reject_unknown_keys(const nlohmann::json &given, const nlohmann::json &known, const std::string &where = "");

struct PathsConfig {
  std::filesystem::path target_dir;
  std::filesystem::path external_dir;
  std::filesystem::path workdir = "work";
  std::filesystem::path parallel_dir;  // optional MCD ground truth, mirrors external_dir
};

struct DataConfig {
  std::string target_speaker = "target";
  double split_ratio = 0.9;
  std::vector<double> rates = {1.0};
  int workers = 2;
};

struct EvalConfig {
  SpeakerEmbedderSpec embedder;
  std::string vocoder = "griffin_lim";  // or "external_command"
  std::string vocoder_command;          // "{input_mel}" and "{output_wav}"
  int griffin_lim_iterations = 32;
  double tsne_perplexity = 30.0;
  int tsne_iterations = 1000;
  int max_utterances_per_speaker = 60;
  // Probe points: 0 summarizes whole utterances, n > 0 non-overlapping
  // windows of n embedding frames (more points from a small corpus).
  int summary_window_frames = 0;
  int workers = 2;
};

struct ProjectConfig {
  PathsConfig paths;
  DataConfig data;
  ExtractorSpec extractor;
  ModelConfig model;
  TrainingConfig training;
  EvalConfig eval;
  std::uint64_t seed = 0;

  // Everything, including cross-section consistency (feature dim).
  void validate() const;
};

nlohmann::json to_json(const ProjectConfig &c);

// Unknown keys, wrong value types and invalid values are ConfigErrors.
// Relative paths resolve against base_dir.
ProjectConfig project_config_from_json(const nlohmann::json &j, const std::filesystem::path &base_dir = {});

ProjectConfig load_project_config(const std::filesystem::path &path, const std::vector<std::string> &overrides = {});

}  // namespace sslvc

#endif  // SSLVC_CONFIG_HPP
