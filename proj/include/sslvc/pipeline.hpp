// sslvc/pipeline.hpp

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

#ifndef SSLVC_PIPELINE_HPP
#define SSLVC_PIPELINE_HPP

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sslvc/config.hpp"
#include "sslvc/eval.hpp"
#include "sslvc/plot.hpp"
#include "sslvc/ssl_frontend.hpp"
#include "sslvc/synth.hpp"
#include "sslvc/training.hpp"

namespace sslvc {

// Batch commands behind the sslvc tool. Each takes a validated
// ProjectConfig and works under paths.workdir:
//   manifest_train.jsonl, manifest_val.jsonl, features/, checkpoints/,
//   train_log.jsonl

std::filesystem::path train_manifest_path(const ProjectConfig &c);
std::filesystem::path validation_manifest_path(const ProjectConfig &c);
std::filesystem::path checkpoint_dir(const ProjectConfig &c);

struct PrepareSummary {
  std::size_t train_records = 0;
  std::size_t validation_records = 0;
  std::size_t target_feature_files = 0;  // distinct cached files for target records
  PrepareStats stats;
  std::vector<std::string> warnings;
};

void to_json(nlohmann::json &j, const PrepareSummary &s);

// Scans both corpora, splits, expands speaking rates and extracts. All
// unreadable audio is reported in one InputError.
PrepareSummary cmd_prepare(const ProjectConfig &c);

struct TrainOptions {
  bool resume = false;  // continue from the latest checkpoint
  std::function<void(std::int64_t, const LossReport &)> on_step;
};

RunResult cmd_train(const ProjectConfig &c, const TrainOptions &options = {});

struct Conversion {
  std::filesystem::path source;
  std::filesystem::path converted;  // wav
  std::filesystem::path mel;        // vctf
};

void to_json(nlohmann::json &j, const Conversion &c);
void from_json(const nlohmann::json &j, Conversion &c);

// One output per input, named after the input stem, plus
// output_dir/conversions.jsonl. An empty input list writes nothing.
std::vector<Conversion> cmd_convert(const ProjectConfig &c, const std::filesystem::path &checkpoint,
                                    const std::vector<std::filesystem::path> &inputs,
                                    const std::filesystem::path &output_dir);

// Pairs from converted_dir/conversions.jsonl. Parallel references come
// from paths.parallel_dir when set. Target references are the validation
// target utterances (train when there are none).
EvalReport cmd_evaluate(const ProjectConfig &c, const std::filesystem::path &converted_dir);

struct ProbePanel {
  std::string title;
  std::filesystem::path checkpoint;
  ProbeResult probe;
  TsneProbeResult tsne;
  std::vector<int> speakers;
};

struct VisualizeResult {
  std::vector<std::string> speaker_names;
  std::vector<ProbePanel> panels;
};

void to_json(nlohmann::json &j, const VisualizeResult &r);

// Content-embedding probe over every prepared utterance (capped per
// speaker), one panel per checkpoint in the order without, with. Writes
// <output>.png, <output>.vctf ([n x 4]: panel, x, y, speaker) and
// <output>.json.
VisualizeResult cmd_visualize(const ProjectConfig &c, const std::optional<std::filesystem::path> &without_lsim,
                              const std::optional<std::filesystem::path> &with_lsim,
                              const std::filesystem::path &output);

// Probe points for one generator: correlation summaries per utterance or
// per window (eval.summary_window_frames).
ProbeSet embedding_probe_set(Generator<float> &generator, const std::vector<Utterance> &utterances,
                             const std::vector<int> &speakers, const std::vector<int> &groups, int window_frames);

// Fixture corpus plus a config.toml sized for a quick end-to-end run.
void cmd_fixture(const std::filesystem::path &root, const FixtureSpec &spec = {});

std::string fixture_config_toml();

}  // namespace sslvc

#endif  // SSLVC_PIPELINE_HPP
