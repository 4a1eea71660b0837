// sslvc/manifest.hpp

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

#ifndef SSLVC_MANIFEST_HPP
#define SSLVC_MANIFEST_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace sslvc {

enum class CorpusTag { kTarget, kExternal };

inline constexpr double kMinRate = 0.8;
inline constexpr double kMaxRate = 1.2;

struct UtteranceRecord {
  std::string id;
  std::string speaker;
  std::filesystem::path audio_path;
  std::optional<std::filesystem::path> feature_path;
  std::optional<std::filesystem::path> mel_path;
  std::optional<std::filesystem::path> prosody_path;
  CorpusTag corpus_tag = CorpusTag::kTarget;
  double rate = 1.0;  // speaking-rate factor applied before extraction
};

void to_json(nlohmann::json &j, const UtteranceRecord &r);
void from_json(const nlohmann::json &j, UtteranceRecord &r);

// Throws ConfigError if the record breaks the corpus/speaker or rate rules.
void validate_record(const UtteranceRecord &r, const std::string &target_speaker);

// One JSON object per line.
void write_manifest(const std::filesystem::path &path,
                    const std::vector<UtteranceRecord> &records);
std::vector<UtteranceRecord> read_manifest(const std::filesystem::path &path);

struct ManifestSplit {
  std::vector<UtteranceRecord> train;
  std::vector<UtteranceRecord> validation;
  std::vector<std::string> warnings;
};

// Target records are sorted by id, shuffled with `seed` and split so that
// round(split_ratio * n) land in train. External records always go to
// train: they never serve as reconstruction targets.
ManifestSplit split_records(std::vector<UtteranceRecord> target,
                            std::vector<UtteranceRecord> external,
                            double split_ratio, std::uint64_t seed);

// Scans both directories for *.wav. External speakers are named by their
// first sub-directory below `external_dir` ("external" when flat).
ManifestSplit build_manifest(const std::filesystem::path &target_dir,
                             const std::filesystem::path &external_dir,
                             double split_ratio, std::uint64_t seed,
                             const std::string &target_speaker);

// Expands every record into one copy per rate. A copy keeps its source's
// split side because expansion runs after splitting. Rate 1.0 keeps the
// original id; other rates append "@r<rate>".
std::vector<UtteranceRecord> augment_rates(const std::vector<UtteranceRecord> &records,
                                           const std::vector<double> &rates);

// File-system safe form of an utterance id.
std::string sanitize_id(const std::string &id);

}  // namespace sslvc

#endif  // SSLVC_MANIFEST_HPP
