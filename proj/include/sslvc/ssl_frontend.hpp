// sslvc/ssl_frontend.hpp

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

#ifndef SSLVC_SSL_FRONTEND_HPP
#define SSLVC_SSL_FRONTEND_HPP

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sslvc/dsp.hpp"
#include "sslvc/errors.hpp"
#include "sslvc/manifest.hpp"
#include "sslvc/types.hpp"

namespace sslvc {

enum class ExtractorKind { kExternalCommand, kPrecomputed, kMock };

ExtractorKind parse_extractor_kind(const std::string &name);
std::string to_string(ExtractorKind kind);

struct ExtractorSpec {
  ExtractorKind kind = ExtractorKind::kMock;
  int dim = 256;
  double frame_rate_hz = 50.0;
  // external_command only. "{input_wav}" and "{output_tensor}" are
  // replaced by shell-quoted paths.
  std::string command_template;
  std::uint64_t mock_seed = 1234;

  void validate() const;
  // Stable description used in feature cache keys.
  std::string cache_key() const;
};

void to_json(nlohmann::json &j, const ExtractorSpec &s);
void from_json(const nlohmann::json &j, ExtractorSpec &s);

// Fixed Gaussian projection [n_mels x dim], entries N(0, 1/n_mels).
MatrixF mock_projection(int n_mels, int dim, std::uint64_t seed);

// Log-mel at 100 Hz, averaged over frame pairs to 50 Hz, projected to dim.
FeatureSequence mock_features(std::span<const float> audio, const ExtractorSpec &spec,
                              const MelConfig &mel = {});

// Audio for a record with its speaking-rate factor applied.
Waveform load_record_audio(const UtteranceRecord &record);

// Features for one record. Precomputed reads record.feature_path; the
// others work from the (rate-adjusted) audio. Shape mismatches and
// command failures raise ExtractionError.
FeatureSequence extract(const ExtractorSpec &spec, const UtteranceRecord &record, const MelConfig &mel = {});

// FNV-1a over the audio file bytes, the rate and the spec.
std::string feature_cache_key(const ExtractorSpec &spec, const UtteranceRecord &record);

struct PrepareOptions {
  std::filesystem::path output_dir;
  int workers = 2;
  MelConfig mel;
};

struct PrepareStats {
  std::size_t extracted = 0;
  std::size_t cache_hits = 0;
};

// Writes features (through output_dir/cache), mels and prosody for every
// record and returns the records with their paths filled in. Target
// records get mel and prosody; external records get features and prosody.
std::vector<UtteranceRecord> prepare_records(const std::vector<UtteranceRecord> &records, const ExtractorSpec &spec,
                                             const PrepareOptions &options, PrepareStats *stats = nullptr);

// Replaces "{name}" placeholders with single-quoted shell arguments.
std::string fill_command(const std::string &templ, const std::vector<std::pair<std::string, std::string>> &values);

// Runs a shell command, capturing combined output. Nonzero exit raises
// ExtractionError (or EvalError when for_eval is set) with the output tail.
void run_command(const std::string &command, bool for_eval = false);

}  // namespace sslvc

#endif  // SSLVC_SSL_FRONTEND_HPP
