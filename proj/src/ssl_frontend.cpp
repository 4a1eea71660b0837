// sslvc/ssl_frontend.cpp

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

#include "sslvc/ssl_frontend.hpp"

#include <unistd.h>

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include "sslvc/errors.hpp"
#include "sslvc/hash.hpp"
#include "sslvc/loader.hpp"
#include "sslvc/tensor_io.hpp"

namespace sslvc {

namespace fs = std::filesystem;

namespace {

// Unique scratch path under the system temp directory.
fs::path scratch_path(const std::string &suffix) {
  static std::atomic<unsigned> counter{0};
  return fs::temp_directory_path() /
         ("sslvc_" + std::to_string(::getpid()) + "_" + std::to_string(counter++) + suffix);
}

std::string shell_quote(const std::string &s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

}  // namespace

ExtractorKind parse_extractor_kind(const std::string &name) {
  if (name == "mock") return ExtractorKind::kMock;
  if (name == "precomputed") return ExtractorKind::kPrecomputed;
  if (name == "external_command") return ExtractorKind::kExternalCommand;
  throw ConfigError("unknown extractor kind '" + name + "' (expected mock, precomputed or external_command)");
}

std::string to_string(ExtractorKind kind) {
  switch (kind) {
    case ExtractorKind::kMock:
      return "mock";
    case ExtractorKind::kPrecomputed:
      return "precomputed";
    case ExtractorKind::kExternalCommand:
      return "external_command";
  }
  return "mock";
}

void ExtractorSpec::validate() const {
  if (dim < 1) throw ConfigError("extractor.dim must be >= 1");
  if (!(frame_rate_hz > 0.0)) throw ConfigError("extractor.frame_rate_hz must be > 0");
  if (kind == ExtractorKind::kExternalCommand) {
    if (command_template.find("{input_wav}") == std::string::npos ||
        command_template.find("{output_tensor}") == std::string::npos)
      throw ConfigError("extractor.command_template must contain {input_wav} and {output_tensor}");
  }
  if (kind == ExtractorKind::kMock && frame_rate_hz != 50.0)
    throw ConfigError("the mock extractor produces 50 Hz features");
}

std::string ExtractorSpec::cache_key() const {
  nlohmann::json j = *this;
  return j.dump();
}

void to_json(nlohmann::json &j, const ExtractorSpec &s) {
  j = {{"kind", to_string(s.kind)}, {"dim", s.dim}, {"frame_rate_hz", s.frame_rate_hz}};
  if (s.kind == ExtractorKind::kExternalCommand) j["command_template"] = s.command_template;
  if (s.kind == ExtractorKind::kMock) j["mock_seed"] = s.mock_seed;
}

void from_json(const nlohmann::json &j, ExtractorSpec &s) {
  if (j.contains("kind")) s.kind = parse_extractor_kind(j.at("kind").get<std::string>());
  s.dim = j.value("dim", s.dim);
  s.frame_rate_hz = j.value("frame_rate_hz", s.frame_rate_hz);
  s.command_template = j.value("command_template", s.command_template);
  s.mock_seed = j.value("mock_seed", s.mock_seed);
}

MatrixF mock_projection(int n_mels, int dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0 / std::sqrt(static_cast<double>(n_mels)));
  MatrixF p(n_mels, dim);
  for (Eigen::Index i = 0; i < p.size(); ++i) p.data()[i] = static_cast<float>(n(rng));
  return p;
}

FeatureSequence mock_features(std::span<const float> audio, const ExtractorSpec &spec, const MelConfig &mel) {
  if (mel.hop_length * 2 * spec.frame_rate_hz != mel.sample_rate)
    throw ConfigError("mock extractor needs a mel hop of half the feature period");
  const MatrixF m = extract_mel(audio, mel).frames;
  const Eigen::Index frames = m.rows() / 2;
  if (frames < 1) throw ExtractionError("audio too short for one feature frame");
  MatrixF pooled(frames, m.cols());
  for (Eigen::Index t = 0; t < frames; ++t) pooled.row(t) = 0.5f * (m.row(2 * t) + m.row(2 * t + 1));
  FeatureSequence out;
  out.frames = pooled * mock_projection(static_cast<int>(m.cols()), spec.dim, spec.mock_seed);
  out.frame_rate_hz = spec.frame_rate_hz;
  return out;
}

Waveform load_record_audio(const UtteranceRecord &record) {
  Waveform w = read_wav(record.audio_path);
  if (w.sample_rate != 16000)
    throw InputError(record.audio_path.string() + ": expected 16 kHz audio, got " + std::to_string(w.sample_rate));
  if (record.rate != 1.0) w.samples = time_stretch(w.samples, record.rate, w.sample_rate);
  return w;
}

std::string fill_command(const std::string &templ, const std::vector<std::pair<std::string, std::string>> &values) {
  std::string out = templ;
  for (const auto &[name, value] : values) {
    const std::string key = "{" + name + "}";
    const std::string quoted = shell_quote(value);
    for (std::size_t at = out.find(key); at != std::string::npos; at = out.find(key, at + quoted.size()))
      out.replace(at, key.size(), quoted);
  }
  return out;
}

void run_command(const std::string &command, bool for_eval) {
  const fs::path log = scratch_path(".log");
  const int status = std::system(("( " + command + "\n) > " + shell_quote(log.string()) + " 2>&1").c_str());
  std::string output;
  {
    std::ifstream in(log);
    std::stringstream ss;
    ss << in.rdbuf();
    output = ss.str();
  }
  std::error_code ec;
  fs::remove(log, ec);
  if (status != 0) {
    if (output.size() > 2000) output = "..." + output.substr(output.size() - 2000);
    const std::string msg = "command failed (status " + std::to_string(status) + "): " + command + "\n" + output;
    if (for_eval) throw EvalError(msg);
    throw ExtractionError(msg);
  }
}

namespace {

MatrixF check_dim(MatrixF m, const ExtractorSpec &spec, const std::string &what) {
  if (m.cols() != spec.dim)
    throw ExtractionError(what + ": feature dim " + std::to_string(m.cols()) + " does not match extractor dim " +
                          std::to_string(spec.dim));
  if (m.rows() < 1) throw ExtractionError(what + ": empty feature sequence");
  return m;
}

MatrixF read_features(const fs::path &path, const ExtractorSpec &spec) {
  try {
    auto t = read_tensor(path);
    if (t.shape.size() != 2) throw ExtractionError(path.string() + ": features must be a 2-D tensor");
    return check_dim(to_matrix(t), spec, path.string());
  } catch (const FormatError &e) {
    throw ExtractionError(path.string() + ": " + e.what());
  } catch (const InputError &e) {
    throw ExtractionError(path.string() + ": " + e.what());
  }
}

}  // namespace

FeatureSequence extract(const ExtractorSpec &spec, const UtteranceRecord &record, const MelConfig &mel) {
  spec.validate();
  FeatureSequence out;
  out.frame_rate_hz = spec.frame_rate_hz;
  switch (spec.kind) {
    case ExtractorKind::kPrecomputed:
      if (!record.feature_path) throw ExtractionError(record.id + ": precomputed extractor needs feature_path");
      out.frames = read_features(*record.feature_path, spec);
      return out;
    case ExtractorKind::kMock: {
      const Waveform w = load_record_audio(record);
      out = mock_features(w.samples, spec, mel);
      return out;
    }
    case ExtractorKind::kExternalCommand: {
      fs::path input = record.audio_path;
      fs::path scratch_wav;
      if (record.rate != 1.0) {
        scratch_wav = scratch_path(".wav");
        write_wav(scratch_wav, load_record_audio(record));
        input = scratch_wav;
      }
      const fs::path output = scratch_path(".vctf");
      try {
        run_command(fill_command(spec.command_template,
                                 {{"input_wav", input.string()}, {"output_tensor", output.string()}}));
        if (!fs::exists(output)) throw ExtractionError(record.id + ": extractor wrote no output tensor");
        out.frames = read_features(output, spec);
      } catch (...) {
        std::error_code ec;
        fs::remove(output, ec);
        if (!scratch_wav.empty()) fs::remove(scratch_wav, ec);
        throw;
      }
      std::error_code ec;
      fs::remove(output, ec);
      if (!scratch_wav.empty()) fs::remove(scratch_wav, ec);
      return out;
    }
  }
  return out;
}

std::string feature_cache_key(const ExtractorSpec &spec, const UtteranceRecord &record) {
  Fnv1a h;
  h.update(read_file_bytes(record.audio_path));
  char rate[32];
  std::snprintf(rate, sizeof rate, "|rate=%.6f|", record.rate);
  h.update(rate);
  h.update(spec.cache_key());
  return h.hex();
}

std::vector<UtteranceRecord> prepare_records(const std::vector<UtteranceRecord> &records, const ExtractorSpec &spec,
                                             const PrepareOptions &options, PrepareStats *stats) {
  spec.validate();
  const fs::path cache = options.output_dir / "cache";
  const fs::path mels = options.output_dir / "mels";
  const fs::path prosody = options.output_dir / "prosody";
  for (const auto &d : {cache, mels, prosody}) fs::create_directories(d);

  struct Done {
    UtteranceRecord record;
    bool cache_hit = false;
  };
  std::vector<UtteranceRecord> out(records.size());
  PrepareStats local;
  parallel_load<Done>(
      records.size(), static_cast<std::size_t>(std::max(1, options.workers)), 8,
      [&](std::size_t i) {
        Done d{records[i]};
        auto &r = d.record;
        const std::string sid = sanitize_id(r.id);
        const Waveform audio = load_record_audio(r);
        if (r.corpus_tag == CorpusTag::kTarget) {
          r.mel_path = mels / (sid + ".vctf");
          write_matrix(*r.mel_path, extract_mel(audio.samples, options.mel).frames);
        }
        r.prosody_path = prosody / (sid + ".vctf");
        write_matrix(*r.prosody_path, prosody_to_matrix(extract_prosody(audio.samples, options.mel)));
        if (spec.kind == ExtractorKind::kPrecomputed) {
          extract(spec, r, options.mel);  // validates shape
        } else {
          const fs::path cached = cache / (feature_cache_key(spec, r) + ".vctf");
          if (fs::exists(cached)) {
            d.cache_hit = true;
          } else {
            write_matrix(cached, extract(spec, r, options.mel).frames);
          }
          r.feature_path = cached;
        }
        return d;
      },
      [&](std::size_t i, Done &&d) {
        (d.cache_hit ? local.cache_hits : local.extracted) += 1;
        out[i] = std::move(d.record);
      });
  if (stats) *stats = local;
  return out;
}

}  // namespace sslvc
