// sslvc/manifest.cpp

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

#include "sslvc/manifest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "sslvc/errors.hpp"
#include "sslvc/tensor_io.hpp"

namespace sslvc {

namespace fs = std::filesystem;

void to_json(nlohmann::json &j, const UtteranceRecord &r) {
  j = nlohmann::json{{"id", r.id},
                     {"speaker", r.speaker},
                     {"audio_path", r.audio_path.string()},
                     {"corpus_tag", r.corpus_tag == CorpusTag::kTarget ? "target" : "external"},
                     {"rate", r.rate}};
  j["feature_path"] = r.feature_path ? nlohmann::json(r.feature_path->string()) : nlohmann::json();
  j["mel_path"] = r.mel_path ? nlohmann::json(r.mel_path->string()) : nlohmann::json();
  if (r.prosody_path) j["prosody_path"] = r.prosody_path->string();
}

void from_json(const nlohmann::json &j, UtteranceRecord &r) {
  auto optional_path = [&](const char *key) -> std::optional<fs::path> {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return fs::path(j.at(key).get<std::string>());
  };
  r.id = j.at("id").get<std::string>();
  r.speaker = j.at("speaker").get<std::string>();
  r.audio_path = j.at("audio_path").get<std::string>();
  r.feature_path = optional_path("feature_path");
  r.mel_path = optional_path("mel_path");
  r.prosody_path = optional_path("prosody_path");
  const auto tag = j.at("corpus_tag").get<std::string>();
  if (tag == "target") {
    r.corpus_tag = CorpusTag::kTarget;
  } else if (tag == "external") {
    r.corpus_tag = CorpusTag::kExternal;
  } else {
    throw FormatError("manifest: unknown corpus_tag '" + tag + "'");
  }
  r.rate = j.value("rate", 1.0);
}

void validate_record(const UtteranceRecord &r, const std::string &target_speaker) {
  if (r.corpus_tag == CorpusTag::kTarget && r.speaker != target_speaker)
    throw ConfigError("record " + r.id + ": target-corpus speaker '" + r.speaker +
                      "' is not the target speaker '" + target_speaker + "'");
  if (!(r.rate >= kMinRate && r.rate <= kMaxRate))
    throw ConfigError("record " + r.id + ": rate outside [0.8, 1.2]");
}

void write_manifest(const fs::path &path, const std::vector<UtteranceRecord> &records) {
  std::string text;
  for (const auto &r : records) text += nlohmann::json(r).dump() + "\n";
  write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t *>(text.data()), text.size()));
}

std::vector<UtteranceRecord> read_manifest(const fs::path &path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open manifest: " + path.string());
  std::vector<UtteranceRecord> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(nlohmann::json::parse(line).get<UtteranceRecord>());
    } catch (const nlohmann::json::exception &e) {
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

ManifestSplit split_records(std::vector<UtteranceRecord> target,
                            std::vector<UtteranceRecord> external, double split_ratio,
                            std::uint64_t seed) {
  if (!(split_ratio > 0.0 && split_ratio <= 1.0))
    throw ConfigError("split_ratio must lie in (0, 1]");
  if (target.empty()) throw ConfigError("target corpus is empty");

  std::sort(target.begin(), target.end(),
            [](const auto &a, const auto &b) { return a.id < b.id; });
  std::mt19937_64 engine(seed);
  for (std::size_t i = target.size() - 1; i > 0; --i) {
    std::size_t j = engine() % (i + 1);
    std::swap(target[i], target[j]);
  }

  const auto n = target.size();
  auto n_train = static_cast<std::size_t>(std::llround(split_ratio * static_cast<double>(n)));
  n_train = std::clamp<std::size_t>(n_train, 1, n);

  ManifestSplit split;
  split.train.assign(target.begin(), target.begin() + static_cast<std::ptrdiff_t>(n_train));
  split.validation.assign(target.begin() + static_cast<std::ptrdiff_t>(n_train), target.end());
  std::sort(external.begin(), external.end(),
            [](const auto &a, const auto &b) { return a.id < b.id; });
  split.train.insert(split.train.end(), external.begin(), external.end());
  if (split.validation.empty())
    split.warnings.push_back("validation set is empty (split_ratio leaves no held-out target utterances)");
  return split;
}

namespace {

std::vector<fs::path> scan_wavs(const fs::path &dir, const char *what) {
  if (!fs::is_directory(dir))
    throw ConfigError(std::string(what) + " directory does not exist: " + dir.string());
  std::vector<fs::path> out;
  for (const auto &entry : fs::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".wav")
      out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string relative_id(const fs::path &file, const fs::path &root) {
  auto rel = fs::relative(file, root);
  rel.replace_extension();
  return rel.generic_string();
}

}  // namespace

ManifestSplit build_manifest(const fs::path &target_dir, const fs::path &external_dir,
                             double split_ratio, std::uint64_t seed,
                             const std::string &target_speaker) {
  std::vector<UtteranceRecord> target, external;
  for (const auto &p : scan_wavs(target_dir, "target")) {
    UtteranceRecord r;
    r.id = "target/" + relative_id(p, target_dir);
    r.speaker = target_speaker;
    r.audio_path = p;
    r.corpus_tag = CorpusTag::kTarget;
    target.push_back(std::move(r));
  }
  for (const auto &p : scan_wavs(external_dir, "external")) {
    UtteranceRecord r;
    auto rel = fs::relative(p, external_dir);
    r.id = "external/" + relative_id(p, external_dir);
    r.speaker = std::distance(rel.begin(), rel.end()) > 1 ? rel.begin()->string() : "external";
    r.audio_path = p;
    r.corpus_tag = CorpusTag::kExternal;
    external.push_back(std::move(r));
  }
  if (target.empty()) throw ConfigError("target corpus is empty: " + target_dir.string());
  return split_records(std::move(target), std::move(external), split_ratio, seed);
}

std::vector<UtteranceRecord> augment_rates(const std::vector<UtteranceRecord> &records,
                                           const std::vector<double> &rates) {
  std::vector<UtteranceRecord> out;
  out.reserve(records.size() * rates.size());
  for (const auto &r : records) {
    for (double rate : rates) {
      if (!(rate >= kMinRate && rate <= kMaxRate))
        throw ConfigError("augmentation rate outside [0.8, 1.2]");
      UtteranceRecord copy = r;
      copy.rate = rate;
      if (rate != 1.0) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "@r%.2f", rate);
        copy.id += buf;
      }
      copy.feature_path.reset();
      copy.mel_path.reset();
      copy.prosody_path.reset();
      out.push_back(std::move(copy));
    }
  }
  return out;
}

std::string sanitize_id(const std::string &id) {
  std::string out;
  out.reserve(id.size());
  for (char c : id) {
    if (c == '/' || c == '\\') {
      out += "__";
    } else if (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' ||
               c == '.' || c == '@') {
      out += c;
    } else {
      out += '_';
    }
  }
  return out;
}

}  // namespace sslvc
