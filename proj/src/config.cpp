// sslvc/config.cpp

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

#include "sslvc/config.hpp"

#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include "sslvc/errors.hpp"

namespace sslvc {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class TomlParser {
 public:
  TomlParser(std::string_view text, std::string source) : s_(text), source_(std::move(source)) {}

  json parse() {
    json root = json::object();
    json *table = &root;
    for (;;) {
      skip_blank_lines();
      if (eof()) break;
      if (peek() == '[') {
        ++pos_;
        if (peek() == '[') fail("arrays of tables are not supported");
        skip_ws();
        auto path = key_path();
        skip_ws();
        expect(']');
        end_of_line();
        table = &root;
        for (const auto &k : path) {
          json &next = (*table)[k];
          if (next.is_null()) next = json::object();
          if (!next.is_object()) fail("'" + k + "' is not a table");
          table = &next;
        }
        const std::string joined = join(path);
        if (!defined_tables_.insert(joined).second) fail("table [" + joined + "] defined twice");
        continue;
      }
      auto path = key_path();
      skip_ws();
      expect('=');
      skip_ws();
      json value = parse_value();
      end_of_line();
      assign(*table, path, std::move(value));
    }
    return root;
  }

  json parse_single_value() {
    skip_ws();
    json v = parse_value();
    skip_ws();
    if (!eof()) fail("trailing characters after value");
    return v;
  }

 private:
  [[noreturn]] void fail(const std::string &msg) const {
    throw ConfigError(source_ + ":" + std::to_string(line_) + ": " + msg);
  }
  bool eof() const { return pos_ >= s_.size(); }
  char peek() const { return eof() ? '\0' : s_[pos_]; }
  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }
  void skip_ws() {
    while (!eof() && (peek() == ' ' || peek() == '\t')) ++pos_;
  }
  void skip_comment() {
    if (peek() == '#')
      while (!eof() && peek() != '\n') ++pos_;
  }
  void skip_blank_lines() {
    for (;;) {
      skip_ws();
      skip_comment();
      if (peek() == '\r') ++pos_;
      if (peek() == '\n') {
        ++pos_;
        ++line_;
        continue;
      }
      return;
    }
  }
  void end_of_line() {
    skip_ws();
    skip_comment();
    if (peek() == '\r') ++pos_;
    if (eof()) return;
    if (peek() != '\n') fail("expected end of line");
    ++pos_;
    ++line_;
  }

  static std::string join(const std::vector<std::string> &path) {
    std::string out;
    for (const auto &p : path) out += (out.empty() ? "" : ".") + p;
    return out;
  }

  std::string key() {
    if (peek() == '"') return basic_string();
    if (peek() == '\'') return literal_string();
    std::string k;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '-')) k += s_[pos_++];
    if (k.empty()) fail("expected a key");
    return k;
  }

  std::vector<std::string> key_path() {
    std::vector<std::string> path{key()};
    for (;;) {
      skip_ws();
      if (peek() != '.') return path;
      ++pos_;
      skip_ws();
      path.push_back(key());
    }
  }

  void assign(json &table, const std::vector<std::string> &path, json value) {
    json *t = &table;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
      json &next = (*t)[path[i]];
      if (next.is_null()) next = json::object();
      if (!next.is_object()) fail("'" + path[i] + "' is not a table");
      t = &next;
    }
    if (t->contains(path.back())) fail("key '" + join(path) + "' defined twice");
    (*t)[path.back()] = std::move(value);
  }

  std::string basic_string() {
    expect('"');
    std::string out;
    for (;;) {
      if (eof() || peek() == '\n') fail("unterminated string");
      char c = s_[pos_++];
      if (c == '"') return out;
      if (c != '\\') {
        out += c;
        continue;
      }
      if (eof()) fail("unterminated string");
      char e = s_[pos_++];
      switch (e) {
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case 'r': out += '\r'; break;
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        default: fail(std::string("unsupported escape \\") + e);
      }
    }
  }

  std::string literal_string() {
    expect('\'');
    std::string out;
    for (;;) {
      if (eof() || peek() == '\n') fail("unterminated string");
      char c = s_[pos_++];
      if (c == '\'') return out;
      out += c;
    }
  }

  // Whitespace, newlines and comments inside arrays.
  void skip_array_space() {
    for (;;) {
      skip_ws();
      skip_comment();
      if (peek() == '\r') {
        ++pos_;
      } else if (peek() == '\n') {
        ++pos_;
        ++line_;
      } else {
        return;
      }
    }
  }

  json parse_value() {
    const char c = peek();
    if (c == '"') return basic_string();
    if (c == '\'') return literal_string();
    if (c == '[') {
      ++pos_;
      json arr = json::array();
      for (;;) {
        skip_array_space();
        if (peek() == ']') {
          ++pos_;
          return arr;
        }
        arr.push_back(parse_value());
        skip_array_space();
        if (peek() == ',') {
          ++pos_;
        } else if (peek() != ']') {
          fail("expected ',' or ']' in array");
        }
      }
    }
    if (c == '{') {
      ++pos_;
      json obj = json::object();
      skip_ws();
      if (peek() == '}') {
        ++pos_;
        return obj;
      }
      for (;;) {
        skip_ws();
        auto path = key_path();
        skip_ws();
        expect('=');
        skip_ws();
        assign(obj, path, parse_value());
        skip_ws();
        if (peek() == '}') {
          ++pos_;
          return obj;
        }
        expect(',');
      }
    }
    std::string word;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || std::string_view("+-._").find(peek()) != std::string_view::npos))
      word += s_[pos_++];
    if (word == "true") return true;
    if (word == "false") return false;
    if (word.empty()) fail("expected a value");
    std::string digits;
    for (char d : word)
      if (d != '_') digits += d;
    const bool is_float = digits.find_first_of(".eE") != std::string::npos || digits == "inf" || digits == "+inf" ||
                          digits == "-inf" || digits == "nan";
    try {
      std::size_t used = 0;
      if (is_float) {
        double v = std::stod(digits, &used);
        if (used == digits.size()) return v;
      } else {
        long long v = std::stoll(digits, &used, 10);
        if (used == digits.size()) return v;
      }
    } catch (const std::exception &) {
    }
    fail("invalid value '" + word + "'");
  }

  std::string_view s_;
  std::string source_;
  std::size_t pos_ = 0;
  int line_ = 1;
  std::set<std::string> defined_tables_;
};

}  // namespace

json parse_toml(std::string_view text, const std::string &source) { return TomlParser(text, source).parse(); }

json read_toml(const fs::path &path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_toml(ss.str(), path.string());
}

void apply_override(json &config, const std::string &assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + assignment + "' is not key=value");
  const std::string key = assignment.substr(0, eq), text = assignment.substr(eq + 1);
  json value;
  try {
    value = TomlParser(text, "override " + key).parse_single_value();
  } catch (const ConfigError &) {
    value = text;
  }
  json *t = &config;
  std::stringstream parts(key);
  std::vector<std::string> path;
  for (std::string p; std::getline(parts, p, '.');) path.push_back(p);
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    json &next = (*t)[path[i]];
    if (next.is_null()) next = json::object();
    if (!next.is_object()) throw ConfigError("override " + key + ": '" + path[i] + "' is not a table");
    t = &next;
  }
  (*t)[path.back()] = value;
}

void reject_unknown_keys(const json &given, const json &known, const std::string &where) {
  if (!given.is_object()) return;
  for (const auto &[k, v] : given.items()) {
    const std::string name = where.empty() ? k : where + "." + k;
    if (!known.is_object() || !known.contains(k)) throw ConfigError("unknown config key '" + name + "'");
    if (v.is_object()) {
      if (!known.at(k).is_object()) throw ConfigError("config key '" + name + "' must not be a table");
      reject_unknown_keys(v, known.at(k), name);
    }
  }
}

namespace {

json eval_to_json(const EvalConfig &e) {
  json embedder = e.embedder;
  embedder["command_template"] = e.embedder.command_template;
  return {{"embedder", embedder},
          {"vocoder", e.vocoder},
          {"vocoder_command", e.vocoder_command},
          {"griffin_lim_iterations", e.griffin_lim_iterations},
          {"tsne_perplexity", e.tsne_perplexity},
          {"tsne_iterations", e.tsne_iterations},
          {"max_utterances_per_speaker", e.max_utterances_per_speaker},
          {"summary_window_frames", e.summary_window_frames},
          {"workers", e.workers}};
}

// Schema used for unknown-key checks: every section with every optional
// field present. training.seed is absent; the top-level seed drives every
// stage.
json schema() {
  ProjectConfig d;
  json j = to_json(d);
  j["extractor"]["command_template"] = "";
  j["extractor"]["mock_seed"] = 0;
  return j;
}

}  // namespace

json to_json(const ProjectConfig &c) {
  json training = c.training;
  training.erase("seed");
  return {{"seed", c.seed},
          {"paths",
           {{"target_dir", c.paths.target_dir.string()},
            {"external_dir", c.paths.external_dir.string()},
            {"workdir", c.paths.workdir.string()},
            {"parallel_dir", c.paths.parallel_dir.string()}}},
          {"data",
           {{"target_speaker", c.data.target_speaker},
            {"split_ratio", c.data.split_ratio},
            {"rates", c.data.rates},
            {"workers", c.data.workers}}},
          {"extractor", c.extractor},
          {"model", c.model},
          {"training", training},
          {"eval", eval_to_json(c.eval)}};
}

void ProjectConfig::validate() const {
  if (paths.target_dir.empty()) throw ConfigError("paths.target_dir is required");
  if (paths.external_dir.empty()) throw ConfigError("paths.external_dir is required");
  if (paths.workdir.empty()) throw ConfigError("paths.workdir is required");
  if (!(data.split_ratio > 0.0 && data.split_ratio <= 1.0)) throw ConfigError("data.split_ratio must be in (0, 1]");
  if (data.rates.empty()) throw ConfigError("data.rates must not be empty");
  for (double r : data.rates)
    if (!(r >= kMinRate && r <= kMaxRate))
      throw ConfigError("data.rates entries must be in [" + std::to_string(kMinRate) + ", " + std::to_string(kMaxRate) +
                        "]");
  if (data.workers < 1) throw ConfigError("data.workers must be >= 1");
  extractor.validate();
  model.validate();
  training.validate();
  if (model.generator.input_dim != extractor.dim)
    throw ConfigError("model.generator.input_dim (" + std::to_string(model.generator.input_dim) +
                      ") must equal extractor.dim (" + std::to_string(extractor.dim) + ")");
  if (model.generator.n_mels != 80) throw ConfigError("model.generator.n_mels must be 80 to match the mel front end");
  if (eval.vocoder != "griffin_lim" && eval.vocoder != "external_command")
    throw ConfigError("eval.vocoder must be griffin_lim or external_command");
  if (eval.vocoder == "external_command" && (eval.vocoder_command.find("{input_mel}") == std::string::npos ||
                                             eval.vocoder_command.find("{output_wav}") == std::string::npos))
    throw ConfigError("eval.vocoder_command must contain {input_mel} and {output_wav}");
  if (eval.griffin_lim_iterations < 1) throw ConfigError("eval.griffin_lim_iterations must be >= 1");
  if (!(eval.tsne_perplexity > 0.0)) throw ConfigError("eval.tsne_perplexity must be > 0");
  if (eval.tsne_iterations < 1) throw ConfigError("eval.tsne_iterations must be >= 1");
  if (eval.max_utterances_per_speaker < 2) throw ConfigError("eval.max_utterances_per_speaker must be >= 2");
  if (eval.workers < 1) throw ConfigError("eval.workers must be >= 1");
  if (eval.summary_window_frames < 0) throw ConfigError("eval.summary_window_frames must be >= 0");
}

ProjectConfig project_config_from_json(const json &j, const fs::path &base_dir) {
  reject_unknown_keys(j, schema());
  ProjectConfig c;
  auto resolve = [&base_dir](const std::string &p) -> fs::path {
    if (p.empty()) return {};
    fs::path path(p);
    return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
  };
  try {
    c.seed = j.value("seed", c.seed);
    if (j.contains("paths")) {
      const auto &p = j.at("paths");
      c.paths.target_dir = resolve(p.value("target_dir", std::string()));
      c.paths.external_dir = resolve(p.value("external_dir", std::string()));
      c.paths.workdir = resolve(p.value("workdir", c.paths.workdir.string()));
      c.paths.parallel_dir = resolve(p.value("parallel_dir", std::string()));
    } else {
      c.paths.workdir = resolve(c.paths.workdir.string());
    }
    if (j.contains("data")) {
      const auto &d = j.at("data");
      c.data.target_speaker = d.value("target_speaker", c.data.target_speaker);
      c.data.split_ratio = d.value("split_ratio", c.data.split_ratio);
      c.data.rates = d.value("rates", c.data.rates);
      c.data.workers = d.value("workers", c.data.workers);
    }
    if (j.contains("extractor")) from_json(j.at("extractor"), c.extractor);
    if (j.contains("model")) {
      json m = j.at("model");
      if (!m.contains("generator")) m["generator"] = json::object();
      from_json(m, c.model);
    }
    if (j.contains("training")) from_json(j.at("training"), c.training);
    c.training.seed = c.seed;
    if (j.contains("eval")) {
      const auto &e = j.at("eval");
      if (e.contains("embedder")) from_json(e.at("embedder"), c.eval.embedder);
      c.eval.vocoder = e.value("vocoder", c.eval.vocoder);
      c.eval.vocoder_command = e.value("vocoder_command", c.eval.vocoder_command);
      c.eval.griffin_lim_iterations = e.value("griffin_lim_iterations", c.eval.griffin_lim_iterations);
      c.eval.tsne_perplexity = e.value("tsne_perplexity", c.eval.tsne_perplexity);
      c.eval.tsne_iterations = e.value("tsne_iterations", c.eval.tsne_iterations);
      c.eval.max_utterances_per_speaker = e.value("max_utterances_per_speaker", c.eval.max_utterances_per_speaker);
      c.eval.workers = e.value("workers", c.eval.workers);
      c.eval.summary_window_frames = e.value("summary_window_frames", c.eval.summary_window_frames);
    }
  } catch (const json::exception &e) {
    throw ConfigError(std::string("invalid config value: ") + e.what());
  }
  c.validate();
  return c;
}

ProjectConfig load_project_config(const fs::path &path, const std::vector<std::string> &overrides) {
  json j = read_toml(path);
  for (const auto &o : overrides) apply_override(j, o);
  return project_config_from_json(j, path.parent_path());
}

}  // namespace sslvc
