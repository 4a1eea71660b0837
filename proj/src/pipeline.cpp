// sslvc/pipeline.cpp

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

#include "sslvc/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "sslvc/checkpoint.hpp"
#include "sslvc/dsp.hpp"
#include "sslvc/tensor_io.hpp"
#include "sslvc/wav.hpp"

namespace sslvc {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path train_manifest_path(const ProjectConfig &c) { return c.paths.workdir / "manifest_train.jsonl"; }
fs::path validation_manifest_path(const ProjectConfig &c) { return c.paths.workdir / "manifest_val.jsonl"; }
fs::path checkpoint_dir(const ProjectConfig &c) { return c.paths.workdir / "checkpoints"; }

namespace {

void write_json(const fs::path &path, const json &j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

std::vector<UtteranceRecord> read_prepared(const ProjectConfig &c, bool with_validation) {
  const fs::path train = train_manifest_path(c);
  if (!fs::exists(train)) throw ConfigError("no prepared manifest at " + train.string() + "; run prepare first");
  auto records = read_manifest(train);
  if (with_validation && fs::exists(validation_manifest_path(c))) {
    auto val = read_manifest(validation_manifest_path(c));
    records.insert(records.end(), val.begin(), val.end());
  }
  return records;
}

// Id without the rate suffix, so rate copies of one recording share a group.
std::string base_id(const std::string &id) {
  const auto at = id.rfind("@r");
  return at == std::string::npos ? id : id.substr(0, at);
}

}  // namespace

void to_json(json &j, const PrepareSummary &s) {
  j = {{"train_records", s.train_records},
       {"validation_records", s.validation_records},
       {"target_feature_files", s.target_feature_files},
       {"extracted", s.stats.extracted},
       {"cache_hits", s.stats.cache_hits},
       {"warnings", s.warnings}};
}

PrepareSummary cmd_prepare(const ProjectConfig &c) {
  c.validate();
  ManifestSplit split = build_manifest(c.paths.target_dir, c.paths.external_dir, c.data.split_ratio, c.seed,
                                       c.data.target_speaker);

  std::vector<std::string> unreadable;
  auto check = [&unreadable](const std::vector<UtteranceRecord> &records) {
    for (const auto &r : records) {
      try {
        const Waveform w = read_wav(r.audio_path);
        if (w.sample_rate != 16000)
          unreadable.push_back(r.audio_path.string() + ": sample rate " + std::to_string(w.sample_rate) +
                               " (need 16000)");
        else if (w.samples.empty())
          unreadable.push_back(r.audio_path.string() + ": no samples");
      } catch (const Error &e) {
        unreadable.push_back(r.audio_path.string() + ": " + e.what());
      }
    }
  };
  check(split.train);
  check(split.validation);
  if (!unreadable.empty()) {
    std::string msg = std::to_string(unreadable.size()) + " unreadable audio file(s):";
    for (const auto &u : unreadable) msg += "\n  " + u;
    throw InputError(msg);
  }

  auto train = augment_rates(split.train, c.data.rates);
  auto val = augment_rates(split.validation, c.data.rates);
  std::vector<UtteranceRecord> all = train;
  all.insert(all.end(), val.begin(), val.end());

  PrepareSummary summary;
  PrepareOptions options;
  options.output_dir = c.paths.workdir / "features";
  options.workers = c.data.workers;
  auto prepared = prepare_records(all, c.extractor, options, &summary.stats);

  std::set<fs::path> target_files;
  for (const auto &r : prepared)
    if (r.corpus_tag == CorpusTag::kTarget && r.feature_path) target_files.insert(*r.feature_path);
  summary.target_feature_files = target_files.size();

  train.assign(prepared.begin(), prepared.begin() + static_cast<std::ptrdiff_t>(train.size()));
  val.assign(prepared.begin() + static_cast<std::ptrdiff_t>(train.size()), prepared.end());
  fs::create_directories(c.paths.workdir);
  write_manifest(train_manifest_path(c), train);
  write_manifest(validation_manifest_path(c), val);
  summary.train_records = train.size();
  summary.validation_records = val.size();
  summary.warnings = split.warnings;
  write_json(c.paths.workdir / "prepare.json", summary);
  return summary;
}

RunResult cmd_train(const ProjectConfig &c, const TrainOptions &options) {
  c.validate();
  auto train = read_manifest(train_manifest_path(c));
  std::vector<UtteranceRecord> val;
  if (fs::exists(validation_manifest_path(c))) val = read_manifest(validation_manifest_path(c));
  const Corpus corpus = load_corpus(train, val, c.training.loader_workers);

  Trainer trainer(c.model, c.training);
  RunOptions run;
  run.output_dir = c.paths.workdir;
  run.on_step = options.on_step;
  if (options.resume) {
    const fs::path latest = latest_checkpoint(checkpoint_dir(c));
    if (latest.empty()) throw ConfigError("nothing to resume: no checkpoint in " + checkpoint_dir(c).string());
    run.resume = latest;
  }
  write_json(c.paths.workdir / "config.json", to_json(c));
  return run_training(trainer, corpus, run);
}

void to_json(json &j, const Conversion &c) {
  j = {{"source", c.source.string()}, {"converted", c.converted.string()}, {"mel", c.mel.string()}};
}

void from_json(const json &j, Conversion &c) {
  c.source = j.at("source").get<std::string>();
  c.converted = j.at("converted").get<std::string>();
  c.mel = j.value("mel", std::string());
}

std::vector<Conversion> cmd_convert(const ProjectConfig &c, const fs::path &checkpoint,
                                    const std::vector<fs::path> &inputs, const fs::path &output_dir) {
  c.validate();
  if (inputs.empty()) return {};
  LoadedGenerator loaded = load_generator(checkpoint);
  const auto &g = loaded.meta.model.generator;
  if (g.input_dim != c.extractor.dim)
    throw ConfigError("checkpoint " + checkpoint.string() + " expects " + std::to_string(g.input_dim) +
                      "-dim features but the extractor produces " + std::to_string(c.extractor.dim));

  std::map<std::string, fs::path> stems;
  for (const auto &in : inputs) {
    const std::string stem = sanitize_id(in.stem().string());
    if (auto [it, fresh] = stems.emplace(stem, in); !fresh)
      throw ParameterError("inputs " + it->second.string() + " and " + in.string() + " share the output name " +
                           stem);
  }

  fs::create_directories(output_dir);
  const MelConfig mel;
  std::vector<Conversion> out;
  for (const auto &in : inputs) {
    UtteranceRecord r;
    r.id = in.stem().string();
    r.audio_path = in;
    if (c.extractor.kind == ExtractorKind::kPrecomputed) r.feature_path = fs::path(in).replace_extension(".vctf");
    const FeatureSequence features = extract(c.extractor, r, mel);

    Conversion conv;
    conv.source = fs::absolute(in);
    const std::string stem = sanitize_id(in.stem().string());
    conv.mel = fs::absolute(output_dir / (stem + ".mel.vctf"));
    conv.converted = fs::absolute(output_dir / (stem + ".wav"));
    MelSpectrogram y;
    y.frames = loaded.generator->convert(features.frames);
    y.hop_s = static_cast<double>(mel.hop_length) / mel.sample_rate;
    write_matrix(conv.mel, y.frames);
    if (c.eval.vocoder == "griffin_lim") {
      GriffinLimConfig gl;
      gl.iterations = c.eval.griffin_lim_iterations;
      gl.seed = c.seed;
      write_wav(conv.converted, Waveform{griffin_lim(y, gl, mel), mel.sample_rate});
    } else {
      fs::remove(conv.converted);
      run_command(fill_command(c.eval.vocoder_command,
                               {{"input_mel", conv.mel.string()}, {"output_wav", conv.converted.string()}}));
      if (!fs::exists(conv.converted))
        throw ExtractionError("vocoder wrote no output for " + in.string());
    }
    out.push_back(std::move(conv));
  }

  std::ofstream log(output_dir / "conversions.jsonl");
  for (const auto &conv : out) log << json(conv).dump() << "\n";
  return out;
}

EvalReport cmd_evaluate(const ProjectConfig &c, const fs::path &converted_dir) {
  c.validate();
  const fs::path log = converted_dir / "conversions.jsonl";
  std::vector<EvalPair> pairs;
  if (fs::exists(log)) {
    std::ifstream in(log);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      Conversion conv = json::parse(line).get<Conversion>();
      if (!fs::exists(conv.converted)) continue;
      EvalPair p{conv.converted, conv.source, std::nullopt};
      if (!c.paths.parallel_dir.empty()) {
        const fs::path rel = fs::relative(conv.source, c.paths.external_dir);
        if (!rel.empty() && *rel.begin() != "..") {
          const fs::path ref = c.paths.parallel_dir / rel;
          if (fs::exists(ref)) p.reference = ref;
        }
      }
      pairs.push_back(std::move(p));
    }
  }
  if (pairs.empty()) throw ParameterError("no converted files in " + converted_dir.string());

  std::vector<UtteranceRecord> refs_from;
  if (fs::exists(validation_manifest_path(c))) refs_from = read_manifest(validation_manifest_path(c));
  auto pick = [&](const std::vector<UtteranceRecord> &records) {
    std::vector<fs::path> out;
    for (const auto &r : records)
      if (r.corpus_tag == CorpusTag::kTarget && r.rate == 1.0) out.push_back(r.audio_path);
    return out;
  };
  std::vector<fs::path> references = pick(refs_from);
  if (references.empty()) references = pick(read_prepared(c, false));
  if (references.size() > static_cast<std::size_t>(c.eval.max_utterances_per_speaker))
    references.resize(static_cast<std::size_t>(c.eval.max_utterances_per_speaker));

  EvalReport report = evaluate_pairs(pairs, references, c.eval.embedder, c.eval.workers);
  write_json(converted_dir / "eval_report.json", report);
  return report;
}

ProbeSet embedding_probe_set(Generator<float> &generator, const std::vector<Utterance> &utterances,
                             const std::vector<int> &speakers, const std::vector<int> &groups, int window_frames) {
  if (speakers.size() != utterances.size() || groups.size() != utterances.size())
    throw ShapeError("embedding_probe_set: one speaker and group per utterance");
  ProbeSet out;
  for (std::size_t i = 0; i < utterances.size(); ++i) {
    const MatrixD e = generator.encode(utterances[i].features).cast<double>();
    const Eigen::Index w = window_frames > 0 ? std::min<Eigen::Index>(window_frames, e.rows()) : e.rows();
    for (Eigen::Index start = 0; start + w <= e.rows(); start += w)
      out.append(correlation_summary(e.middleRows(start, w)), speakers[i], groups[i]);
  }
  return out;
}

void to_json(json &j, const VisualizeResult &r) {
  j = {{"speakers", r.speaker_names}, {"panels", json::array()}};
  for (const auto &p : r.panels)
    j["panels"].push_back({{"title", p.title},
                           {"checkpoint", p.checkpoint.string()},
                           {"probe_accuracy", p.probe.accuracy},
                           {"probe_chance", p.probe.chance},
                           {"tsne_speaker_silhouette", p.tsne.speaker_silhouette},
                           {"points", p.speakers.size()}});
}

VisualizeResult cmd_visualize(const ProjectConfig &c, const std::optional<fs::path> &without_lsim,
                              const std::optional<fs::path> &with_lsim, const fs::path &output) {
  c.validate();
  if (!without_lsim && !with_lsim) throw ParameterError("visualize needs at least one checkpoint");

  // Utterances grouped by speaker, evenly thinned to the per-speaker cap.
  std::map<std::string, std::vector<UtteranceRecord>> by_speaker;
  for (auto &r : read_prepared(c, true)) by_speaker[r.speaker].push_back(std::move(r));
  VisualizeResult result;
  std::vector<Utterance> utterances;
  std::vector<int> speakers, groups;
  std::map<std::string, int> group_ids;
  const auto cap = static_cast<std::size_t>(c.eval.max_utterances_per_speaker);
  for (auto &[name, records] : by_speaker) {
    std::sort(records.begin(), records.end(), [](const auto &a, const auto &b) { return a.id < b.id; });
    const int label = static_cast<int>(result.speaker_names.size());
    result.speaker_names.push_back(name);
    const std::size_t n = records.size(), take = std::min(n, cap);
    for (std::size_t k = 0; k < take; ++k) {
      const auto &r = records[k * n / take];
      if (!r.feature_path) throw PreflightError(r.id + ": no feature file; run prepare");
      Utterance u;
      u.id = r.id;
      u.features = read_matrix(*r.feature_path);
      utterances.push_back(std::move(u));
      speakers.push_back(label);
      groups.push_back(group_ids.emplace(base_id(r.id), static_cast<int>(group_ids.size())).first->second);
    }
  }

  TsneConfig tsne;
  tsne.perplexity = c.eval.tsne_perplexity;
  tsne.iterations = c.eval.tsne_iterations;
  tsne.exaggeration_iterations = std::min(tsne.exaggeration_iterations, tsne.iterations / 4);
  tsne.seed = c.seed;
  ProbeConfig probe;
  probe.seed = c.seed;

  std::vector<std::pair<std::string, fs::path>> runs;
  if (without_lsim) runs.emplace_back("WITHOUT LSIM", *without_lsim);
  if (with_lsim) runs.emplace_back("WITH LSIM", *with_lsim);
  std::vector<ScatterPanel> plots;
  for (const auto &[title, ckpt] : runs) {
    LoadedGenerator loaded = load_generator(ckpt);
    if (loaded.meta.model.generator.input_dim != c.extractor.dim)
      throw ConfigError("checkpoint " + ckpt.string() + " does not match extractor dim " +
                        std::to_string(c.extractor.dim));
    const ProbeSet set = embedding_probe_set(*loaded.generator, utterances, speakers, groups,
                                             c.eval.summary_window_frames);
    ProbePanel panel;
    panel.title = title;
    panel.checkpoint = ckpt;
    panel.probe = speaker_probe(set, probe);
    panel.tsne = tsne_probe(set, tsne);
    panel.speakers = set.speakers;
    plots.push_back({title, panel.tsne.coordinates, set.speakers});
    result.panels.push_back(std::move(panel));
  }

  fs::path png = output, data = output, meta = output;
  if (output.has_parent_path()) fs::create_directories(output.parent_path());
  write_scatter_png(png.replace_extension(".png"), plots, result.speaker_names);
  Eigen::Index rows = 0;
  for (const auto &p : result.panels) rows += p.tsne.coordinates.rows();
  MatrixF scatter(rows, 4);
  Eigen::Index at = 0;
  for (std::size_t k = 0; k < result.panels.size(); ++k) {
    const auto &p = result.panels[k];
    for (Eigen::Index i = 0; i < p.tsne.coordinates.rows(); ++i, ++at) {
      scatter(at, 0) = static_cast<float>(k);
      scatter(at, 1) = static_cast<float>(p.tsne.coordinates(i, 0));
      scatter(at, 2) = static_cast<float>(p.tsne.coordinates(i, 1));
      scatter(at, 3) = static_cast<float>(p.speakers[static_cast<std::size_t>(i)]);
    }
  }
  write_matrix(data.replace_extension(".vctf"), scatter);
  write_json(meta.replace_extension(".json"), result);
  return result;
}

std::string fixture_config_toml() {
  return R"(# Fixture-scale settings: small model, short schedule.
seed = 1

[paths]
target_dir = "target"
external_dir = "external"
parallel_dir = "parallel"
workdir = "work"

[data]
split_ratio = 0.8
rates = [0.9, 1.0, 1.1]
workers = 2

[extractor]
kind = "mock"
dim = 64

[model.generator]
input_dim = 64
hidden_dim = 64
encoder_blocks = 2
decoder_blocks = 2
attention_heads = 2
conv_kernel = 5
ffn_dim = 128
dropout = 0.0

[model.mel_discriminator]
channels = [32, 32]

[model.embedding_discriminator]
channels = [32, 32]

[training]
steps = 500
batch_size = 4
segment_frames = 32
lr_g = 1e-3
lr_d = 5e-4
warmup_steps = 250
checkpoint_every = 250
validate_every = 100

[eval]
summary_window_frames = 16
tsne_iterations = 500
griffin_lim_iterations = 32
)";
}

void cmd_fixture(const fs::path &root, const FixtureSpec &spec) {
  write_fixture_corpus(root, spec);
  std::ofstream out(root / "config.toml");
  if (!out) throw InputError("cannot write " + (root / "config.toml").string());
  out << fixture_config_toml();
}

}  // namespace sslvc
