// sslvc/tests/test_pipeline.cpp

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

#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "sslvc/errors.hpp"
#include "sslvc/pipeline.hpp"
#include "sslvc/tensor_io.hpp"
#include "sslvc/wav.hpp"

using namespace sslvc;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string &name) {
  fs::path d = fs::temp_directory_path() / ("sslvc_test_pipeline_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

// Fixture corpus with a tiny model so every command runs in seconds.
ProjectConfig tiny_project(const fs::path &root, std::vector<std::string> extra = {}) {
  FixtureSpec spec;
  spec.external_per_speaker = 2;
  cmd_fixture(root, spec);
  std::vector<std::string> o = {"extractor.dim=16",
                                "model.generator.input_dim=16",
                                "model.generator.hidden_dim=16",
                                "model.generator.ffn_dim=32",
                                "model.generator.encoder_blocks=1",
                                "model.generator.decoder_blocks=1",
                                "model.mel_discriminator.channels=[8]",
                                "model.embedding_discriminator.channels=[8]",
                                "training.steps=4",
                                "training.warmup_steps=2",
                                "training.checkpoint_every=2",
                                "training.batch_size=2",
                                "training.segment_frames=16",
                                "eval.griffin_lim_iterations=4",
                                "eval.tsne_iterations=100",
                                "eval.tsne_perplexity=5"};
  o.insert(o.end(), extra.begin(), extra.end());
  return load_project_config(root / "config.toml", o);
}

}  // namespace

TEST_CASE("fixture config is valid as written") {
  auto root = fresh_dir("fixture");
  cmd_fixture(root, {2, 1, 0.6, 3});
  const ProjectConfig c = load_project_config(root / "config.toml");
  CHECK_NOTHROW(c.validate());
  CHECK(c.paths.target_dir == root / "target");
  CHECK(fs::exists(root / "parallel"));
}

TEST_CASE("prepare: rate expansion count and idempotence") {
  auto root = fresh_dir("prepare");
  auto c = tiny_project(root, {"data.rates=[0.8, 0.9, 1.0, 1.1, 1.2]"});
  const auto first = cmd_prepare(c);
  CHECK(first.target_feature_files == 50);  // 10 target utterances x 5 rates
  CHECK(first.train_records + first.validation_records == 50 + 6 * 5);
  CHECK(first.stats.cache_hits == 0);
  const auto second = cmd_prepare(c);
  CHECK(second.stats.extracted == 0);
  CHECK(second.stats.cache_hits == first.stats.extracted);
}

TEST_CASE("prepare: missing external dir names the path") {
  auto root = fresh_dir("missing");
  auto c = tiny_project(root, {"paths.external_dir=\"no_such_dir\""});
  try {
    cmd_prepare(c);
    FAIL("expected ConfigError");
  } catch (const ConfigError &e) {
    CHECK(std::string(e.what()).find("no_such_dir") != std::string::npos);
  }
}

TEST_CASE("prepare: every unreadable file is listed") {
  auto root = fresh_dir("unreadable");
  auto c = tiny_project(root);
  for (const char *name : {"broken_a.wav", "broken_b.wav"}) std::ofstream(root / "target" / name) << "not audio";
  try {
    cmd_prepare(c);
    FAIL("expected InputError");
  } catch (const InputError &e) {
    const std::string msg = e.what();
    CHECK(msg.find("2 unreadable") != std::string::npos);
    CHECK(msg.find("broken_a.wav") != std::string::npos);
    CHECK(msg.find("broken_b.wav") != std::string::npos);
  }
  CHECK_FALSE(fs::exists(train_manifest_path(c)));
}

TEST_CASE("train, convert, evaluate, visualize") {
  auto root = fresh_dir("flow");
  auto c = tiny_project(root);
  cmd_prepare(c);
  const RunResult run = cmd_train(c);
  CHECK(run.final_step == 4);
  const fs::path ckpt = checkpoint_name(checkpoint_dir(c), 4);
  REQUIRE(fs::exists(ckpt));

  SUBCASE("empty input list") {
    CHECK(cmd_convert(c, ckpt, {}, root / "none").empty());
    CHECK_FALSE(fs::exists(root / "none" / "conversions.jsonl"));
    CHECK_THROWS_AS(cmd_evaluate(c, root / "none"), ParameterError);
  }
  SUBCASE("feature dim mismatch") {
    auto other = tiny_project(root, {"extractor.dim=8", "model.generator.input_dim=8"});
    CHECK_THROWS_AS(cmd_convert(other, ckpt, {root / "target" / "target_000.wav"}, root / "bad"), ConfigError);
  }
  SUBCASE("conversion keeps duration and evaluates") {
    std::vector<fs::path> inputs;
    for (const auto &e : fs::directory_iterator(root / "external" / "spk_low")) inputs.push_back(e.path());
    std::sort(inputs.begin(), inputs.end());
    const auto out = cmd_convert(c, ckpt, inputs, root / "conv");
    REQUIRE(out.size() == inputs.size());
    for (const auto &conv : out) {
      const auto in = read_wav(conv.source).samples.size();
      const auto made = read_wav(conv.converted).samples.size();
      CHECK(std::abs(static_cast<long>(in) - static_cast<long>(made)) <= 2 * 160 + 160);
    }
    const EvalReport report = cmd_evaluate(c, root / "conv");
    CHECK(report.n_pairs == inputs.size());
    CHECK(report.n_mcd_pairs == inputs.size());  // the fixture ships parallel references
    CHECK(fs::exists(root / "conv" / "eval_report.json"));
  }
  SUBCASE("two-panel visualization") {
    const fs::path early = checkpoint_name(checkpoint_dir(c), 2);
    const auto result = cmd_visualize(c, early, ckpt, root / "plots" / "fig");
    REQUIRE(result.panels.size() == 2);
    CHECK(result.panels[0].title == "WITHOUT LSIM");
    CHECK(result.panels[1].title == "WITH LSIM");
    CHECK(result.speaker_names.size() == 4);
    for (const char *ext : {".png", ".vctf", ".json"}) CHECK(fs::exists(root / "plots" / (std::string("fig") + ext)));
    const MatrixF scatter = read_matrix(root / "plots" / "fig.vctf");
    CHECK(scatter.cols() == 4);
    CHECK(scatter.rows() == 2 * static_cast<Eigen::Index>(result.panels[0].speakers.size()));
    CHECK_THROWS_AS(cmd_visualize(c, std::nullopt, std::nullopt, root / "x"), ParameterError);
  }
}

TEST_CASE("resume continues from the latest checkpoint") {
  auto root = fresh_dir("resume");
  auto c = tiny_project(root);
  cmd_prepare(c);
  TrainOptions resume;
  resume.resume = true;
  CHECK_THROWS_AS(cmd_train(c, resume), ConfigError);
  cmd_train(c);
  auto longer = tiny_project(root, {"training.steps=6"});
  CHECK(cmd_train(longer, resume).final_step == 6);
}

TEST_CASE("scatter png") {
  auto root = fresh_dir("png");
  ScatterPanel p{"TEST", MatrixD::Random(20, 2), std::vector<int>(20, 0)};
  for (int i = 10; i < 20; ++i) p.labels[static_cast<std::size_t>(i)] = 1;
  write_scatter_png(root / "a.png", {p, p}, {"one", "two"});
  std::ifstream in(root / "a.png", std::ios::binary);
  char sig[8];
  in.read(sig, 8);
  CHECK(std::string(sig + 1, 3) == "PNG");
  p.labels.pop_back();
  CHECK_THROWS_AS(write_scatter_png(root / "b.png", {p}), ShapeError);
  CHECK_THROWS_AS(write_scatter_png(root / "c.png", {}), ParameterError);
}
