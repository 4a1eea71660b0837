// sslvc/tests/test_training.cpp

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
#include <random>
#include <set>

#include "sslvc/errors.hpp"
#include "sslvc/tensor_io.hpp"
#include "sslvc/training.hpp"

using namespace sslvc;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string &name) {
  fs::path d = fs::temp_directory_path() / ("sslvc_test_train_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

ModelConfig small_model() {
  ModelConfig m;
  auto &g = m.generator;
  g.input_dim = 8;
  g.hidden_dim = 16;
  g.encoder_blocks = 1;
  g.decoder_blocks = 1;
  g.attention_heads = 2;
  g.conv_kernel = 3;
  g.ffn_dim = 32;
  g.n_mels = 10;
  m.mel_discriminator = {10, {8, 8}, 3, 2, 0.2};
  m.embedding_discriminator = {16, {8}, 3, 1, 0.2};
  return m;
}

TrainingConfig small_training() {
  TrainingConfig c;
  c.steps = 6;
  c.batch_size = 2;
  c.warmup_steps = 3;
  c.segment_frames = 6;
  c.checkpoint_every = 2;
  c.validate_every = 3;
  c.lr_g = 1e-3;
  c.lr_d = 1e-3;
  c.seed = 4;
  return c;
}

Corpus small_corpus() {
  std::mt19937_64 rng(17);
  std::normal_distribution<float> n(0.0f, 1.0f);
  auto random = [&](Eigen::Index r, Eigen::Index c) {
    MatrixF m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
    return m;
  };
  Corpus c;
  for (int i = 0; i < 5; ++i) {
    const Eigen::Index t = 7 + i;
    c.target.push_back({"t" + std::to_string(i), random(t, 8), random(2 * t + 1, 10)});
  }
  for (int i = 0; i < 4; ++i) c.external.push_back({"e" + std::to_string(i), random(9 + i, 8), {}});
  for (int i = 0; i < 2; ++i) c.validation.push_back({"v" + std::to_string(i), random(8, 8), random(16, 10)});
  return c;
}

std::vector<MatrixF> snapshot(const ad::ParameterList<float> &ps) {
  std::vector<MatrixF> out;
  for (const auto *p : ps) out.push_back(p->value);
  return out;
}

bool same(const std::vector<MatrixF> &a, const std::vector<MatrixF> &b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) return false;
  return true;
}

}  // namespace

TEST_CASE("lambda_sim switches on at warmup_steps") {
  TrainingConfig c;
  CHECK(lambda_sim(c, 0) == 0.0);
  CHECK(lambda_sim(c, 4999) == 0.0);
  CHECK(lambda_sim(c, 5000) == 1.0);
  c.warmup_steps = 0;
  CHECK(lambda_sim(c, 0) == 1.0);
}

TEST_CASE("config validation and round trip") {
  TrainingConfig c = small_training();
  c.objective = GanObjective::kLeastSquares;
  nlohmann::json j = c;
  TrainingConfig back = j.get<TrainingConfig>();
  CHECK(nlohmann::json(back) == j);
  c.batch_size = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small_training();
  c.warmup_steps = -1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("warmup: similarity terms contribute no generator gradient") {
  const ModelConfig mc = small_model();
  const Corpus corpus = small_corpus();
  TrainingConfig tc = small_training();
  BatchSampler sampler(corpus, tc, 2);
  const auto batch = sampler.batch(0);
  auto cast = [](const std::vector<MatrixF> &in) {
    std::vector<MatrixD> out;
    for (const auto &m : in) out.push_back(m.cast<double>());
    return out;
  };
  auto grads = [&](Models<double> &m, double lambda) {
    for (auto *p : m.generator.parameters()) p->zero_grad();
    ad::Tape<double> t;
    t.freeze(m.discriminator_parameters());
    auto g = run_generator(t, m.generator, cast(batch.target_features), cast(batch.target_mels),
                           cast(batch.external_features), ForwardContext<double>{});
    auto obj = generator_objective(t, m, g, lambda, GanObjective::kExpectation);
    t.backward(obj.total);
    t.flush_param_grads();
    std::vector<MatrixD> out;
    for (const auto *p : m.generator.parameters()) out.push_back(p->grad);
    return out;
  };
  Models<double> m(mc, 1);
  const auto before = grads(m, 0.0);
  // Scramble the similarity discriminators; a warmup gradient must not notice.
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  for (auto *d : {&m.d_embedding, &m.d_conversion})
    for (auto *p : d->parameters())
      for (Eigen::Index i = 0; i < p->value.size(); ++i) p->value.data()[i] += n(rng);
  const auto after = grads(m, 0.0);
  REQUIRE(before.size() == after.size());
  for (std::size_t i = 0; i < before.size(); ++i) CHECK(before[i] == after[i]);
  // Once active, the same perturbation changes the gradient.
  Models<double> m2(mc, 1);
  const auto active = grads(m2, 1.0);
  bool differs = false;
  for (std::size_t i = 0; i < before.size(); ++i) differs |= !(active[i] == before[i]);
  CHECK(differs);
}

TEST_CASE("warmup steps leave the similarity discriminators untouched") {
  Trainer trainer(small_model(), small_training());
  const Corpus corpus = small_corpus();
  BatchSampler sampler(corpus, trainer.config(), 2);
  auto &m = trainer.models();
  const auto e0 = snapshot(m.d_embedding.parameters());
  const auto c0 = snapshot(m.d_conversion.parameters());
  const auto r0 = snapshot(m.d_real_fake.parameters());
  for (int s = 0; s < 3; ++s) {
    auto rep = trainer.train_step(sampler.batch(s), s);
    CHECK(rep.lambda_sim == 0.0);
    CHECK(rep.total_g == doctest::Approx(rep.l_rec + rep.l_rf_g));
  }
  CHECK(same(e0, snapshot(m.d_embedding.parameters())));
  CHECK(same(c0, snapshot(m.d_conversion.parameters())));
  CHECK_FALSE(same(r0, snapshot(m.d_real_fake.parameters())));
  auto rep = trainer.train_step(sampler.batch(3), 3);
  CHECK(rep.lambda_sim == 1.0);
  CHECK(rep.total_g == doctest::Approx(rep.l_rec + rep.l_rf_g + rep.l_e_g + rep.l_cvt_g));
  CHECK_FALSE(same(e0, snapshot(m.d_embedding.parameters())));
}

TEST_CASE("sampler is a pure function of the step") {
  const Corpus corpus = small_corpus();
  TrainingConfig tc = small_training();
  BatchSampler a(corpus, tc, 2), b(corpus, tc, 2);
  for (int s : {0, 5, 2, 5}) {
    auto x = a.batch(s), y = b.batch(s);
    CHECK(x.target_ids == y.target_ids);
    CHECK(x.external_ids == y.external_ids);
    for (std::size_t i = 0; i < x.target_mels.size(); ++i) {
      CHECK(x.target_mels[i] == y.target_mels[i]);
      CHECK(x.target_mels[i].rows() == 2 * x.target_features[i].rows());
    }
  }
  // Every target utterance appears once per epoch.
  std::set<std::string> seen;
  for (int s = 0; s < 2; ++s)
    for (const auto &id : a.batch(s).target_ids) seen.insert(id);
  auto third = a.batch(2).target_ids;
  seen.insert(third.front());
  CHECK(seen.size() == 5);
}

TEST_CASE("training is deterministic for a fixed seed") {
  const Corpus corpus = small_corpus();
  Trainer a(small_model(), small_training()), b(small_model(), small_training());
  auto ra = run_training(a, corpus, {});
  auto rb = run_training(b, corpus, {});
  REQUIRE(ra.reports.size() == 6);
  for (std::size_t i = 0; i < ra.reports.size(); ++i) {
    CHECK(ra.reports[i].total_g == rb.reports[i].total_g);
    CHECK(ra.reports[i].total_d == rb.reports[i].total_d);
    CHECK(ra.reports[i].all_finite());
  }
  CHECK(same(snapshot(a.models().generator.parameters()), snapshot(b.models().generator.parameters())));
}

TEST_CASE("resume from a checkpoint reproduces an uninterrupted run") {
  const Corpus corpus = small_corpus();
  auto dir = fresh_dir("resume");
  Trainer full(small_model(), small_training());
  RunOptions o;
  o.output_dir = dir / "full";
  auto rf = run_training(full, corpus, o);
  CHECK(fs::exists(dir / "full/checkpoints/step_00000004.ckpt"));
  CHECK(rf.last_checkpoint == dir / "full/checkpoints/step_00000006.ckpt");

  TrainingConfig short_cfg = small_training();
  short_cfg.steps = 4;
  Trainer first(small_model(), short_cfg);
  RunOptions o1;
  o1.output_dir = dir / "split";
  run_training(first, corpus, o1);

  Trainer second(small_model(), small_training());
  RunOptions o2;
  o2.output_dir = dir / "split";
  o2.resume = dir / "split/checkpoints/step_00000004.ckpt";
  auto rs = run_training(second, corpus, o2);
  REQUIRE(rs.reports.size() == 2);
  CHECK(rs.reports[1].total_g == rf.reports[5].total_g);
  CHECK(same(snapshot(full.models().generator.parameters()), snapshot(second.models().generator.parameters())));
  CHECK(same(snapshot(full.models().discriminator_parameters()),
             snapshot(second.models().discriminator_parameters())));

  // Log lines: 4 + 2 steps plus validation rows.
  std::ifstream log(dir / "split/train_log.jsonl");
  int steps = 0;
  for (std::string line; std::getline(log, line);)
    if (nlohmann::json::parse(line).contains("total_g")) ++steps;
  CHECK(steps == 6);
}

TEST_CASE("steps = 0 writes only the initial checkpoint") {
  TrainingConfig tc = small_training();
  tc.steps = 0;
  Trainer t(small_model(), tc);
  auto dir = fresh_dir("zero");
  RunOptions o;
  o.output_dir = dir;
  auto r = run_training(t, small_corpus(), o);
  CHECK(r.reports.empty());
  std::vector<fs::path> blobs;
  for (const auto &e : fs::directory_iterator(dir / "checkpoints"))
    if (e.path().extension() == ".ckpt") blobs.push_back(e.path());
  REQUIRE(blobs.size() == 1);
  CHECK(blobs[0].filename() == "step_00000000.ckpt");
}

TEST_CASE("checkpoint round trip is bit identical") {
  auto dir = fresh_dir("ckpt");
  Trainer a(small_model(), small_training());
  const Corpus corpus = small_corpus();
  run_training(a, corpus, {});
  a.save(dir / "x.ckpt", 6);
  TrainingConfig other = small_training();
  other.seed = 99;
  Trainer b(small_model(), other);
  CHECK(b.load(dir / "x.ckpt") == 6);
  CHECK(same(snapshot(a.models().generator.parameters()), snapshot(b.models().generator.parameters())));
  CHECK(same(snapshot(a.models().discriminator_parameters()), snapshot(b.models().discriminator_parameters())));
  auto loaded = load_generator(dir / "x.ckpt");
  CHECK(same(snapshot(a.models().generator.parameters()), snapshot(loaded.generator->parameters())));
  CHECK(latest_checkpoint(dir).empty());

  ModelConfig wider = small_model();
  wider.generator.ffn_dim = 48;
  Trainer c(wider, small_training());
  CHECK_THROWS_AS(c.load(dir / "x.ckpt"), ConfigError);

  // Tampered sidecar.
  auto meta = nlohmann::json::parse(std::ifstream(sidecar_path(dir / "x.ckpt")));
  meta["generator"]["ffn_dim"] = 64;
  std::ofstream(sidecar_path(dir / "x.ckpt")) << meta.dump();
  CHECK_THROWS_AS(read_checkpoint_meta(dir / "x.ckpt"), FormatError);
}

TEST_CASE("preflight names every missing input") {
  auto dir = fresh_dir("pre");
  write_matrix(dir / "ok.vctf", MatrixF::Zero(2, 2));
  std::vector<UtteranceRecord> rs(3);
  rs[0].id = "a";
  rs[0].feature_path = dir / "ok.vctf";
  rs[0].mel_path = dir / "gone.vctf";
  rs[1].id = "b";
  rs[2].id = "c";
  rs[2].corpus_tag = CorpusTag::kExternal;
  rs[2].feature_path = dir / "ok.vctf";
  try {
    preflight(rs);
    FAIL("expected PreflightError");
  } catch (const PreflightError &e) {
    const std::string msg = e.what();
    CHECK(msg.find("3 missing") != std::string::npos);
    CHECK(msg.find("gone.vctf") != std::string::npos);
    CHECK(msg.find("b: no feature") != std::string::npos);
    CHECK(msg.find("b: no mel") != std::string::npos);
  }
}

TEST_CASE("a non-finite loss stops training with the batch ids") {
  Corpus corpus = small_corpus();
  for (auto &u : corpus.target) u.mel(0, 0) = std::numeric_limits<float>::quiet_NaN();
  Trainer t(small_model(), small_training());
  auto dir = fresh_dir("nan");
  RunOptions o;
  o.output_dir = dir;
  corpus.validation.clear();
  // The mel-bias init would also be NaN, which is the point: the first step fails.
  try {
    run_training(t, corpus, o);
    FAIL("expected TrainingError");
  } catch (const TrainingError &e) {
    CHECK(std::string(e.what()).find("batch: t") != std::string::npos);
  }
  CHECK(fs::exists(dir / "nonfinite_step_0.json"));
}
