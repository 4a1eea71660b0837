// sslvc/tests/test_eval.cpp

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

#include <cmath>
#include <numbers>
#include <random>

#include "sslvc/eval.hpp"
#include "sslvc/synth.hpp"
#include "sslvc/tensor_io.hpp"

using namespace sslvc;
namespace fs = std::filesystem;

namespace {

Waveform voice(std::uint64_t seed, const VoiceProfile &v = fixture_target_voice(), double seconds = 1.0) {
  std::mt19937_64 rng(seed);
  Waveform w;
  w.samples = synthesize_voice(random_phones(rng, seconds), v);
  return w;
}

MatrixD gaussian(Eigen::Index n, Eigen::Index d, double sd, std::mt19937_64 &rng) {
  std::normal_distribution<double> g(0.0, sd);
  MatrixD m(n, d);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  return m;
}

ProsodyTrack track(std::vector<float> f0, std::vector<float> energy) {
  ProsodyTrack t;
  t.f0_hz = Eigen::Map<Eigen::VectorXf>(f0.data(), static_cast<Eigen::Index>(f0.size()));
  t.energy = Eigen::Map<Eigen::VectorXf>(energy.data(), static_cast<Eigen::Index>(energy.size()));
  for (float f : f0) t.voiced.push_back(f > 0);
  return t;
}

}  // namespace

TEST_CASE("mcd of identical input is zero") {
  auto w = voice(1);
  CHECK(mcd(w, w) == 0.0);
}

TEST_CASE("mcd single-coefficient difference is 10/ln10*sqrt(2)") {
  MatrixD a = MatrixD::Zero(20, 13), b = a;
  // Far-apart frames keep the warping path on the diagonal.
  for (Eigen::Index i = 0; i < 20; ++i) a(i, 5) = b(i, 5) = 100.0 * static_cast<double>(i);
  b.col(2).array() += 1.0;
  CHECK(mcd_cepstra(a, b) == doctest::Approx(10.0 / std::log(10.0) * std::sqrt(2.0)).epsilon(1e-12));
  CHECK(std::abs(mcd_cepstra(a, b) - 6.142) < 1e-3);
}

TEST_CASE("mcd is symmetric, non-negative and rejects short input") {
  auto a = voice(2), b = voice(3, fixture_external_voices().at(0));
  const double ab = mcd(a, b), ba = mcd(b, a);
  CHECK(ab > 0.0);
  CHECK(ab == doctest::Approx(ba).epsilon(1e-9));
  Waveform tiny;
  tiny.samples.assign(500, 0.1f);
  CHECK_THROWS_AS(mcd(tiny, a), InputError);
}

TEST_CASE("dtw aligns a time-stretched copy") {
  MatrixD a(4, 1), b(6, 1);
  a << 0, 1, 2, 3;
  b << 0, 0, 1, 2, 3, 3;
  auto path = dtw_path(a, b);
  CHECK(path.front() == std::make_pair<Eigen::Index, Eigen::Index>(0, 0));
  CHECK(path.back() == std::make_pair<Eigen::Index, Eigen::Index>(3, 5));
  CHECK(mcd_cepstra(a, b) == 0.0);
}

TEST_CASE("mel cepstrum is the orthonormal DCT without c0") {
  MatrixF flat = MatrixF::Constant(3, 80, 2.5f);
  CHECK(mel_cepstrum(flat).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(mel_cepstrum(flat).cols() == 13);
}

TEST_CASE("prosody rmse: identical and affine-related tracks give zero") {
  auto a = track({100, 200}, {1, 3});
  auto b = track({150, 250}, {2, 6});
  auto r = prosody_rmse(a, a);
  REQUIRE(r.f0_rmse);
  CHECK(*r.f0_rmse == 0.0);
  CHECK(r.energy_rmse == 0.0);
  r = prosody_rmse(a, b);
  CHECK(std::abs(*r.f0_rmse) < 1e-9);
  CHECK(std::abs(r.energy_rmse) < 1e-9);
}

TEST_CASE("prosody rmse uses mutually voiced frames and truncates") {
  auto a = track({100, 0, 200, 300, 150}, {1, 2, 3, 4, 5});
  auto b = track({100, 180, 0, 300}, {1, 2, 3, 4});
  auto r = prosody_rmse(a, b);
  // a voiced {100,200,300} -> {0,.5,1}; b voiced {100,180,300} -> {0,.4,1};
  // frames voiced in both: 0 and 3, both equal.
  CHECK(*r.f0_rmse == doctest::Approx(0.0));
  CHECK(r.energy_rmse == doctest::Approx(0.0));
  auto c = track({0, 0}, {2, 2});
  auto rc = prosody_rmse(c, c);
  CHECK_FALSE(rc.f0_rmse);
  CHECK(rc.warnings.size() >= 2);
  CHECK(rc.energy_rmse == 0.0);
}

TEST_CASE("prosody rmse is bounded by one") {
  auto a = track({100, 200, 300}, {0, 1, 2});
  auto b = track({300, 200, 100}, {2, 1, 0});
  auto r = prosody_rmse(a, b);
  CHECK(*r.f0_rmse <= 1.0);
  CHECK(r.energy_rmse <= 1.0);
  CHECK(r.energy_rmse == doctest::Approx(std::sqrt(2.0 / 3.0)));
}

TEST_CASE("cosine similarity") {
  Eigen::VectorXd a(3), b(3);
  a << 1, 2, 3;
  b << -2, 1, 0;
  CHECK(cosine_similarity(a, a) == doctest::Approx(1.0));
  CHECK(cosine_similarity(a, b) == doctest::Approx(0.0));
  CHECK(cosine_similarity(3.0 * a, b + a) == doctest::Approx(cosine_similarity(a, b + a)));
  CHECK_THROWS_AS(cosine_similarity(a, Eigen::VectorXd::Zero(3)), DomainError);
  auto w = voice(4);
  auto e = fallback_embedding(extract_mel(w).frames);
  CHECK(e.size() == 160);
  CHECK(cosine_similarity(e, e) == doctest::Approx(1.0));
}

TEST_CASE("external speaker embedder failure is an EvalError") {
  auto dir = fs::temp_directory_path() / "sslvc_test_eval_emb";
  fs::create_directories(dir);
  write_wav(dir / "a.wav", voice(5));
  SpeakerEmbedderSpec spec;
  spec.kind = EmbedderKind::kExternalCommand;
  spec.command_template = "exit 1; {input_wav} {output_tensor}";
  CHECK_THROWS_AS(speaker_embedding(spec, dir / "a.wav"), EvalError);
  write_matrix(dir / "v.vctf", MatrixF::Constant(1, 4, 1.0f));
  spec.command_template = "cp '" + (dir / "v.vctf").string() + "' {output_tensor} # {input_wav}";
  CHECK(speaker_embedding(spec, dir / "a.wav").size() == 4);
  spec.dim = 5;
  CHECK_THROWS_AS(speaker_embedding(spec, dir / "a.wav"), EvalError);
}

TEST_CASE("t-SNE keeps two separated clusters apart") {
  std::mt19937_64 rng(7);
  MatrixD x(100, 10);
  x.topRows(50) = gaussian(50, 10, 1.0, rng);
  x.bottomRows(50) = gaussian(50, 10, 1.0, rng);
  x.bottomRows(50).col(0).array() += 10.0;
  TsneConfig cfg;
  cfg.seed = 3;
  MatrixD y = tsne(x, cfg);
  CHECK(y.rows() == 100);
  CHECK(silhouette(y, kmeans(y, 2, 1)) > 0.5);
  // Seeded: identical output on rerun.
  CHECK(tsne(x, cfg) == y);
}

TEST_CASE("t-SNE perplexity precondition") {
  std::mt19937_64 rng(8);
  MatrixD x = gaussian(100, 4, 1.0, rng);
  TsneConfig cfg;
  cfg.iterations = 10;
  cfg.perplexity = 30;
  CHECK_NOTHROW(tsne(x, cfg));
  cfg.perplexity = 40;
  CHECK_THROWS_AS(tsne(x, cfg), ParameterError);
}

TEST_CASE("silhouette of well separated labels is near one") {
  MatrixD x(4, 1);
  x << 0, 0.1, 10, 10.1;
  CHECK(silhouette(x, {0, 0, 1, 1}) > 0.95);
  CHECK(silhouette(x, {0, 1, 0, 1}) < 0.0);
  CHECK_THROWS_AS(silhouette(x, {0, 0, 0, 0}), ParameterError);
}

TEST_CASE("speaker probe: separable, shuffled and single-speaker data") {
  std::mt19937_64 rng(9);
  ProbeSet sep, shuffled;
  std::vector<int> labels;
  for (int u = 0; u < 30; ++u) {
    const int spk = u % 3;
    MatrixD f = gaussian(10, 6, 0.1, rng);
    f.col(spk).array() += 1.0;
    sep.append(f, spk, u);
  }
  CHECK(speaker_probe(sep).accuracy > 0.95);

  std::uniform_int_distribution<int> pick(0, 2);
  ProbeSet noise;
  double mean_acc = 0.0;
  for (int rep = 0; rep < 5; ++rep) {
    ProbeSet s = sep;
    for (auto &l : s.speakers) l = pick(rng);
    for (std::size_t i = 0; i < s.groups.size(); ++i) s.groups[i] = static_cast<int>(i / 5);
    ProbeConfig c;
    c.seed = static_cast<std::uint64_t>(rep);
    mean_acc += speaker_probe(s, c).accuracy / 5.0;
  }
  CHECK(std::abs(mean_acc - 1.0 / 3.0) < 0.1);

  ProbeSet one;
  one.append(gaussian(5, 2, 1.0, rng), 0, 0);
  one.append(gaussian(5, 2, 1.0, rng), 0, 1);
  CHECK_THROWS_AS(speaker_probe(one), ParameterError);
}

TEST_CASE("t-SNE probe preconditions and subsample") {
  std::mt19937_64 rng(10);
  ProbeSet s;
  for (int u = 0; u < 6; ++u) s.append(gaussian(20, 3, 1.0, rng), u % 2, u);
  auto sub = subsample(s, 5);
  CHECK(sub.points.rows() == 30);
  CHECK(sub.groups.size() == 30);
  CHECK_THROWS_AS(tsne_probe(sub, {10.0, 20}), ParameterError);
  ProbeSet single;
  single.append(gaussian(60, 3, 1.0, rng), 0, 0);
  CHECK_THROWS_AS(tsne_probe(single), ParameterError);
}

TEST_CASE("evaluate_pairs aggregates and rejects empty input") {
  auto dir = fs::temp_directory_path() / "sslvc_test_eval_pairs";
  fs::create_directories(dir);
  write_wav(dir / "s.wav", voice(11, fixture_external_voices().at(0)));
  write_wav(dir / "c.wav", voice(11));
  write_wav(dir / "r.wav", voice(11));
  write_wav(dir / "t.wav", voice(12));
  CHECK_THROWS_AS(evaluate_pairs({}, {dir / "t.wav"}, {}), ParameterError);
  auto rep = evaluate_pairs({{dir / "c.wav", dir / "s.wav", dir / "r.wav"}, {dir / "c.wav", dir / "s.wav", {}}},
                            {dir / "t.wav"}, {});
  CHECK(rep.n_pairs == 2);
  CHECK(rep.n_mcd_pairs == 1);
  REQUIRE(rep.mcd_db);
  CHECK(*rep.mcd_db == doctest::Approx(0.0));
  CHECK(rep.cos_sim > 0.9);
  CHECK(rep.f0_rmse >= 0.0);
  CHECK(rep.f0_rmse <= 1.0);
  nlohmann::json j = rep;
  CHECK(j.contains("mcd_db"));
  CHECK(rep.table().find("COS-SIM") != std::string::npos);
}

TEST_CASE("correlation summary") {
  MatrixD e(4, 3);
  e << 1, 1, -1,  //
      -1, -1, 1,  //
      1, -1, 1,   //
      -1, 1, -1;
  const MatrixD s = correlation_summary(e);
  REQUIRE(s.cols() == 3);
  // (0,1): 1+1-1-1, (0,2): -1-1+1+1, (1,2): -1-1-1-1
  CHECK(s(0, 0) == doctest::Approx(0.0));
  CHECK(s(0, 1) == doctest::Approx(0.0));
  CHECK(s(0, 2) == doctest::Approx(-1.0));
  CHECK_THROWS_AS(correlation_summary(MatrixD(3, 1)), ShapeError);
}
