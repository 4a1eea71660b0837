// sslvc/tests/test_discriminators.cpp

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

#include <random>

#include "doctest.h"
#include "gradcheck.hpp"
#include "sslvc/discriminators.hpp"
#include "sslvc/losses.hpp"
#include "sslvc/model.hpp"
#include "sslvc/optim.hpp"

using namespace sslvc;

namespace {

template <typename Scalar>
Matrix<Scalar> gaussian(Eigen::Index r, Eigen::Index c, std::mt19937_64 &rng, double sd = 1.0, double mu = 0.0) {
  std::normal_distribution<double> n(mu, sd);
  Matrix<Scalar> m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<Scalar>(n(rng));
  return m;
}

// Log-mel-like matrix that varies slowly in time and frequency.
MatrixF smooth_mel(Eigen::Index frames, std::mt19937_64 &rng) {
  std::uniform_real_distribution<double> u(0.0, 6.28);
  const double p1 = u(rng), p2 = u(rng);
  MatrixF m(frames, 80);
  for (Eigen::Index t = 0; t < frames; ++t)
    for (Eigen::Index f = 0; f < 80; ++f)
      m(t, f) = static_cast<float>(-5.0 + 2.0 * std::sin(0.05 * t + p1) * std::cos(0.08 * f + p2));
  return m;
}

DiscriminatorConfig small_mel() { return {80, {16, 16}, 5, 2, 0.2}; }

// Trains one discriminator on (positive, negative) sets with the
// expectation-form objective; returns accuracy at threshold 0.5.
double train_and_score(Discriminator<float> &d, const std::vector<MatrixF> &pos, const std::vector<MatrixF> &neg,
                       int steps, double lr) {
  Adam<float> opt(d.parameters(), {lr, 0.8, 0.99, 1e-8});
  for (int s = 0; s < steps; ++s) {
    opt.zero_grad();
    ad::Tape<float> t;
    std::vector<ad::Var<float>> sp, sn;
    for (const auto &x : pos) sp.push_back(d.score(t, t.constant(x)));
    for (const auto &x : neg) sn.push_back(d.score(t, t.constant(x)));
    auto loss = tape_losses::negative_term(sn, GanObjective::kExpectation) +
                tape_losses::positive_term(sp, GanObjective::kExpectation);
    t.backward(loss);
    t.flush_param_grads();
    opt.step();
  }
  int correct = 0;
  for (const auto &x : pos) correct += d.score(x) > 0.5f;
  for (const auto &x : neg) correct += d.score(x) < 0.5f;
  return static_cast<double>(correct) / static_cast<double>(pos.size() + neg.size());
}

}  // namespace

TEST_CASE("scores are probabilities for any length") {
  std::mt19937_64 rng(1);
  Discriminator<float> d("d", default_mel_discriminator(), 1);
  for (Eigen::Index frames : {1, 40, 400}) {
    const float s = d.score(gaussian<float>(frames, 80, rng, 3.0));
    CHECK(s > 0.0f);
    CHECK(s < 1.0f);
  }
  Discriminator<float> e("e", default_embedding_discriminator(32), 2);
  const float s = e.score(gaussian<float>(17, 32, rng));
  CHECK(s > 0.0f);
  CHECK(s < 1.0f);
}

TEST_CASE("fixed seed gives deterministic scores") {
  std::mt19937_64 rng(2);
  MatrixF x = gaussian<float>(50, 80, rng);
  Discriminator<float> a("d", small_mel(), 9), b("d", small_mel(), 9);
  CHECK(a.score(x) == b.score(x));
  CHECK(a.score(x) == a.score(x));
}

TEST_CASE("shape errors") {
  Discriminator<float> d("d", small_mel(), 1);
  CHECK_THROWS_AS(d.score(MatrixF::Zero(10, 79)), ShapeError);
  CHECK_THROWS_AS(d.score(MatrixF(0, 80)), ShapeError);
  DiscriminatorConfig bad = small_mel();
  bad.channels.clear();
  CHECK_THROWS_AS(Discriminator<float>("d", bad, 1), ConfigError);
}

TEST_CASE("kernel-1 embedding discriminator ignores frame order") {
  std::mt19937_64 rng(3);
  Discriminator<double> d("e", {16, {8, 8, 8}, 1, 1, 0.2}, 4);
  MatrixD x = gaussian<double>(30, 16, rng);
  MatrixD reversed = x.colwise().reverse();
  CHECK(std::abs(d.score(x) - d.score(reversed)) < 1e-6);
}

TEST_CASE("parameter count") {
  for (auto cfg : {default_mel_discriminator(), default_embedding_discriminator(256), small_mel()}) {
    Discriminator<float> d("d", cfg, 0);
    long long n = 0;
    for (auto *p : d.parameters()) n += p->size();
    CHECK(n == cfg.parameter_count());
  }
}

TEST_CASE("discriminator gradients match central differences") {
  std::mt19937_64 rng(5);
  Discriminator<double> mel("m", {10, {6, 7}, 5, 2, 0.2}, 6);
  Discriminator<double> emb("e", {8, {5, 5, 5}, 3, 1, 0.2}, 7);
  MatrixD x = gaussian<double>(13, 10, rng);
  MatrixD e = gaussian<double>(9, 8, rng);
  for (auto [d, in] : {std::pair{&mel, &x}, std::pair{&emb, &e}}) {
    auto r = testing::check_gradients(d->parameters(), [&](ad::Tape<double> &t) {
      return d->score(t, t.constant(*in));
    });
    INFO("worst tensor: " << r.worst_name << " " << r.worst);
    CHECK(r.worst < 1e-4);
  }
}

TEST_CASE("real/fake discriminator separates smooth mels from noise") {
  std::mt19937_64 rng(8);
  std::vector<MatrixF> real, fake;
  for (int i = 0; i < 12; ++i) {
    real.push_back(smooth_mel(48, rng));
    fake.push_back(gaussian<float>(48, 80, rng, 2.0, -5.0));
  }
  Discriminator<float> d("d_rf", small_mel(), 9);
  CHECK(train_and_score(d, real, fake, 150, 1e-3) > 0.95);
}

TEST_CASE("conversion discriminator separates conversions from reconstructions with G frozen") {
  std::mt19937_64 rng(10);
  GeneratorConfig gc;
  gc.input_dim = 8;
  gc.hidden_dim = 16;
  gc.encoder_blocks = gc.decoder_blocks = 1;
  gc.ffn_dim = 16;
  gc.conv_kernel = 3;
  Generator<float> g(gc, 11);
  // Two speakers: shared content distribution, speaker-specific channel offset.
  RowVector<float> offset = gaussian<float>(1, 8, rng, 2.0);
  std::vector<MatrixF> recon, converted;
  for (int i = 0; i < 10; ++i) {
    recon.push_back(g.convert(gaussian<float>(24, 8, rng)));
    MatrixF ext = gaussian<float>(24, 8, rng);
    ext.rowwise() += offset;
    ext.col(0) *= 3.0f;
    converted.push_back(g.convert(ext));
  }
  Discriminator<float> d("d_cvt", small_mel(), 12);
  CHECK(train_and_score(d, recon, converted, 150, 1e-3) > 0.5);
}

TEST_CASE("embedding discriminator detects a channel bias and loses it under adversarial updates") {
  std::mt19937_64 rng(13);
  const int dim = 8;
  // Stand-in encoder output: a learnable per-channel shift applied to
  // external embeddings only.
  ad::Parameter<float> shift("shift", MatrixF::Zero(1, dim));
  std::vector<MatrixF> internal, external;
  for (int i = 0; i < 16; ++i) {
    internal.push_back(gaussian<float>(20, dim, rng));
    MatrixF x = gaussian<float>(20, dim, rng);
    x.array() += 1.0f;
    external.push_back(x);
  }
  Discriminator<float> d("d_e", {dim, {16, 16}, 3, 1, 0.2}, 14);
  auto accuracy = [&]() {
    int correct = 0;
    for (const auto &x : internal) correct += d.score(x) > 0.5f;
    for (const auto &x : external) correct += d.score(MatrixF(x.rowwise() + shift.value.row(0))) < 0.5f;
    return correct / 32.0;
  };
  CHECK(train_and_score(d, internal, external, 200, 2e-3) > 0.95);

  Adam<float> opt_d(d.parameters(), {1e-3, 0.8, 0.99, 1e-8});
  Adam<float> opt_g({&shift}, {2e-2, 0.8, 0.99, 1e-8});
  for (int step = 0; step < 300; ++step) {
    {
      opt_d.zero_grad();
      ad::Tape<float> t;
      std::vector<ad::Var<float>> si, se;
      for (const auto &x : internal) si.push_back(d.score(t, t.constant(x)));
      for (const auto &x : external) se.push_back(d.score(t, t.constant(MatrixF(x.rowwise() + shift.value.row(0)))));
      t.backward(tape_losses::loss_e(se, si, GanObjective::kExpectation).d);
      t.flush_param_grads();
      opt_d.step();
    }
    {
      opt_g.zero_grad();
      ad::Tape<float> t;
      t.freeze(d.parameters());
      auto sh = t.param(shift);
      std::vector<ad::Var<float>> se;
      for (const auto &x : external) {
        auto xv = t.constant(x);
        se.push_back(d.score(t, ad::add_row(xv, sh)));
      }
      t.backward(tape_losses::positive_term(se, GanObjective::kExpectation));
      t.flush_param_grads();
      opt_g.step();
    }
  }
  CHECK(accuracy() < 0.65);
}
