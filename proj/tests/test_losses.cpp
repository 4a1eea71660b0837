// sslvc/tests/test_losses.cpp

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
#include <vector>

#include "doctest.h"
#include "sslvc/losses.hpp"
#include "sslvc/objective.hpp"

using namespace sslvc;
using V = std::vector<double>;

TEST_CASE("hand-evaluated adversarial terms") {
  auto rf = loss_rf(V{0.3}, V{0.8});
  CHECK(rf.d_term == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(rf.g_term == doctest::Approx(0.7).epsilon(1e-12));
  auto half = loss_rf(V{0.5}, V{0.5});
  CHECK(half.d_term == 1.0);
  CHECK(half.g_term == 0.5);

  auto cvt = loss_cvt(V{0.6}, V{0.7}, V{0.9});
  CHECK(std::abs(cvt.d_term - 1.0) < 1e-9);
  CHECK(std::abs(cvt.g_term - 0.4) < 1e-9);
  CHECK(loss_cvt(V{0.6}, V{0.1}, V{0.9}).g_term == cvt.g_term);

  auto e = loss_e(V{0.2}, V{0.9});
  CHECK(std::abs(e.d_term - 0.3) < 1e-9);
  CHECK(std::abs(e.g_term - 0.8) < 1e-9);
  CHECK(loss_e(V{0.5, 0.5}, V{0.5}).d_term == 1.0);
}

TEST_CASE("perfect discriminators drive the d terms to zero") {
  const double tiny = 1e-12;
  CHECK(loss_rf(V{tiny}, V{1 - tiny}).d_term < 1e-11);
  CHECK(loss_cvt(V{tiny}, V{1 - tiny}, V{1 - tiny}).d_term < 1e-11);
  CHECK(loss_e(V{tiny}, V{1 - tiny}).d_term < 1e-11);
}

TEST_CASE("scores outside (0, 1) are domain errors") {
  CHECK_THROWS_AS(loss_rf(V{0.0}, V{0.5}), DomainError);
  CHECK_THROWS_AS(loss_rf(V{0.5}, V{1.0}), DomainError);
  CHECK_THROWS_AS(loss_cvt(V{1.2}, V{0.5}, V{0.5}), DomainError);
  CHECK_THROWS_AS(loss_e(V{0.5}, V{std::nan("")}), DomainError);
  CHECK_THROWS_AS(loss_e(V{}, V{0.5}), ShapeError);
}

TEST_CASE("reconstruction loss") {
  MatrixF a = MatrixF::Random(20, 80);
  CHECK(loss_rec(a, a) == 0.0);
  MatrixF b = (a.array() + 0.5f).matrix();
  CHECK(loss_rec(b, a) == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(loss_rec(a, b) == loss_rec(b, a));
  CHECK_THROWS_AS(loss_rec(a, MatrixF::Zero(21, 80)), ShapeError);
}

TEST_CASE("assemble") {
  AdversarialTerms rf{0.7, 0.5}, cvt{0.4, 1.0}, e{0.8, 0.3};
  auto r = assemble(0.5, rf, cvt, e, 1.0);
  CHECK(r.l_sim_g == doctest::Approx(1.2).epsilon(1e-12));
  CHECK(r.total_g == doctest::Approx(2.4).epsilon(1e-12));
  CHECK(r.l_sim_d == doctest::Approx(1.3).epsilon(1e-12));
  CHECK(r.total_d == doctest::Approx(1.8).epsilon(1e-12));
  auto warm = assemble(0.5, rf, cvt, e, 0.0);
  CHECK(warm.total_g == 0.7 + 0.5);
  CHECK(warm.total_d == 0.5);
  nlohmann::json j = r;
  CHECK(j.get<LossReport>().total_g == r.total_g);
  CHECK(r.all_finite());
}

TEST_CASE("generator term plus mean fake-side score is one") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(1e-6, 1 - 1e-6);
  std::uniform_int_distribution<int> n(1, 16);
  for (int trial = 0; trial < 1000; ++trial) {
    V a(n(rng)), b(n(rng)), c(n(rng));
    for (auto *v : {&a, &b, &c})
      for (auto &x : *v) x = u(rng);
    double mean_a = 0;
    for (double x : a) mean_a += x;
    mean_a /= static_cast<double>(a.size());
    CHECK(std::abs(loss_rf(a, b).g_term + mean_a - 1.0) < 1e-12);
    CHECK(std::abs(loss_cvt(a, b, c).g_term + mean_a - 1.0) < 1e-12);
    CHECK(std::abs(loss_e(a, b).g_term + mean_a - 1.0) < 1e-12);
  }
}

TEST_CASE("least-squares variant") {
  auto rf = loss_rf(V{0.3}, V{0.8}, GanObjective::kLeastSquares);
  CHECK(rf.d_term == doctest::Approx(0.09 + 0.04).epsilon(1e-12));
  CHECK(rf.g_term == doctest::Approx(0.49).epsilon(1e-12));
  CHECK(parse_gan_objective("least_squares") == GanObjective::kLeastSquares);
  CHECK_THROWS_AS(parse_gan_objective("hinge"), ConfigError);
}

TEST_CASE("log-likelihood variant") {
  auto rf = loss_rf(V{0.3}, V{0.8}, GanObjective::kLogLikelihood);
  CHECK(rf.d_term == doctest::Approx(-std::log(0.7) - std::log(0.8)).epsilon(1e-12));
  CHECK(rf.g_term == doctest::Approx(-std::log(0.3)).epsilon(1e-12));
  CHECK(parse_gan_objective(to_string(GanObjective::kLogLikelihood)) == GanObjective::kLogLikelihood);
}

TEST_CASE("tape losses agree with the value versions and have exact score gradients") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  for (auto objective : {GanObjective::kExpectation, GanObjective::kLeastSquares, GanObjective::kLogLikelihood}) {
    V conv{u(rng), u(rng), u(rng)}, fake{u(rng), u(rng)}, real{u(rng), u(rng), u(rng), u(rng)};
    ad::Tape<double> t;
    auto leaves = [&t](const V &v) {
      std::vector<ad::Var<double>> out;
      for (double x : v) out.push_back(t.leaf(MatrixD::Constant(1, 1, x)));
      return out;
    };
    auto lc = leaves(conv), lf = leaves(fake), lr = leaves(real);
    auto terms = tape_losses::loss_cvt(lc, lf, lr, objective);
    auto value = loss_cvt(conv, fake, real, objective);
    CHECK(std::abs(terms.g.scalar() - value.g_term) < 1e-12);
    CHECK(std::abs(terms.d.scalar() - value.d_term) < 1e-12);

    t.backward(terms.d);
    const double h = 1e-6;
    for (std::size_t i = 0; i < conv.size(); ++i) {
      V up = conv, down = conv;
      up[i] += h;
      down[i] -= h;
      const double numeric =
          (loss_cvt(up, fake, real, objective).d_term - loss_cvt(down, fake, real, objective).d_term) / (2 * h);
      const double analytic = t.grad(lc[i])(0, 0);
      CHECK(std::abs(analytic - numeric) <= 1e-6 * std::max(1.0, std::abs(numeric)));
    }
    for (std::size_t i = 0; i < real.size(); ++i) {
      V up = real, down = real;
      up[i] += h;
      down[i] -= h;
      const double numeric =
          (loss_cvt(conv, fake, up, objective).d_term - loss_cvt(conv, fake, down, objective).d_term) / (2 * h);
      CHECK(std::abs(t.grad(lr[i])(0, 0) - numeric) <= 1e-6 * std::max(1.0, std::abs(numeric)));
    }
  }
}

TEST_CASE("gradient routing through the generator") {
  ModelConfig mc;
  mc.generator.input_dim = 6;
  mc.generator.hidden_dim = 8;
  mc.generator.encoder_blocks = mc.generator.decoder_blocks = 1;
  mc.generator.ffn_dim = 8;
  mc.generator.conv_kernel = 3;
  mc.generator.n_mels = 10;
  mc.mel_discriminator = {10, {6, 6}, 5, 2, 0.2};
  mc.embedding_discriminator = {8, {6}, 3, 1, 0.2};
  Models<double> m(mc, 5);
  std::mt19937_64 rng(6);
  std::normal_distribution<double> n(0.0, 1.0);
  auto random = [&](Eigen::Index r, Eigen::Index c) {
    MatrixD x(r, c);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = n(rng);
    return x;
  };
  std::vector<MatrixD> tf{random(8, 6), random(7, 6)}, tm{random(16, 10), random(14, 10)}, ef{random(9, 6)};

  auto grads_of = [&](auto pick) {
    for (auto *p : m.generator.parameters()) p->zero_grad();
    for (auto *p : m.discriminator_parameters()) p->zero_grad();
    ad::Tape<double> t;
    t.freeze(m.discriminator_parameters());
    auto b = run_generator(t, m.generator, tf, tm, ef, {});
    auto o = generator_objective(t, m, b, 1.0, GanObjective::kExpectation);
    t.backward(pick(o));
    t.flush_param_grads();
  };
  auto total_norm = [](const ad::ParameterList<double> &ps) {
    double s = 0;
    for (auto *p : ps) s += p->grad.squaredNorm();
    return s;
  };

  grads_of([](const Objective<double> &o) { return o.e.g; });
  CHECK(total_norm(m.generator.encoder_parameters()) > 0.0);
  CHECK(total_norm(m.generator.decoder_parameters()) == 0.0);
  CHECK(total_norm(m.discriminator_parameters()) == 0.0);

  for (int which = 0; which < 2; ++which) {
    grads_of([which](const Objective<double> &o) { return which == 0 ? o.cvt.g : o.rf.g; });
    CHECK(total_norm(m.generator.encoder_parameters()) > 0.0);
    CHECK(total_norm(m.generator.decoder_parameters()) > 0.0);
  }

  // Discriminator side on a detached graph: no generator gradient at all.
  for (auto *p : m.generator.parameters()) p->zero_grad();
  ad::Tape<double> g_tape, d_tape;
  auto b = run_generator(g_tape, m.generator, tf, tm, ef, {});
  auto detached = detach(d_tape, b);
  auto o = discriminator_objective(d_tape, m, detached, 1.0, GanObjective::kExpectation);
  d_tape.backward(o.total);
  d_tape.flush_param_grads();
  CHECK(total_norm(m.generator.parameters()) == 0.0);
  CHECK(total_norm(m.discriminator_parameters()) > 0.0);
}
