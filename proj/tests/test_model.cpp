// sslvc/tests/test_model.cpp

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
#include "sslvc/model.hpp"

using namespace sslvc;

namespace {

GeneratorConfig small_config() {
  GeneratorConfig c;
  c.input_dim = 12;
  c.hidden_dim = 16;
  c.encoder_blocks = 1;
  c.decoder_blocks = 1;
  c.attention_heads = 2;
  c.conv_kernel = 3;
  c.ffn_dim = 24;
  c.n_mels = 80;
  c.dropout = 0.1;
  return c;
}

template <typename Scalar>
Matrix<Scalar> random_features(Eigen::Index t, Eigen::Index d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix<Scalar> m(t, d);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<Scalar>(n(rng));
  return m;
}

long long counted(ad::ParameterList<float> ps) {
  long long n = 0;
  for (auto *p : ps) n += p->size();
  return n;
}

}  // namespace

TEST_CASE("encode and decode shapes") {
  auto cfg = small_config();
  Generator<float> g(cfg, 1);
  CHECK(g.encode(random_features<float>(37, 12, 2)).rows() == 37);
  CHECK(g.encode(random_features<float>(37, 12, 2)).cols() == 16);
  CHECK(g.decode(random_features<float>(37, 16, 3)).rows() == 74);
  CHECK(g.decode(random_features<float>(37, 16, 3)).cols() == 80);
  CHECK(g.decode(random_features<float>(1, 16, 3)).rows() == 2);
  CHECK(g.decode(random_features<float>(20, 16, 4)).rows() == 2 * g.decode(random_features<float>(10, 16, 4)).rows());

  cfg.upsample_factor = 3;
  Generator<float> g3(cfg, 1);
  CHECK(g3.convert(random_features<float>(11, 12, 5)).rows() == 33);
}

TEST_CASE("dimension mismatches raise shape errors") {
  Generator<float> g(small_config(), 1);
  CHECK_THROWS_AS(g.encode(random_features<float>(10, 13, 1)), ShapeError);
  CHECK_THROWS_AS(g.decode(random_features<float>(10, 15, 1)), ShapeError);
  CHECK_THROWS_AS(g.encode(MatrixF(0, 12)), ShapeError);
}

TEST_CASE("config validation") {
  auto c = small_config();
  c.attention_heads = 3;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small_config();
  c.upsample_factor = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small_config();
  c.conv_kernel = 4;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  nlohmann::json j = small_config();
  CHECK(j.get<GeneratorConfig>().ffn_dim == 24);
}

TEST_CASE("parameter count formula matches the built model") {
  for (auto cfg : {small_config(), GeneratorConfig{}}) {
    Generator<float> g(cfg, 0);
    CHECK(counted(g.parameters()) == cfg.parameter_count());
  }
  // Defaults by hand: prenet 65792, 8 blocks of 2886912, upsampler 262400,
  // projection 20560.
  CHECK(GeneratorConfig{}.parameter_count() == 23'444'048LL);
}

TEST_CASE("embedding statistics after instance normalization") {
  Generator<float> g(small_config(), 7);
  MatrixD e = g.encode(random_features<float>(128, 12, 8)).cast<double>();
  for (Eigen::Index c = 0; c < e.cols(); ++c) {
    const double mean = e.col(c).mean();
    const double var = (e.col(c).array() - mean).square().mean();
    CHECK(std::abs(mean) < 1e-3);
    CHECK(std::abs(var - 1.0) < 1e-2);
  }
}

TEST_CASE("constant input channel and channel bias invariance") {
  Generator<double> g(small_config(), 3);
  ad::Tape<double> t;
  auto pre = g.encode_pre_norm(t, t.constant(random_features<double>(64, 12, 4)), {});
  MatrixD bias = random_features<double>(1, 16, 5) * 10.0;
  MatrixD shifted = pre.value().rowwise() + bias.row(0);
  MatrixD a = g.normalize(pre).value();
  MatrixD b = g.normalize(t.constant(shifted)).value();
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-5);

  MatrixD constant_channel = pre.value();
  constant_channel.col(3).setConstant(2.5);
  CHECK(g.normalize(t.constant(constant_channel)).value().col(3).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("eval mode is deterministic, training dropout is seeded") {
  Generator<float> g(small_config(), 11);
  auto x = random_features<float>(20, 12, 12);
  MatrixF a = g.convert(x), b = g.convert(x);
  CHECK(a == b);

  auto run = [&](std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    ad::Tape<float> t;
    return MatrixF(g.forward(t, t.constant(x), {true, 0.1f, &rng}).mel.value());
  };
  CHECK(run(1) == run(1));
  CHECK(run(1) != run(2));
  CHECK(run(1) != a);
}

TEST_CASE("full attention lets one frame reach every output frame") {
  Generator<double> g(small_config(), 13);
  MatrixD x = random_features<double>(24, 12, 14);
  MatrixD base = g.convert(x);
  x.row(0).array() += 1.0;
  MatrixD moved = g.convert(x);
  for (Eigen::Index r = 0; r < base.rows(); ++r) CHECK((moved.row(r) - base.row(r)).norm() > 0.0);
}

TEST_CASE("generator gradients match central differences") {
  auto cfg = small_config();
  cfg.input_dim = 6;
  cfg.ffn_dim = 8;
  cfg.n_mels = 5;
  Generator<double> g(cfg, 21);
  MatrixD x = random_features<double>(8, 6, 22);
  auto r = testing::check_gradients(g.parameters(), [&](ad::Tape<double> &t) {
    auto out = g.forward(t, t.constant(x), {});
    return ad::mean(ad::square(out.mel));
  });
  INFO("worst tensor: " << r.worst_name << " " << r.worst);
  CHECK(r.worst < 1e-4);
  CHECK(r.tensors == static_cast<int>(g.parameters().size()));
}
