// sslvc/objective.hpp

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

#ifndef SSLVC_OBJECTIVE_HPP
#define SSLVC_OBJECTIVE_HPP

// The generator and three discriminators, and the recorded objectives
// total_g / total_d over one batch. Shared by the trainer (float) and the
// gradient checks (double).

#include <cstdint>
#include <vector>

#include <nlohmann/json.hpp>

#include "sslvc/discriminators.hpp"
#include "sslvc/losses.hpp"
#include "sslvc/model.hpp"

namespace sslvc {

struct ModelConfig {
  GeneratorConfig generator;
  DiscriminatorConfig mel_discriminator = default_mel_discriminator();
  DiscriminatorConfig embedding_discriminator = default_embedding_discriminator();

  void validate() const;
};

void to_json(nlohmann::json &j, const ModelConfig &c);
void from_json(const nlohmann::json &j, ModelConfig &c);

template <typename Scalar>
struct Models {
  Generator<Scalar> generator;
  Discriminator<Scalar> d_real_fake;   // positives y^g, negatives y^f
  Discriminator<Scalar> d_conversion;  // positives y^g and y^f, negatives y^c
  Discriminator<Scalar> d_embedding;   // positives e^i, negatives e^o

  Models(const ModelConfig &c, std::uint64_t seed)
      : generator(c.generator, seed),
        d_real_fake("d_rf", c.mel_discriminator, seed + 1),
        d_conversion("d_cvt", c.mel_discriminator, seed + 2),
        d_embedding("d_e", c.embedding_discriminator, seed + 3) {
    c.validate();
  }

  ad::ParameterList<Scalar> discriminator_parameters() {
    ad::ParameterList<Scalar> out;
    for (auto *d : {&d_real_fake, &d_conversion, &d_embedding}) {
      auto p = d->parameters();
      out.insert(out.end(), p.begin(), p.end());
    }
    return out;
  }
};

// Recorded quantities of one batch. All vectors are per utterance.
template <typename Scalar>
struct BatchGraph {
  std::vector<ad::Var<Scalar>> y_g;  // ground-truth target mels
  std::vector<ad::Var<Scalar>> y_f;  // reconstructions of target features
  std::vector<ad::Var<Scalar>> e_i;  // target embeddings
  std::vector<ad::Var<Scalar>> y_c;  // conversions of external features
  std::vector<ad::Var<Scalar>> e_o;  // external embeddings
};

template <typename Scalar>
struct Objective {
  ad::Var<Scalar> total;
  ad::Var<Scalar> l_rec;                       // generator side only
  tape_losses::Terms<Scalar> rf, cvt, e;       // only the side's terms are set
};

// Runs G over the batch on tape t.
template <typename Scalar>
BatchGraph<Scalar> run_generator(ad::Tape<Scalar> &t, Generator<Scalar> &g,
                                 const std::vector<Matrix<Scalar>> &target_features,
                                 const std::vector<Matrix<Scalar>> &target_mels,
                                 const std::vector<Matrix<Scalar>> &external_features,
                                 const ForwardContext<Scalar> &ctx) {
  if (target_features.size() != target_mels.size()) throw ShapeError("batch: feature/mel counts differ");
  BatchGraph<Scalar> out;
  for (std::size_t i = 0; i < target_features.size(); ++i) {
    auto r = g.forward(t, t.constant(target_features[i]), ctx);
    out.y_f.push_back(r.mel);
    out.e_i.push_back(r.embedding);
    out.y_g.push_back(t.constant(target_mels[i]));
  }
  for (const auto &f : external_features) {
    auto r = g.forward(t, t.constant(f), ctx);
    out.y_c.push_back(r.mel);
    out.e_o.push_back(r.embedding);
  }
  return out;
}

// Copies every generated quantity onto tape t as a constant (detached).
template <typename Scalar>
BatchGraph<Scalar> detach(ad::Tape<Scalar> &t, const BatchGraph<Scalar> &g) {
  auto copy = [&t](const std::vector<ad::Var<Scalar>> &in) {
    std::vector<ad::Var<Scalar>> out;
    for (const auto &v : in) out.push_back(t.constant(v.value()));
    return out;
  };
  return {copy(g.y_g), copy(g.y_f), copy(g.e_i), copy(g.y_c), copy(g.e_o)};
}

// total_g = lambda * (l_e_g + l_cvt_g) + l_rf_g + l_rec
template <typename Scalar>
Objective<Scalar> generator_objective(ad::Tape<Scalar> &t, Models<Scalar> &m, const BatchGraph<Scalar> &b,
                                      Scalar lambda_sim, GanObjective objective) {
  std::vector<ad::Var<Scalar>> s_fake, s_conv, s_ext, recs;
  for (const auto &y : b.y_f) s_fake.push_back(m.d_real_fake.score(t, y));
  for (const auto &y : b.y_c) s_conv.push_back(m.d_conversion.score(t, y));
  for (const auto &e : b.e_o) s_ext.push_back(m.d_embedding.score(t, e));
  for (std::size_t i = 0; i < b.y_f.size(); ++i) recs.push_back(tape_losses::loss_rec(b.y_f[i], b.y_g[i]));
  Objective<Scalar> o;
  o.l_rec = ad::mean_of(recs);
  o.rf.g = tape_losses::positive_term(s_fake, objective);
  o.cvt.g = tape_losses::positive_term(s_conv, objective);
  o.e.g = tape_losses::positive_term(s_ext, objective);
  tape_losses::check_scores(s_fake, "loss_rf");
  tape_losses::check_scores(s_conv, "loss_cvt");
  tape_losses::check_scores(s_ext, "loss_e");
  o.total = ad::affine(o.e.g + o.cvt.g, lambda_sim, Scalar(0)) + o.rf.g + o.l_rec;
  return o;
}

// total_d = lambda * (l_e_d + l_cvt_d) + l_rf_d; pass a detached graph.
template <typename Scalar>
Objective<Scalar> discriminator_objective(ad::Tape<Scalar> &t, Models<Scalar> &m, const BatchGraph<Scalar> &b,
                                          Scalar lambda_sim, GanObjective objective) {
  std::vector<ad::Var<Scalar>> rf_fake, rf_real, cvt_conv, cvt_fake, cvt_real, e_ext, e_int;
  for (const auto &y : b.y_f) rf_fake.push_back(m.d_real_fake.score(t, y));
  for (const auto &y : b.y_g) rf_real.push_back(m.d_real_fake.score(t, y));
  for (const auto &y : b.y_c) cvt_conv.push_back(m.d_conversion.score(t, y));
  for (const auto &y : b.y_f) cvt_fake.push_back(m.d_conversion.score(t, y));
  for (const auto &y : b.y_g) cvt_real.push_back(m.d_conversion.score(t, y));
  for (const auto &e : b.e_o) e_ext.push_back(m.d_embedding.score(t, e));
  for (const auto &e : b.e_i) e_int.push_back(m.d_embedding.score(t, e));
  Objective<Scalar> o;
  o.rf = tape_losses::loss_rf(rf_fake, rf_real, objective);
  o.cvt = tape_losses::loss_cvt(cvt_conv, cvt_fake, cvt_real, objective);
  o.e = tape_losses::loss_e(e_ext, e_int, objective);
  o.total = ad::affine(o.e.d + o.cvt.d, lambda_sim, Scalar(0)) + o.rf.d;
  return o;
}

}  // namespace sslvc

#endif  // SSLVC_OBJECTIVE_HPP
