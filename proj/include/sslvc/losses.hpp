// sslvc/losses.hpp

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

#ifndef SSLVC_LOSSES_HPP
#define SSLVC_LOSSES_HPP

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sslvc/autodiff.hpp"

namespace sslvc {

// kExpectation: terms are plain means of the scores, mean(D(neg)) and
// mean(1 - D(pos)). kLeastSquares squares each term. kLogLikelihood uses
// mean(-log(1 - D(neg))) and mean(-log D(pos)); the generator side is then
// the non-saturating -log D form.
enum class GanObjective { kExpectation, kLeastSquares, kLogLikelihood };

GanObjective parse_gan_objective(const std::string &name);
std::string to_string(GanObjective objective);

struct AdversarialTerms {
  double g_term = 0.0;
  double d_term = 0.0;
};

// Scores are discriminator probabilities, one per utterance, strictly
// inside (0, 1); anything else raises DomainError.
AdversarialTerms loss_rf(std::span<const double> d_fake, std::span<const double> d_real,
                         GanObjective objective = GanObjective::kExpectation);
AdversarialTerms loss_cvt(std::span<const double> d_converted, std::span<const double> d_fake,
                          std::span<const double> d_real,
                          GanObjective objective = GanObjective::kExpectation);
AdversarialTerms loss_e(std::span<const double> d_external, std::span<const double> d_internal,
                        GanObjective objective = GanObjective::kExpectation);

// Mean absolute elementwise difference.
double loss_rec(const MatrixF &y_f, const MatrixF &y_g);

struct LossReport {
  double l_rec = 0.0;
  double l_rf_g = 0.0, l_rf_d = 0.0;
  double l_cvt_g = 0.0, l_cvt_d = 0.0;
  double l_e_g = 0.0, l_e_d = 0.0;
  double l_sim_g = 0.0, l_sim_d = 0.0;
  double total_g = 0.0, total_d = 0.0;
  double lambda_sim = 0.0;

  bool all_finite() const;
};

LossReport assemble(double l_rec, const AdversarialTerms &rf, const AdversarialTerms &cvt,
                    const AdversarialTerms &e, double lambda_sim);

void to_json(nlohmann::json &j, const LossReport &r);
void from_json(const nlohmann::json &j, LossReport &r);

// Recorded versions for backpropagation. Each score is a 1x1 Var.
namespace tape_losses {

template <typename Scalar>
struct Terms {
  ad::Var<Scalar> g;
  ad::Var<Scalar> d;
};

template <typename Scalar>
void check_scores(const std::vector<ad::Var<Scalar>> &scores, const char *what) {
  if (scores.empty()) throw ShapeError(std::string(what) + ": empty score batch");
  for (const auto &s : scores) {
    const Scalar v = s.scalar();
    if (!(v > Scalar(0) && v < Scalar(1)))
      throw DomainError(std::string(what) + ": score " + std::to_string(static_cast<double>(v)) +
                        " outside (0, 1)");
  }
}

// Term pushing scores toward 0.
template <typename Scalar>
ad::Var<Scalar> negative_term(const std::vector<ad::Var<Scalar>> &scores, GanObjective objective) {
  if (objective == GanObjective::kExpectation) return ad::mean_of(scores);
  std::vector<ad::Var<Scalar>> sq;
  for (const auto &s : scores)
    sq.push_back(objective == GanObjective::kLeastSquares ? ad::square(s)
                                                         : ad::neg_log(ad::affine(s, Scalar(-1), Scalar(1))));
  return ad::mean_of(sq);
}

// Term pushing scores toward 1.
template <typename Scalar>
ad::Var<Scalar> positive_term(const std::vector<ad::Var<Scalar>> &scores, GanObjective objective) {
  std::vector<ad::Var<Scalar>> gap;
  for (const auto &s : scores) {
    if (objective == GanObjective::kLogLikelihood) {
      gap.push_back(ad::neg_log(s));
      continue;
    }
    auto one_minus = ad::affine(s, Scalar(-1), Scalar(1));
    gap.push_back(objective == GanObjective::kExpectation ? one_minus : ad::square(one_minus));
  }
  return ad::mean_of(gap);
}

template <typename Scalar>
Terms<Scalar> loss_rf(const std::vector<ad::Var<Scalar>> &d_fake, const std::vector<ad::Var<Scalar>> &d_real,
                      GanObjective objective) {
  check_scores(d_fake, "loss_rf");
  check_scores(d_real, "loss_rf");
  return {positive_term(d_fake, objective), negative_term(d_fake, objective) + positive_term(d_real, objective)};
}

template <typename Scalar>
Terms<Scalar> loss_cvt(const std::vector<ad::Var<Scalar>> &d_converted, const std::vector<ad::Var<Scalar>> &d_fake,
                       const std::vector<ad::Var<Scalar>> &d_real, GanObjective objective) {
  check_scores(d_converted, "loss_cvt");
  check_scores(d_fake, "loss_cvt");
  check_scores(d_real, "loss_cvt");
  return {positive_term(d_converted, objective),
          negative_term(d_converted, objective) + positive_term(d_fake, objective) +
              positive_term(d_real, objective)};
}

template <typename Scalar>
Terms<Scalar> loss_e(const std::vector<ad::Var<Scalar>> &d_external, const std::vector<ad::Var<Scalar>> &d_internal,
                     GanObjective objective) {
  check_scores(d_external, "loss_e");
  check_scores(d_internal, "loss_e");
  return {positive_term(d_external, objective),
          negative_term(d_external, objective) + positive_term(d_internal, objective)};
}

template <typename Scalar>
ad::Var<Scalar> loss_rec(ad::Var<Scalar> y_f, ad::Var<Scalar> y_g) {
  if (y_f.rows() != y_g.rows() || y_f.cols() != y_g.cols())
    throw ShapeError("loss_rec: shapes differ (" + std::to_string(y_f.rows()) + "x" + std::to_string(y_f.cols()) +
                     " vs " + std::to_string(y_g.rows()) + "x" + std::to_string(y_g.cols()) + ")");
  return ad::mean(ad::abs(y_f - y_g));
}

}  // namespace tape_losses

}  // namespace sslvc

#endif  // SSLVC_LOSSES_HPP
