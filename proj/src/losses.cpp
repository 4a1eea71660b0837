// sslvc/losses.cpp

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

#include "sslvc/losses.hpp"

#include <cmath>

namespace sslvc {

namespace {

void check_scores(std::span<const double> scores, const char *what) {
  if (scores.empty()) throw ShapeError(std::string(what) + ": empty score batch");
  for (double v : scores)
    if (!(v > 0.0 && v < 1.0))
      throw DomainError(std::string(what) + ": score " + std::to_string(v) + " outside (0, 1)");
}

double negative_term(std::span<const double> s, GanObjective objective) {
  double sum = 0.0;
  for (double v : s) {
    switch (objective) {
      case GanObjective::kExpectation: sum += v; break;
      case GanObjective::kLeastSquares: sum += v * v; break;
      case GanObjective::kLogLikelihood: sum -= std::log1p(-v); break;
    }
  }
  return sum / static_cast<double>(s.size());
}

double positive_term(std::span<const double> s, GanObjective objective) {
  double sum = 0.0;
  for (double v : s) {
    switch (objective) {
      case GanObjective::kExpectation: sum += 1.0 - v; break;
      case GanObjective::kLeastSquares: sum += (1.0 - v) * (1.0 - v); break;
      case GanObjective::kLogLikelihood: sum -= std::log(v); break;
    }
  }
  return sum / static_cast<double>(s.size());
}

}  // namespace

GanObjective parse_gan_objective(const std::string &name) {
  if (name == "expectation") return GanObjective::kExpectation;
  if (name == "least_squares") return GanObjective::kLeastSquares;
  if (name == "log_likelihood") return GanObjective::kLogLikelihood;
  throw ConfigError("unknown gan objective '" + name + "' (expected expectation, least_squares or log_likelihood)");
}

std::string to_string(GanObjective objective) {
  switch (objective) {
    case GanObjective::kExpectation:
      return "expectation";
    case GanObjective::kLeastSquares:
      return "least_squares";
    case GanObjective::kLogLikelihood:
      return "log_likelihood";
  }
  return "expectation";
}

AdversarialTerms loss_rf(std::span<const double> d_fake, std::span<const double> d_real, GanObjective objective) {
  check_scores(d_fake, "loss_rf");
  check_scores(d_real, "loss_rf");
  return {positive_term(d_fake, objective), negative_term(d_fake, objective) + positive_term(d_real, objective)};
}

AdversarialTerms loss_cvt(std::span<const double> d_converted, std::span<const double> d_fake,
                          std::span<const double> d_real, GanObjective objective) {
  check_scores(d_converted, "loss_cvt");
  check_scores(d_fake, "loss_cvt");
  check_scores(d_real, "loss_cvt");
  return {positive_term(d_converted, objective), negative_term(d_converted, objective) +
                                                     positive_term(d_fake, objective) +
                                                     positive_term(d_real, objective)};
}

AdversarialTerms loss_e(std::span<const double> d_external, std::span<const double> d_internal,
                        GanObjective objective) {
  check_scores(d_external, "loss_e");
  check_scores(d_internal, "loss_e");
  return {positive_term(d_external, objective),
          negative_term(d_external, objective) + positive_term(d_internal, objective)};
}

double loss_rec(const MatrixF &y_f, const MatrixF &y_g) {
  if (y_f.rows() != y_g.rows() || y_f.cols() != y_g.cols())
    throw ShapeError("loss_rec: shapes differ");
  if (y_f.size() == 0) throw ShapeError("loss_rec: empty spectrogram");
  return (y_f.cast<double>() - y_g.cast<double>()).cwiseAbs().mean();
}

bool LossReport::all_finite() const {
  for (double v : {l_rec, l_rf_g, l_rf_d, l_cvt_g, l_cvt_d, l_e_g, l_e_d, l_sim_g, l_sim_d, total_g, total_d})
    if (!std::isfinite(v)) return false;
  return true;
}

LossReport assemble(double l_rec, const AdversarialTerms &rf, const AdversarialTerms &cvt,
                    const AdversarialTerms &e, double lambda_sim) {
  LossReport r;
  r.l_rec = l_rec;
  r.l_rf_g = rf.g_term;
  r.l_rf_d = rf.d_term;
  r.l_cvt_g = cvt.g_term;
  r.l_cvt_d = cvt.d_term;
  r.l_e_g = e.g_term;
  r.l_e_d = e.d_term;
  r.l_sim_g = e.g_term + cvt.g_term;
  r.l_sim_d = e.d_term + cvt.d_term;
  r.lambda_sim = lambda_sim;
  r.total_g = lambda_sim * r.l_sim_g + r.l_rf_g + r.l_rec;
  r.total_d = lambda_sim * r.l_sim_d + r.l_rf_d;
  return r;
}

void to_json(nlohmann::json &j, const LossReport &r) {
  j = {{"l_rec", r.l_rec},     {"l_rf_g", r.l_rf_g},   {"l_rf_d", r.l_rf_d},   {"l_cvt_g", r.l_cvt_g},
       {"l_cvt_d", r.l_cvt_d}, {"l_e_g", r.l_e_g},     {"l_e_d", r.l_e_d},     {"l_sim_g", r.l_sim_g},
       {"l_sim_d", r.l_sim_d}, {"total_g", r.total_g}, {"total_d", r.total_d}, {"lambda_sim", r.lambda_sim}};
}

void from_json(const nlohmann::json &j, LossReport &r) {
  j.at("l_rec").get_to(r.l_rec);
  j.at("l_rf_g").get_to(r.l_rf_g);
  j.at("l_rf_d").get_to(r.l_rf_d);
  j.at("l_cvt_g").get_to(r.l_cvt_g);
  j.at("l_cvt_d").get_to(r.l_cvt_d);
  j.at("l_e_g").get_to(r.l_e_g);
  j.at("l_e_d").get_to(r.l_e_d);
  j.at("l_sim_g").get_to(r.l_sim_g);
  j.at("l_sim_d").get_to(r.l_sim_d);
  j.at("total_g").get_to(r.total_g);
  j.at("total_d").get_to(r.total_d);
  j.at("lambda_sim").get_to(r.lambda_sim);
}

}  // namespace sslvc
