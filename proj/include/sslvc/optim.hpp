// sslvc/optim.hpp

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

#ifndef SSLVC_OPTIM_HPP
#define SSLVC_OPTIM_HPP

#include <cmath>
#include <cstdint>
#include <vector>

#include "sslvc/autodiff.hpp"

namespace sslvc {

struct AdamConfig {
  double lr = 2e-4;
  double beta1 = 0.8;
  double beta2 = 0.99;
  double epsilon = 1e-8;
};

// Bias-corrected adaptive moment estimation.
template <typename Scalar>
class Adam {
 public:
  Adam(ad::ParameterList<Scalar> params, const AdamConfig &config) : params_(std::move(params)), config_(config) {
    if (!(config_.lr > 0.0)) throw ConfigError("learning rate must be > 0");
    for (auto *p : params_) {
      m_.push_back(Matrix<Scalar>::Zero(p->value.rows(), p->value.cols()));
      v_.push_back(Matrix<Scalar>::Zero(p->value.rows(), p->value.cols()));
    }
  }

  void zero_grad() {
    for (auto *p : params_) p->zero_grad();
  }

  void step() {
    ++t_;
    const auto b1 = static_cast<Scalar>(config_.beta1), b2 = static_cast<Scalar>(config_.beta2);
    const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
    const auto step_size = static_cast<Scalar>(config_.lr * std::sqrt(c2) / c1);
    const auto eps = static_cast<Scalar>(config_.epsilon * std::sqrt(c2));
    for (std::size_t i = 0; i < params_.size(); ++i) {
      const auto &g = params_[i]->grad;
      m_[i] = b1 * m_[i] + (Scalar(1) - b1) * g;
      v_[i] = b2 * v_[i] + (Scalar(1) - b2) * g.cwiseAbs2();
      params_[i]->value.array() -= step_size * m_[i].array() / (v_[i].array().sqrt() + eps);
    }
  }

  const ad::ParameterList<Scalar> &parameters() const { return params_; }
  std::int64_t steps() const { return t_; }
  void set_steps(std::int64_t t) { t_ = t; }
  std::vector<Matrix<Scalar>> &first_moments() { return m_; }
  std::vector<Matrix<Scalar>> &second_moments() { return v_; }
  const AdamConfig &config() const { return config_; }

 private:
  ad::ParameterList<Scalar> params_;
  AdamConfig config_;
  std::vector<Matrix<Scalar>> m_, v_;
  std::int64_t t_ = 0;
};

}  // namespace sslvc

#endif  // SSLVC_OPTIM_HPP
