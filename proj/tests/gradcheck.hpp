// sslvc/tests/gradcheck.hpp

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

#ifndef SSLVC_TESTS_GRADCHECK_HPP
#define SSLVC_TESTS_GRADCHECK_HPP

#include <algorithm>
#include <functional>
#include <string>

#include "sslvc/autodiff.hpp"

namespace sslvc::testing {

struct GradCheck {
  double worst = 0.0;  // largest per-tensor relative error
  std::string worst_name;
  int tensors = 0;
};

// Per-tensor error ||analytic - numeric|| / max(||analytic|| + ||numeric||, floor).
// The floor keeps tensors whose true gradient is zero (for instance a bias
// cancelled by a following normalization) from reporting pure
// finite-difference noise as relative error.
inline double tensor_error(const MatrixD &a, const MatrixD &n, double floor = 1e-4) {
  return (a - n).norm() / std::max(a.norm() + n.norm(), floor);
}

// loss(t) must rebuild the scalar objective from the current parameter values.
inline GradCheck check_gradients(const ad::ParameterList<double> &params,
                                 const std::function<ad::Var<double>(ad::Tape<double> &)> &loss,
                                 double h = 1e-6) {
  for (auto *p : params) p->zero_grad();
  {
    ad::Tape<double> t;
    auto l = loss(t);
    t.backward(l);
    t.flush_param_grads();
  }
  auto eval = [&loss]() {
    ad::Tape<double> t;
    return loss(t).scalar();
  };
  GradCheck result;
  for (auto *p : params) {
    MatrixD numeric(p->value.rows(), p->value.cols());
    for (Eigen::Index i = 0; i < p->value.size(); ++i) {
      double &w = p->value.data()[i];
      const double saved = w;
      w = saved + h;
      const double up = eval();
      w = saved - h;
      const double down = eval();
      w = saved;
      numeric.data()[i] = (up - down) / (2.0 * h);
    }
    const double err = tensor_error(p->grad, numeric);
    ++result.tensors;
    if (err > result.worst) {
      result.worst = err;
      result.worst_name = p->name;
    }
  }
  return result;
}

}  // namespace sslvc::testing

#endif  // SSLVC_TESTS_GRADCHECK_HPP
