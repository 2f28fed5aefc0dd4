// Copyright 2026, radar-forge contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <vector>

#include "radar_forge/error.hpp"
#include "radar_forge/nn/tensor.hpp"

namespace radar_forge::nn {

/// Bias-corrected Adam moments for a fixed list of parameters.
struct AdamState {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long long t = 0;
  std::vector<Tensor> m;
  std::vector<Tensor> v;

  AdamState() = default;
  explicit AdamState(const std::vector<Param*>& params, double learning_rate = 1e-4) : lr(learning_rate) {
    for (const auto* p : params) {
      m.emplace_back(p->value.shape());
      v.emplace_back(p->value.shape());
    }
  }
};

inline void adam_step(const std::vector<Param*>& params, AdamState& s) {
  if (params.size() != s.m.size()) throw Error(ErrorKind::ShapeMismatch, "Adam state tracks a different parameter list");
  for (std::size_t i = 0; i < params.size(); ++i)
    if (!params[i]->value.same_shape(s.m[i]) || !params[i]->grad.same_shape(s.m[i]))
      throw Error(ErrorKind::ShapeMismatch, "Adam moment shape does not match parameter " + std::to_string(i));
  ++s.t;
  const double bc1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.t));
  const double bc2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    double* w = params[i]->value.data();
    const double* g = params[i]->grad.data();
    double* m = s.m[i].data();
    double* v = s.v[i].data();
    for (std::size_t j = 0; j < s.m[i].size(); ++j) {
      m[j] = s.beta1 * m[j] + (1.0 - s.beta1) * g[j];
      v[j] = s.beta2 * v[j] + (1.0 - s.beta2) * g[j] * g[j];
      const double m_hat = m[j] / bc1;
      const double v_hat = v[j] / bc2;
      w[j] -= s.lr * m_hat / (std::sqrt(v_hat) + s.eps);
    }
  }
}

}  // namespace radar_forge::nn
