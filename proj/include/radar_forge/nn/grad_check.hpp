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

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "radar_forge/nn/tensor.hpp"

namespace radar_forge::nn {

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t checked = 0;
  std::size_t worst_param = 0;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

inline constexpr double kGradCheckStep = 1e-5;
/// Denominator floor: gradients smaller than this are compared absolutely.
inline constexpr double kGradCheckFloor = 1e-6;

/// Compares analytic gradients against central differences for every
/// scalar parameter. `loss()` runs a forward pass and returns the loss;
/// `fill_grads()` zeroes and recomputes all parameter gradients.
template <typename LossFn, typename GradFn>
GradCheckResult grad_check(const std::vector<Param*>& params, LossFn&& loss, GradFn&& fill_grads,
                           double h = kGradCheckStep, double floor = kGradCheckFloor) {
  fill_grads();
  std::vector<Tensor> analytic;
  analytic.reserve(params.size());
  for (const auto* p : params) analytic.push_back(p->grad);

  GradCheckResult result;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    auto& values = params[pi]->value;
    for (std::size_t j = 0; j < values.size(); ++j) {
      const double saved = values[j];
      values[j] = saved + h;
      const double plus = loss();
      values[j] = saved - h;
      const double minus = loss();
      values[j] = saved;
      const double numeric = (plus - minus) / (2.0 * h);
      const double a = analytic[pi][j];
      const double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), floor});
      ++result.checked;
      if (rel > result.max_relative_error) {
        result.max_relative_error = rel;
        result.worst_param = pi;
        result.worst_index = j;
        result.worst_analytic = a;
        result.worst_numeric = numeric;
      }
    }
  }
  return result;
}

}  // namespace radar_forge::nn
