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

#include <string_view>

#include "radar_forge/error.hpp"
#include "radar_forge/gt_distribution.hpp"

namespace radar_forge {

enum class PredictionSource { Oracle, Heuristic, External };

constexpr std::string_view to_string(PredictionSource s) {
  switch (s) {
    case PredictionSource::Oracle: return "oracle";
    case PredictionSource::Heuristic: return "heuristic";
    case PredictionSource::External: return "external";
  }
  return "unknown";
}

/// Where signals appear (grid) and how many (count): the two outputs a
/// distribution network provides at inference time.
struct DistributionPrediction {
  ProbabilityGrid grid;
  long long count = 0;
  PredictionSource source = PredictionSource::Oracle;

  void validate() const {
    double total = 0.0;
    for (double p : grid.mass()) total += p;
    if (std::abs(total - 1.0) > ProbabilityGrid::kSumTolerance)
      throw Error(ErrorKind::InvalidGrid, "prediction grid is not normalized");
    if (count < 1) throw Error(ErrorKind::OutOfRange, "prediction count must be >= 1");
  }
};

}  // namespace radar_forge
