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


// Builds one frame of the boxes scene in memory, replays its ground truth
// through the oracle predictor and synthesizes a datagram from it.

#include <iostream>

#include "radar_forge/fixture.hpp"
#include "radar_forge/io/datagram_csv.hpp"
#include "radar_forge/predictors.hpp"
#include "radar_forge/signal_synth.hpp"

int main() {
  using namespace radar_forge;

  fixture::FixtureOptions opt;
  opt.scene = fixture::Scene::Boxes;
  const FrameBundle frame = fixture::make_frame(opt, 0).bundle;

  const std::vector<FrameBundle> frames{frame};
  const Covariance2 sigma = estimate_dataset_sigma(frames);
  const DistributionPrediction pred = oracle_predict(frame, sigma);

  SeededRng rng = SeededRng::for_frame(7, 0);
  const SynthesisResult res = synthesize_frame(frame, pred, RadarSpec{}, rng);

  std::cout << "frame " << frame.id << ": " << frame.lidar.size() << " lidar points, " << pred.count
            << " signals requested, " << res.report.emitted << " emitted\n";
  const std::string csv = io::format_datagram_csv(res.datagram);
  std::size_t end = 0;
  for (int line = 0; line < 6 && end != std::string::npos; ++line) end = csv.find('\n', end + 1);
  std::cout << csv.substr(0, end) << "\n...\n";
  return res.report.emitted > 0 ? 0 : 1;
}
