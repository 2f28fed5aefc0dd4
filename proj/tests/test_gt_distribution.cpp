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


#include <gtest/gtest.h>

#include <cmath>

#include "radar_forge/gt_distribution.hpp"
#include "radar_forge/rng.hpp"
#include "test_util.hpp"

using namespace radar_forge;

namespace {

Covariance2 random_cov(SeededRng& rng) {
  const double su = rng.uniform(0.6, 6.0), sv = rng.uniform(0.6, 6.0);
  const double rho = rng.uniform(-0.8, 0.8);
  Eigen::Matrix2d m;
  m << su * su, rho * su * sv, rho * su * sv, sv * sv;
  return Covariance2(m);
}

}  // namespace

TEST(Grid, FromWeightsNormalizesAndIsScaleInvariant) {
  const auto a = ProbabilityGrid::from_weights(2, 2, {1, 2, 3, 4});
  const auto b = ProbabilityGrid::from_weights(2, 2, {10, 20, 30, 40});
  EXPECT_DOUBLE_EQ(a.at(1, 1), 0.4);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(a.mass()[i], b.mass()[i], 1e-16);
  EXPECT_EQ(a.argmax(), std::make_pair(1, 1));
}

TEST(Grid, RejectsBadWeights) {
  EXPECT_THROW(ProbabilityGrid::from_weights(2, 2, {0, 0, 0, 0}), Error);
  EXPECT_THROW(ProbabilityGrid::from_weights(2, 2, {1, -1, 0, 1}), Error);
  EXPECT_THROW(ProbabilityGrid::from_weights(2, 2, {1, 1, 1}), Error);
  EXPECT_THROW(ProbabilityGrid::from_weights(0, 2, {}), Error);
}

TEST(Covariance, RejectsIndefinite) {
  Eigen::Matrix2d m;
  m << 1, 2, 2, 1;
  EXPECT_THROW(Covariance2{m}, Error);
  m << 1, 0.1, 0.2, 1;
  EXPECT_THROW(Covariance2{m}, Error);
}

TEST(Rasterize, SinglePointPeaksAtItsPixel) {
  const std::vector<PixelCoord> pts{{5, 3}};
  const auto g = rasterize_mixture(pts, Covariance2::diagonal(1, 1), 10, 8);
  EXPECT_EQ(g.argmax(), std::make_pair(5, 3));
  // neighbour ratio exp(-1/2)
  EXPECT_NEAR(g.at(6, 3) / g.at(5, 3), std::exp(-0.5), 1e-14);
}

TEST(Rasterize, MatchesBruteForce) {
  SeededRng rng(21);
  for (int c = 0; c < 20; ++c) {
    const int w = 8 + static_cast<int>(rng.uniform_index(57));
    const int h = 8 + static_cast<int>(rng.uniform_index(57));
    std::vector<PixelCoord> pts(1 + rng.uniform_index(20));
    for (auto& p : pts) p = {rng.uniform(-2, w + 1), rng.uniform(-2, h + 1)};
    const auto cov = random_cov(rng);
    const auto g = rasterize_mixture(pts, cov, w, h);
    const auto oracle = rf_test::brute_force_mixture(pts, cov.matrix(), w, h);
    double worst = 0.0, total = 0.0;
    for (std::size_t i = 0; i < oracle.size(); ++i) {
      worst = std::max(worst, std::abs(g.mass()[i] - oracle[i]));
      total += g.mass()[i];
    }
    EXPECT_LT(worst, 1e-12);
    EXPECT_NEAR(total, 1.0, 1e-9);
  }
}

TEST(Rasterize, RejectsEmptyAndBadGrid) {
  const std::vector<PixelCoord> none;
  EXPECT_THROW(rasterize_mixture(none, Covariance2::diagonal(1, 1), 4, 4), Error);
  const std::vector<PixelCoord> one{{1, 1}};
  EXPECT_THROW(rasterize_mixture(one, Covariance2::diagonal(1, 1), 0, 4), Error);
}

TEST(Kl, HandValues) {
  const auto p = ProbabilityGrid::from_weights(2, 1, {1, 0});
  const auto q = ProbabilityGrid::uniform(2, 1);
  EXPECT_NEAR(kl_divergence(p, q), std::log(2.0), 1e-6);
  EXPECT_NEAR(kl_divergence(q, q), 0.0, 1e-12);
  EXPECT_THROW(kl_divergence(p, ProbabilityGrid::uniform(1, 2)), Error);
}

TEST(Kl, NonNegativeOnRandomPairs) {
  SeededRng rng(8);
  for (int i = 0; i < 2000; ++i) {
    std::vector<double> a(12), b(12);
    for (std::size_t j = 0; j < 12; ++j) {
      a[j] = rng.uniform() < 0.3 ? 0.0 : rng.uniform();
      b[j] = rng.uniform() < 0.3 ? 0.0 : rng.uniform();
    }
    a[0] += 1e-3;
    b[1] += 1e-3;
    EXPECT_GE(kl_divergence(ProbabilityGrid::from_weights(4, 3, a), ProbabilityGrid::from_weights(4, 3, b)), 0.0);
  }
}

TEST(CountLoss, BothForms) {
  const std::vector<CountPair> pairs{{110, 100}, {90, 100}};
  // relative errors cancel when summed before squaring
  EXPECT_NEAR(count_loss(pairs, CountLossForm::AsPrinted), 0.0, 1e-15);
  EXPECT_NEAR(count_loss(pairs, CountLossForm::PerFrame), 0.01, 1e-15);
  const std::vector<CountPair> one{{150, 100}};
  EXPECT_NEAR(count_loss(one), 0.25, 1e-15);
  const std::vector<CountPair> bad{{1, 0}};
  EXPECT_THROW(count_loss(bad), Error);
  EXPECT_THROW(count_loss(std::vector<CountPair>{}), Error);
  EXPECT_DOUBLE_EQ(total_loss(0.5, 0.25, 2.0).total, 1.0);
  EXPECT_THROW(total_loss(0, 0, -1), Error);
}

TEST(EstimateSigma, PooledWithinGroupScatter) {
  // two groups, each with variance 1 in u and 4 in v about its own mean
  const std::vector<std::vector<PixelCoord>> groups{
      {{0, 0}, {2, 0}, {1, 2}, {1, -2}},
      {{100, 50}, {102, 50}, {101, 52}, {101, 48}},
  };
  const auto s = estimate_sigma(groups);
  // scatter u: 2 per group, v: 8 per group; divided by N - groups = 6
  EXPECT_NEAR(s.matrix()(0, 0), 4.0 / 6.0, 1e-12);
  EXPECT_NEAR(s.matrix()(1, 1), 16.0 / 6.0, 1e-12);
  EXPECT_NEAR(s.matrix()(0, 1), 0.0, 1e-12);
}

TEST(EstimateSigma, FloorsDegenerateDirections) {
  const std::vector<std::vector<PixelCoord>> groups{{{0, 0}, {4, 0}}};
  const auto s = estimate_sigma(groups);
  EXPECT_NEAR(s.matrix()(0, 0), 8.0, 1e-12);
  EXPECT_NEAR(s.matrix()(1, 1), kCovarianceFloor, 1e-12);
  EXPECT_THROW(estimate_sigma({{{1, 1}}}), Error);
}

TEST(EstimateSigma, RecoversKnownCovariance) {
  SeededRng rng(31);
  std::vector<std::vector<PixelCoord>> groups(200);
  for (auto& g : groups) {
    const double cu = rng.uniform(0, 500), cv = rng.uniform(0, 500);
    for (int i = 0; i < 20; ++i) g.push_back({cu + rng.normal(0, 3.0), cv + rng.normal(0, 1.5)});
  }
  const auto s = estimate_sigma(groups);
  EXPECT_NEAR(s.matrix()(0, 0), 9.0, 0.5);
  EXPECT_NEAR(s.matrix()(1, 1), 2.25, 0.15);
}

TEST(NeighborhoodGroups, NearestWithIndexTieBreak) {
  const std::vector<PixelCoord> pts{{0, 0}, {1, 0}, {-1, 0}, {10, 0}};
  const auto g = neighborhood_groups(pts, 1);
  ASSERT_EQ(g.size(), 4u);
  ASSERT_EQ(g[0].size(), 2u);
  EXPECT_EQ(g[0][0], (PixelCoord{0, 0}));
  EXPECT_EQ(g[0][1], (PixelCoord{1, 0}));  // (1,0) and (-1,0) tie; lower index wins
  EXPECT_EQ(g[3][1], (PixelCoord{1, 0}));
  EXPECT_EQ(neighborhood_groups(pts, 50)[0].size(), 4u);
  EXPECT_THROW(neighborhood_groups(pts, 0), Error);
}

TEST(ProjectDatagram, CountsDrops) {
  const CameraIntrinsics k(60, 60, 32, 24);
  const RigidTransform cam_from_radar = RigidTransform(camera_to_radar_aligned_rotation(), Vec3::Zero()).inverse();
  RadarDatagram d;
  d.signals.push_back({10, 0, 0, 0, {}});
  d.signals.push_back({10, kPi, 0, 0, {}});          // behind
  d.signals.push_back({10, deg_to_rad(80), 0, 0, {}});  // off to the side
  const auto p = project_datagram(d, k, cam_from_radar, 64, 48);
  ASSERT_EQ(p.pixels.size(), 1u);
  EXPECT_EQ(p.source_index[0], 0u);
  EXPECT_EQ(p.dropped_behind_camera, 1u);
  EXPECT_EQ(p.dropped_outside_image, 1u);
}

TEST(GrayscaleExport, MaxNormAndSumScale) {
  const auto g = ProbabilityGrid::from_weights(3, 1, {1, 2, 4});
  const auto m = export_grayscale(g, GrayscaleMode::MaxNorm);
  EXPECT_EQ(m.values, (std::vector<std::uint32_t>{64, 128, 255}));
  EXPECT_EQ(m.as_bytes().size(), 3u);
  const auto s = export_grayscale(g, GrayscaleMode::SumScale);
  EXPECT_EQ(s.values[2], static_cast<std::uint32_t>(std::round(4.0 / 7.0 * 4294967295.0)));
  EXPECT_THROW(s.as_bytes(), Error);
}
