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


// Acceptance suite. One line per criterion, nonzero exit if any fails.

#include <sys/wait.h>
#include <unistd.h>

#include <Eigen/Geometry>
#include <boost/math/distributions/chi_squared.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <json.hpp>
#include <sstream>
#include <string>

#include "nn_check.hpp"
#include "radar_forge/encoders.hpp"
#include "radar_forge/eval.hpp"
#include "radar_forge/fixture.hpp"
#include "radar_forge/geometry.hpp"
#include "radar_forge/gt_distribution.hpp"
#include "radar_forge/io/binary.hpp"
#include "radar_forge/io/datagram_csv.hpp"
#include "radar_forge/io/grid_io.hpp"
#include "radar_forge/predictors.hpp"
#include "radar_forge/rss_net.hpp"
#include "radar_forge/sampler.hpp"
#include "radar_forge/signal_synth.hpp"
#include "rss_check.hpp"
#include "test_util.hpp"

using namespace radar_forge;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int sh(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

int cli(const std::string& dir, const std::string& args) {
  return sh("cd '" + dir + "' && '" RADAR_FORGE_CLI "' " + args + " >/dev/null 2>>'" + dir + "/stderr.txt'");
}

std::string slurp(const std::string& path) {
  const auto b = io::read_file_bytes(path);
  return std::string(b.begin(), b.end());
}

Mat3 random_rotation(SeededRng& rng) {
  Eigen::Quaterniond q(rng.normal(0, 1), rng.normal(0, 1), rng.normal(0, 1), rng.normal(0, 1));
  return q.normalized().toRotationMatrix();
}

double rel(const Vec3& a, const Vec3& b) { return (a - b).norm() / std::max(b.norm(), 1e-300); }

// ---------------------------------------------------------------- criteria

void ac1(Outcome& o) {
  const auto t0 = Clock::now();
  SeededRng rng(101);
  double sph = 0.0, xf = 0.0, px = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const Vec3 p(rng.uniform(-80, 80), rng.uniform(-80, 80), rng.uniform(-20, 20));
    sph = std::max(sph, rel(spherical_to_cartesian(cartesian_to_spherical(p)), p));
    const SphericalPoint s{rng.uniform(0.1, 100), rng.uniform(-kPi, kPi), rng.uniform(-1.5, 1.5)};
    const auto back = cartesian_to_spherical(spherical_to_cartesian(s));
    sph = std::max({sph, std::abs(back.r - s.r) / s.r, std::abs(wrap_angle(back.theta - s.theta)),
                    std::abs(back.phi - s.phi)});

    const RigidTransform t(random_rotation(rng), Vec3(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5)));
    xf = std::max(xf, rel(t.inverse().apply(t.apply(p)), p));
    xf = std::max(xf, rel((t * t.inverse()).apply(p), p));

    const CameraIntrinsics k(rng.uniform(300, 1500), rng.uniform(300, 1500), rng.uniform(200, 800), rng.uniform(150, 600));
    const RigidTransform cam_to_radar(random_rotation(rng) * camera_to_radar_aligned_rotation(),
                                      Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)));
    const RigidTransform radar_to_cam = cam_to_radar.inverse();
    // a point in front of the camera, expressed in the radar frame
    const Vec3 in_cam(rng.uniform(-5, 5), rng.uniform(-4, 4), rng.uniform(1, 60));
    const Vec3 q = cam_to_radar.apply(in_cam);
    const PixelCoord pix = project_to_image(k, radar_to_cam, q);
    const Vec3 ray = back_project_ray(k, cam_to_radar.rotation(), pix);
    const PixelCoord again = project_to_image(k, radar_to_cam, cam_to_radar.translation() + 7.5 * ray);
    px = std::max(px, std::hypot(again.u - pix.u, again.v - pix.v));
  }
  const double t = seconds_since(t0);
  o.detail << "spherical " << sph << ", transform " << xf << ", reprojection " << px << " px, " << t << " s";
  o.require(sph < 1e-9 && xf < 1e-9, "round trip < 1e-9");
  o.require(px < 1e-6, "reprojection < 1e-6 px");
  o.require(t < 5.0, "runtime < 5 s");
}

void ac2(Outcome& o) {
  const auto t0 = Clock::now();
  SeededRng rng(202);
  double worst = 0.0, sum_err = 0.0;
  for (int c = 0; c < 50; ++c) {
    const int w = 1 + static_cast<int>(rng.uniform_index(128));
    const int h = 1 + static_cast<int>(rng.uniform_index(128));
    std::vector<PixelCoord> pts(1 + rng.uniform_index(20));
    for (auto& p : pts) p = {rng.uniform(-2, w + 1), rng.uniform(-2, h + 1)};
    const double su = rng.uniform(0.6, 8), sv = rng.uniform(0.6, 8), rho = rng.uniform(-0.8, 0.8);
    Eigen::Matrix2d m;
    m << su * su, rho * su * sv, rho * su * sv, sv * sv;
    const auto g = rasterize_mixture(pts, Covariance2(m), w, h);
    const auto want = rf_test::brute_force_mixture(pts, m, w, h);
    double total = 0.0;
    for (std::size_t i = 0; i < want.size(); ++i) {
      worst = std::max(worst, std::abs(g.mass()[i] - want[i]));
      total += g.mass()[i];
    }
    sum_err = std::max(sum_err, std::abs(total - 1.0));
  }
  const double t = seconds_since(t0);
  o.detail << "max cell error " << worst << ", max |sum-1| " << sum_err << ", " << t << " s";
  o.require(worst <= 1e-12, "cells within 1e-12");
  o.require(sum_err <= 1e-9, "sums to 1");
  o.require(t < 30.0, "runtime < 30 s");
}

void ac3(Outcome& o) {
  const auto p = ProbabilityGrid::from_weights(2, 1, {1, 0});
  const auto q = ProbabilityGrid::from_weights(2, 1, {0.5, 0.5});
  const double ln2 = kl_divergence(p, q);
  SeededRng rng(303);
  double self = 0.0, most_negative = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const int n = 1 + static_cast<int>(rng.uniform_index(64));
    std::vector<double> a(n), b(n);
    for (int j = 0; j < n; ++j) {
      // sparse supports so the floor matters
      a[j] = rng.uniform() < 0.3 ? 0.0 : rng.uniform();
      b[j] = rng.uniform() < 0.3 ? 0.0 : rng.uniform();
    }
    a[rng.uniform_index(n)] += 0.1;
    b[rng.uniform_index(n)] += 0.1;
    const auto ga = ProbabilityGrid::from_weights(n, 1, a), gb = ProbabilityGrid::from_weights(n, 1, b);
    most_negative = std::min(most_negative, kl_divergence(ga, gb));
    self = std::max(self, std::abs(kl_divergence(ga, ga)));
  }
  o.detail << "KL([1,0],[.5,.5]) = " << ln2 << ", max |KL(p,p)| " << self << ", min KL " << most_negative;
  o.require(std::abs(ln2 - std::log(2.0)) <= 1e-6, "ln 2");
  o.require(self <= 1e-12, "KL(p,p) = 0");
  o.require(most_negative >= 0.0, "nonnegative");
}

ProbabilityGrid bumpy(int w, int h) {
  std::vector<PixelCoord> pts{{w * 0.25, h * 0.3}, {w * 0.7, h * 0.6}, {w * 0.5, h * 0.9}};
  return rasterize_mixture(pts, Covariance2::diagonal(w * w / 40.0, h * h / 50.0), w, h);
}

std::vector<double> histogram(const std::vector<PixelCoord>& s, int w, int h) {
  std::vector<double> hist(static_cast<std::size_t>(w) * h, 0.0);
  for (const auto& p : s) hist[static_cast<std::size_t>(std::lround(p.v)) * w + std::lround(p.u)] += 1.0;
  return hist;
}

void ac4(Outcome& o) {
  const auto t0 = Clock::now();
  const auto g = bumpy(64, 48);
  SeededRng rng(404);
  const long long n = 1000000;
  auto hist = histogram(sample_signals(g, n, rng), 64, 48);
  for (auto& x : hist) x /= static_cast<double>(n);
  const double tv = rf_test::total_variation(hist, {g.mass().begin(), g.mass().end()});

  // independent reference: uniform proposal, accept with p / p_max
  const auto g16 = bumpy(16, 16);
  const long long m = 200000;
  SeededRng a_rng(405), b_rng(406);
  const auto a = histogram(sample_signals(g16, m, a_rng), 16, 16);
  std::vector<double> b(g16.size(), 0.0);
  for (long long k = 0; k < m;) {
    const auto i = b_rng.uniform_index(g16.size());
    if (b_rng.uniform() * g16.max_mass() < g16.mass()[i]) {
      b[i] += 1.0;
      ++k;
    }
  }
  double chi2 = 0.0;
  int dof = -1;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] + b[i] == 0) continue;
    chi2 += (a[i] - b[i]) * (a[i] - b[i]) / (a[i] + b[i]);
    ++dof;
  }
  const double p = boost::math::cdf(boost::math::complement(boost::math::chi_squared(dof), chi2));

  SeededRng r1(7), r2(7);
  const bool same = sample_signals(g, 100000, r1, true) == sample_signals(g, 100000, r2, true);
  const double t = seconds_since(t0);
  o.detail << "TV " << tv << ", chi2 " << chi2 << " on " << dof << " dof (p " << p << "), " << t << " s";
  o.require(tv < 0.02, "TV < 0.02");
  o.require(p > 0.01, "chi-square p > 0.01");
  o.require(same, "bit-identical resampling");
  o.require(t < 60.0, "runtime < 60 s");
}

void ac5(Outcome& o) {
  SeededRng rng(505);
  int exact = 0;
  for (int c = 0; c < 100; ++c) {
    const CartesianPoint3 anchor(rng.uniform(2, 40), rng.uniform(-10, 10), rng.uniform(-2, 2));
    const double r_l = rng.uniform(0.5, 2.0);
    std::vector<CartesianPoint3> local;
    const int n = 1 + static_cast<int>(rng.uniform_index(400));
    while (static_cast<int>(local.size()) < n) {
      const Vec3 d(rng.uniform(-r_l, r_l), rng.uniform(-r_l, r_l), rng.uniform(-r_l, r_l));
      if (d.norm() <= r_l) local.push_back(anchor + d);
    }
    exact += build_range_image(local, anchor, r_l, 128, 32).values ==
             rf_test::range_image_oracle(local, anchor, r_l, 128, 32);
  }
  const CartesianPoint3 p(12, -3, 0.4);
  const auto anchor_img = build_range_image(std::vector<CartesianPoint3>{p}, p, 1.0, 128, 32);
  const CartesianPoint3 q(10, 0, 0);
  const auto far_img = build_range_image(std::vector<CartesianPoint3>{{11, 0, 0}}, q, 1.0, 128, 32);
  o.detail << exact << "/100 clouds bit-exact, anchor -> " << int(anchor_img.at(64, 16)) << ", boundary -> "
           << int(far_img.at(64, 16));
  o.require(exact == 100, "all clouds bit-exact");
  o.require(anchor_img.at(64, 16) == 127, "anchor 127 at (64,16)");
  o.require(far_img.at(64, 16) == 255, "boundary 255");
}

void ac6(Outcome& o) {
  namespace nn = radar_forge::nn;
  const auto t0 = Clock::now();
  SeededRng rng(606);
  auto away = [&](const nn::Tensor::Shape& s) {
    // keep ReLU inputs off the kink
    auto t = rf_test::random_tensor(s, rng);
    for (auto& v : t.values()) v = (v < 0 ? -1 : 1) * (0.05 + std::abs(v));
    return t;
  };
  auto conv = [&](int in, int out, int k, int s, int p) {
    auto l = std::make_unique<nn::Conv2d>(in, out, k, s, p);
    l->init(rng);
    return l;
  };
  auto fc = std::make_unique<nn::FullyConnected>(6, 4);
  fc->init(rng);
  struct Case {
    std::string name;
    std::unique_ptr<nn::Layer> layer;
    nn::Tensor::Shape in;
  };
  std::vector<Case> cases;
  cases.push_back({"conv", conv(2, 3, 3, 1, 0), {2, 2, 5, 6}});
  cases.push_back({"conv/s2", conv(3, 2, 3, 2, 1), {2, 3, 7, 6}});
  cases.push_back({"fc", std::move(fc), {3, 6, 1, 1}});
  cases.push_back({"relu", std::make_unique<nn::Activation>(nn::ActivationKind::Relu), {2, 3, 2, 2}});
  cases.push_back({"sigmoid", std::make_unique<nn::Activation>(nn::ActivationKind::Sigmoid), {2, 3, 2, 2}});
  cases.push_back({"identity", std::make_unique<nn::Activation>(nn::ActivationKind::Identity), {1, 3, 1, 1}});
  cases.push_back({"avgpool", std::make_unique<nn::AvgPool>(2), {2, 2, 5, 4}});
  cases.push_back({"adaptive", std::make_unique<nn::AdaptiveAvgPool>(3, 2), {2, 2, 7, 5}});
  cases.push_back({"flatten", std::make_unique<nn::Flatten>(), {2, 2, 3, 2}});
  double worst_layer = 0.0;
  for (auto& c : cases) {
    auto net = rf_test::single(std::move(c.layer));
    const double e = rf_test::check_stack(net, away(c.in), rng).max_relative_error;
    worst_layer = std::max(worst_layer, e);
    o.require(e < 1e-4, c.name);
  }
  const auto full = rf_test::rss_grad_check(RssNetConfig{}, 6, 2);
  nn::Sequential bad;
  bad.push(std::make_unique<rf_test::CorruptedFc>(4, 3, rng));
  const double control = rf_test::check_stack(bad, rf_test::random_tensor({2, 4, 1, 1}, rng), rng).max_relative_error;
  const double t = seconds_since(t0);
  o.detail << "layers " << worst_layer << ", full network " << full.max_relative_error << " over " << full.checked
           << " params, corrupted control " << control << ", " << t << " s";
  o.require(full.max_relative_error < 1e-4, "full network");
  o.require(control > 1e-2, "corrupted control");
  o.require(t < 120.0, "runtime < 120 s");
}

void ac7(Outcome& o) {
  const auto t0 = Clock::now();
  const RssNetConfig cfg;
  const auto samples = rf_test::linear_rss_samples(64, cfg);
  TrainOptions opt;
  opt.epochs = 2000;
  opt.lr = 1e-3;
  opt.seed = 1;
  opt.stop_below = 1e-4;
  const auto a = train(samples, cfg, opt);
  const auto b = train(samples, cfg, opt);
  const auto& last = a.history.back();
  bool same_history = a.history.size() == b.history.size();
  for (std::size_t i = 0; same_history && i < a.history.size(); ++i)
    same_history = a.history[i].step == b.history[i].step && a.history[i].loss == b.history[i].loss;
  const double t = seconds_since(t0);
  o.detail << "lr 1e-3: loss " << last.loss << " at step " << last.step << ", " << t << " s";
  o.require(last.loss < 1e-4 && last.step <= 2000, "loss < 1e-4 within 2000 steps");
  o.require(a.model.encode() == b.model.encode() && same_history, "same-seed byte-identical");
  o.require(t < 300.0, "runtime < 5 min");
}

// Angular window scan over the whole cloud, independent of the index.
std::vector<double> window_ranges(const std::vector<SphericalPoint>& cloud, double theta, double phi, double d1,
                                  double d2) {
  std::vector<double> out;
  for (const auto& p : cloud)
    if (std::abs(wrap_angle(p.theta - theta)) <= d1 + 1e-12 && std::abs(p.phi - phi) <= d2 + 1e-12) out.push_back(p.r);
  return out;
}

void ac8(Outcome& o, const std::string& work) {
  const RadarSpec spec;
  double worst_kl = 0.0, worst_count = 0.0;
  std::size_t signals = 0, r_ok = 0, v_ok = 0;
  for (const std::string scene : {"wall", "boxes", "street"}) {
    const std::string dir = work + "/ac8_" + scene;
    fs::create_directories(dir);
    if (cli(dir, "make-fixture --scene " + scene + " --frames 3 --out-dir ds") != 0 ||
        cli(dir, "gt-dist --manifest ds/manifest.txt --out-dir gt") != 0 ||
        cli(dir, "synth --manifest ds/manifest.txt --predictor oracle --seed 7 --out-dir syn") != 0) {
      o.require(false, scene + " pipeline exit code");
      continue;
    }
    const auto meta = nlohmann::json::parse(slurp(dir + "/gt/run.json"));
    Eigen::Matrix2d m;
    m << meta["sigma"][0].get<double>(), meta["sigma"][1].get<double>(), meta["sigma"][1].get<double>(),
        meta["sigma"][2].get<double>();
    const auto sigma = Covariance2(m);
    const auto ds = io::load_manifest(dir + "/ds/manifest.txt");
    for (const auto& fd : ds.frames) {
      const auto frame = io::load_frame(fd);
      const auto truth_grid = io::load_grid(dir + "/gt/" + fd.id + ".grid");
      const long long n_true = parse_count(slurp(dir + "/gt/" + fd.id + ".count"), fd.id);
      const auto synth = io::read_datagram_csv(dir + "/syn/" + fd.id + ".csv", fd.id);
      worst_kl = std::max(worst_kl, kl_divergence(truth_grid, rasterize_datagram(synth, frame, sigma)));
      worst_count = std::max(worst_count, std::abs(static_cast<double>(synth.size()) - n_true) / n_true);

      std::vector<SphericalPoint> cloud;
      for (const auto& p : frame.lidar) cloud.push_back(cartesian_to_spherical(frame.calibration.lidar_to_radar.apply(p)));
      const auto& cal = frame.calibration;
      for (const auto& s : synth.signals) {
        ++signals;
        std::vector<double> rs;
        for (int k = 0; rs.empty() && k <= 6; ++k)
          rs = window_ranges(cloud, s.theta, s.phi, spec.delta1 * std::ldexp(1.0, k), spec.delta2 * std::ldexp(1.0, k));
        const auto [lo, hi] = std::minmax_element(rs.begin(), rs.end());
        r_ok += !rs.empty() && s.r >= *lo && s.r <= *hi;
        const auto px = project_to_image(cal.k, cal.radar_to_camera, cal.camera_to_radar.translation() + s.cartesian());
        const Vec3 v_obj = frame.object_velocities.lookup(px);
        v_ok += std::abs(s.v) <= (v_obj - frame.ego_velocity).norm() + 1e-12;
      }
    }
  }
  o.detail << "max KL " << worst_kl << ", max count error " << worst_count << ", range in neighbourhood " << r_ok
           << "/" << signals << ", Doppler bound " << v_ok << "/" << signals;
  o.require(worst_kl < 0.15, "KL < 0.15");
  o.require(worst_count == 0.0, "count error 0");
  o.require(signals > 0 && r_ok == signals, "range within neighbourhood");
  o.require(signals > 0 && v_ok == signals, "Doppler bound");
}

void ac9(Outcome& o) {
  fixture::FixtureOptions fo;
  fo.scene = fixture::Scene::Wall;
  const RadarSpec spec;
  double r_min = 1e300, r_max = 0.0, v_ahead = 0.0;
  std::size_t n = 0;
  for (int i = 0; i < 3; ++i) {
    const auto f = fixture::make_frame(fo, i).bundle;
    const auto pred = oracle_predict(f, Covariance2::from_stddev(2.0, 2.0));
    SeededRng rng(900 + i);
    const auto out = synthesize_frame(f, pred, spec, rng, {});
    for (const auto& s : out.datagram.signals) {
      r_min = std::min(r_min, s.r);
      r_max = std::max(r_max, s.r);
      ++n;
    }
  }
  // the straight-ahead pixel is the principal point
  const auto f = fixture::make_frame(fo, 0).bundle;
  const auto& k = f.calibration.k;
  const int cu = static_cast<int>(std::lround(k.cx())), cv = static_cast<int>(std::lround(k.cy()));
  DistributionPrediction ahead{ProbabilityGrid::delta(f.width(), f.height(), cu, cv), 1, PredictionSource::External};
  SeededRng rng(99);
  const auto one = synthesize_frame(f, ahead, spec, rng, {});
  const double bound = 10.0 / std::cos(spec.azimuth_max);
  bool ahead_ok = one.datagram.size() == 1;
  if (ahead_ok) {
    const auto& s = one.datagram.signals[0];
    v_ahead = s.v;
    ahead_ok = std::abs(s.theta) < 1e-12 && std::abs(s.phi) < 1e-12;
  }
  o.detail << n << " signals, r in [" << r_min << ", " << r_max << "] vs [10, " << bound << "], straight-ahead v "
           << std::setprecision(17) << v_ahead;
  o.require(n > 0 && r_min >= 10.0 - 1e-9 && r_max <= bound, "ranges within wall bounds");
  o.require(ahead_ok && std::abs(v_ahead + 10.0) <= 1e-9, "straight-ahead Doppler -10");
}

void ac10(Outcome& o) {
  SeededRng rng(1010);
  RadarDatagram d;
  for (int i = 0; i < 500; ++i)
    d.signals.push_back({rng.uniform(0.1, 100), rng.uniform(-kPi, kPi), rng.uniform(-1.5, 1.5), rng.normal(0, 20),
                         i % 7 == 0 ? std::optional<double>() : std::optional<double>(rng.normal(0, 30))});
  const auto back = io::parse_datagram_csv(io::format_datagram_csv(d));
  double worst = back.size() == d.size() ? 0.0 : 1.0;
  bool rss_presence = back.size() == d.size();
  for (std::size_t i = 0; i < std::min(back.size(), d.size()); ++i) {
    const auto &a = d.signals[i], &b = back.signals[i];
    worst = std::max({worst, rf_test::relative_error(a.r, b.r), rf_test::relative_error(a.theta, b.theta),
                      rf_test::relative_error(a.phi, b.phi), rf_test::relative_error(a.v, b.v)});
    rss_presence = rss_presence && a.rss.has_value() == b.rss.has_value();
    if (a.rss && b.rss) worst = std::max(worst, rf_test::relative_error(*a.rss, *b.rss));
  }

  RssNet net(RssNetConfig{});
  rf_test::randomize(net, 10);
  const auto model = net.encode();
  const bool model_ok = RssNet::decode(model).encode() == model;

  const auto grid = bumpy(64, 48);
  const auto grid_bytes = io::encode_grid(grid);
  const bool grid_ok = io::encode_grid(io::decode_grid(grid_bytes)) == grid_bytes;

  // PGM bytes -> grid -> PGM bytes -> grid
  std::vector<std::uint8_t> pgm(64 * 48);
  for (auto& b : pgm) b = static_cast<std::uint8_t>(rng.uniform_index(256));
  pgm[0] = 255;
  const auto g1 = grid_from_grayscale<std::uint8_t>(64, 48, pgm);
  const auto exported = export_grayscale(g1, GrayscaleMode::MaxNorm);
  const auto g2 = grid_from_grayscale<std::uint8_t>(64, 48, exported.as_bytes());
  const double kl = kl_divergence(g1, g2);

  o.detail << "CSV max rel " << worst << ", model " << (model_ok ? "byte-exact" : "differs") << ", grid "
           << (grid_ok ? "byte-exact" : "differs") << ", PGM KL " << kl;
  o.require(worst <= 1e-9 && rss_presence, "CSV");
  o.require(model_ok, "model");
  o.require(grid_ok, "grid");
  o.require(kl < 1e-3, "PGM");
}

void ac11(Outcome& o, const std::string& work) {
  const std::string dir = work + "/ac11";
  fs::create_directories(dir);
  bool ran = cli(dir, "make-fixture --scene street --frames 6 --out-dir ds") == 0;
  ran = ran && cli(dir, "synth --manifest ds/manifest.txt --predictor oracle --noise 0.05 --jitter --seed 11 --jobs 1 "
                        "--out-dir j1") == 0;
  ran = ran && cli(dir, "synth --manifest ds/manifest.txt --predictor oracle --noise 0.05 --jitter --seed 11 --jobs 8 "
                        "--out-dir j8") == 0;
  o.require(ran, "runs exit 0");
  std::size_t files = 0, equal = 0;
  if (ran)
    for (const auto& e : fs::directory_iterator(dir + "/j1")) {
      ++files;
      const auto other = dir + "/j8/" + e.path().filename().string();
      equal += fs::exists(other) && slurp(e.path().string()) == slurp(other);
    }
  o.detail << equal << "/" << files << " output files identical";
  o.require(files > 0 && equal == files, "byte-identical");
}

}  // namespace

int main() {
  const std::string work = (fs::temp_directory_path() / ("radar_forge_acceptance_" + std::to_string(::getpid()))).string();
  fs::remove_all(work);
  fs::create_directories(work);

  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria{
      {"geometry round trips", ac1},
      {"rasterization oracle", ac2},
      {"KL hand values", ac3},
      {"sampler fidelity", ac4},
      {"range image bit-exactness", ac5},
      {"gradient checks", ac6},
      {"RSS overfit", ac7},
      {"oracle end-to-end", [&](Outcome& o) { ac8(o, work); }},
      {"wall scene physics", ac9},
      {"format round trips", ac10},
      {"jobs determinism", [&](Outcome& o) { ac11(o, work); }},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    failed += !o.pass;
    std::cout << "AC" << (i + 1) << " " << (o.pass ? "PASS" : "FAIL") << "  " << criteria[i].first << ": "
              << o.detail.str() << std::endl;
  }
  fs::remove_all(work);
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
