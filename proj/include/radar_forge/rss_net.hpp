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
#include <array>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "radar_forge/encoders.hpp"
#include "radar_forge/error.hpp"
#include "radar_forge/geometry.hpp"
#include "radar_forge/io/binary.hpp"
#include "radar_forge/io/frame.hpp"
#include "radar_forge/nn/adam.hpp"
#include "radar_forge/nn/layers.hpp"
#include "radar_forge/nn/serialize.hpp"
#include "radar_forge/radar_types.hpp"
#include "radar_forge/rng.hpp"

namespace radar_forge {

/// Network shape and input/output normalization.
///
/// Patch branch:  avgpool(4) -> conv3x3/2 (3->8) -> relu -> conv3x3/2 (8->16) -> relu -> adaptive pool
/// Range branch:  avgpool(2) -> conv3x3/2 (2->8) -> relu -> conv3x3/2 (8->16) -> relu -> adaptive pool
/// Fusion:        concat (32 ch) -> conv1x1 (32->1) -> flatten -> fc (-> 32) -> relu
/// Point:         fc (4 -> 8) -> relu
/// Head:          concat (40) -> fc (40->16) -> relu -> fc (16->1)
///
/// The range branch takes two channels: encoded depth and its validity mask.
struct RssNetConfig {
  int patch_radius = 50;
  int range_width = 128;
  int range_height = 32;
  double r_l = 1.0;
  int patch_pool = 4;
  int range_pool = 2;
  int pooled_height = 4;
  int pooled_width = 4;
  int fused_features = 32;
  int point_features = 8;
  int hidden_features = 16;
  double a_min = 0.0;
  double a_max = 1.0;
  double position_scale = 1.0 / 50.0;  // applied to x, y, z
  double velocity_scale = 1.0 / 10.0;

  static constexpr int kBranchChannels = 16;
  static constexpr int kConcatChannels = 2 * kBranchChannels;

  int patch_side() const { return 2 * patch_radius; }

  void validate() const {
    if (patch_radius < 4) throw Error(ErrorKind::ShapeMismatch, "patch radius must be >= 4");
    if (range_width < 8 || range_height < 8) throw Error(ErrorKind::ShapeMismatch, "range image must be at least 8x8");
    if (!(r_l > 0.0)) throw Error(ErrorKind::OutOfRange, "r_l must be positive");
    if (patch_pool < 1 || range_pool < 1 || patch_side() / patch_pool < 2 || range_height / range_pool < 2 ||
        range_width / range_pool < 2)
      throw Error(ErrorKind::ShapeMismatch, "pooling leaves too small an input");
    if (pooled_height < 1 || pooled_width < 1 || fused_features < 1 || point_features < 1 || hidden_features < 1)
      throw Error(ErrorKind::ShapeMismatch, "layer widths must be positive");
    if (!(a_max > a_min)) throw Error(ErrorKind::DegenerateRange, "a_max must exceed a_min");
  }

  std::vector<double> to_metadata() const {
    return {static_cast<double>(patch_radius),   static_cast<double>(range_width),
            static_cast<double>(range_height),   r_l,
            static_cast<double>(patch_pool),     static_cast<double>(range_pool),
            static_cast<double>(pooled_height),  static_cast<double>(pooled_width),
            static_cast<double>(fused_features), static_cast<double>(point_features),
            static_cast<double>(hidden_features), a_min,
            a_max,                               position_scale,
            velocity_scale};
  }

  static RssNetConfig from_metadata(const std::vector<double>& m) {
    if (m.size() != 15) throw Error(ErrorKind::CorruptHeader, "RSS model metadata has the wrong length");
    for (double x : m)
      if (!std::isfinite(x)) throw Error(ErrorKind::CorruptHeader, "RSS model metadata is not finite");
    auto as_int = [&](std::size_t i) {
      if (m[i] < 0.0 || m[i] > 1e6 || m[i] != std::floor(m[i]))
        throw Error(ErrorKind::CorruptHeader, "RSS model metadata entry " + std::to_string(i) + " is not a size");
      return static_cast<int>(m[i]);
    };
    RssNetConfig c;
    c.patch_radius = as_int(0);
    c.range_width = as_int(1);
    c.range_height = as_int(2);
    c.r_l = m[3];
    c.patch_pool = as_int(4);
    c.range_pool = as_int(5);
    c.pooled_height = as_int(6);
    c.pooled_width = as_int(7);
    c.fused_features = as_int(8);
    c.point_features = as_int(9);
    c.hidden_features = as_int(10);
    c.a_min = m[11];
    c.a_max = m[12];
    c.position_scale = m[13];
    c.velocity_scale = m[14];
    c.validate();
    return c;
  }
};

/// One training or inference example for the RSS network.
struct RssSample {
  ImagePatch patch;
  RangeImage range_image;
  std::array<double, 4> point{};  // x, y, z (radar frame, m), Doppler (m/s)
  double target = 0.0;            // RSS in dataset units; ignored at inference
};

/// Batched network inputs.
struct RssBatch {
  nn::Tensor patch;  // (N, 3, side, side), scaled to [0, 1]
  nn::Tensor range;  // (N, 2, h, w): depth / 255 and validity mask
  nn::Tensor point;  // (N, 4, 1, 1), scaled

  int size() const { return patch.n(); }
};

inline RssBatch make_batch(std::span<const RssSample* const> samples, const RssNetConfig& cfg) {
  const int n = static_cast<int>(samples.size());
  const int side = cfg.patch_side();
  RssBatch b{nn::Tensor(n, 3, side, side), nn::Tensor(n, 2, cfg.range_height, cfg.range_width), nn::Tensor(n, 4, 1, 1)};
  for (int i = 0; i < n; ++i) {
    const auto& s = *samples[i];
    if (s.patch.side != side) throw Error(ErrorKind::ShapeMismatch, "patch side does not match the network");
    if (s.range_image.width != cfg.range_width || s.range_image.height != cfg.range_height)
      throw Error(ErrorKind::ShapeMismatch, "range image size does not match the network");
    for (int row = 0; row < side; ++row)
      for (int col = 0; col < side; ++col) {
        const auto* px = s.patch.pixel(col, row);
        for (int c = 0; c < 3; ++c) b.patch.at(i, c, row, col) = px[c] / 255.0;
      }
    for (int v = 0; v < cfg.range_height; ++v)
      for (int u = 0; u < cfg.range_width; ++u) {
        b.range.at(i, 0, v, u) = s.range_image.at(u, v) / 255.0;
        b.range.at(i, 1, v, u) = s.range_image.valid(u, v) ? 1.0 : 0.0;
      }
    for (int k = 0; k < 3; ++k) b.point.at(i, k, 0, 0) = s.point[k] * cfg.position_scale;
    b.point.at(i, 3, 0, 0) = s.point[3] * cfg.velocity_scale;
  }
  return b;
}

/// Predicts normalized RSS, (a - a_min) / (a_max - a_min), from the three
/// input modalities.
class RssNet {
 public:
  explicit RssNet(const RssNetConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    using namespace nn;
    patch_.add<AvgPool>(cfg_.patch_pool);
    patch_.add<Conv2d>(3, 8, 3, 2, 1);
    patch_.add<Activation>(ActivationKind::Relu);
    patch_.add<Conv2d>(8, RssNetConfig::kBranchChannels, 3, 2, 1);
    patch_.add<Activation>(ActivationKind::Relu);
    patch_.add<AdaptiveAvgPool>(cfg_.pooled_height, cfg_.pooled_width);

    range_.add<AvgPool>(cfg_.range_pool);
    range_.add<Conv2d>(2, 8, 3, 2, 1);
    range_.add<Activation>(ActivationKind::Relu);
    range_.add<Conv2d>(8, RssNetConfig::kBranchChannels, 3, 2, 1);
    range_.add<Activation>(ActivationKind::Relu);
    range_.add<AdaptiveAvgPool>(cfg_.pooled_height, cfg_.pooled_width);

    fuse_.add<Conv2d>(RssNetConfig::kConcatChannels, 1, 1, 1, 0);
    fuse_.add<Flatten>();
    fuse_.add<FullyConnected>(cfg_.pooled_height * cfg_.pooled_width, cfg_.fused_features);
    fuse_.add<Activation>(ActivationKind::Relu);

    point_.add<FullyConnected>(4, cfg_.point_features);
    point_.add<Activation>(ActivationKind::Relu);

    head_.add<FullyConnected>(cfg_.fused_features + cfg_.point_features, cfg_.hidden_features);
    head_.add<Activation>(ActivationKind::Relu);
    head_.add<FullyConnected>(cfg_.hidden_features, 1);
  }

  const RssNetConfig& config() const { return cfg_; }
  RssNetConfig& config() { return cfg_; }

  /// Glorot-uniform weights, zero biases, drawn in layer order.
  void init(std::uint64_t seed) {
    SeededRng rng(seed, 0x5253534eull);
    for (auto* seq : sequences())
      for (auto& layer : seq->layers()) {
        if (auto* conv = dynamic_cast<nn::Conv2d*>(layer.get())) conv->init(rng);
        if (auto* fc = dynamic_cast<nn::FullyConnected*>(layer.get())) fc->init(rng);
      }
  }

  /// (N, 1, 1, 1) normalized predictions.
  nn::Tensor forward(const RssBatch& b) {
    const nn::Tensor fp = patch_.forward(b.patch);
    const nn::Tensor fr = range_.forward(b.range);
    const nn::Tensor fused = fuse_.forward(nn::concat_channels(fp, fr));
    const nn::Tensor pt = point_.forward(b.point);
    nn::Tensor out = head_.forward(nn::concat_channels(fused, pt));
    out.require_finite("RSS network");
    return out;
  }

  /// Backpropagates d(loss)/d(output) through the graph of the last forward.
  void backward(const nn::Tensor& grad_out) {
    const nn::Tensor g_head = head_.backward(grad_out);
    auto [g_fused, g_point] = nn::split_channels(g_head, cfg_.fused_features);
    point_.backward_params(g_point);
    const nn::Tensor g_concat = fuse_.backward(g_fused);
    auto [g_patch, g_range] = nn::split_channels(g_concat, RssNetConfig::kBranchChannels);
    patch_.backward_params(g_patch);
    range_.backward_params(g_range);
  }

  std::vector<nn::Param*> params() {
    std::vector<nn::Param*> out;
    for (auto* seq : sequences())
      for (auto* p : seq->params()) out.push_back(p);
    return out;
  }

  std::size_t parameter_count() {
    std::size_t n = 0;
    for (auto* p : params()) n += p->value.size();
    return n;
  }

  double to_units(double normalized) const { return cfg_.a_min + normalized * (cfg_.a_max - cfg_.a_min); }
  double to_normalized(double units) const { return (units - cfg_.a_min) / (cfg_.a_max - cfg_.a_min); }

  /// Predictions in dataset units, evaluated in chunks.
  std::vector<double> predict(std::span<const RssSample> samples, std::size_t chunk = 32) {
    std::vector<double> out;
    out.reserve(samples.size());
    for (std::size_t start = 0; start < samples.size(); start += chunk) {
      const std::size_t end = std::min(samples.size(), start + chunk);
      std::vector<const RssSample*> ptrs;
      for (std::size_t i = start; i < end; ++i) ptrs.push_back(&samples[i]);
      const auto y = forward(make_batch(ptrs, cfg_));
      for (std::size_t i = 0; i < y.size(); ++i) out.push_back(to_units(y[i]));
    }
    return out;
  }

  double predict(const RssSample& sample) { return predict(std::span<const RssSample>(&sample, 1)).front(); }

  /// Final fully connected layer; exposed for inspection and tests.
  nn::FullyConnected& output_layer() { return static_cast<nn::FullyConnected&>(*head_.layers().back()); }

  std::vector<std::uint8_t> encode() const {
    std::vector<const nn::Layer*> layers;
    for (const auto* seq : sequences())
      for (const auto& l : seq->layers()) layers.push_back(l.get());
    return nn::encode_model(layers, cfg_.to_metadata());
  }

  static RssNet decode(std::span<const std::uint8_t> bytes) {
    auto decoded = nn::decode_model(bytes);
    RssNet net(RssNetConfig::from_metadata(decoded.metadata));
    std::size_t i = 0;
    for (auto* seq : net.sequences())
      for (auto& layer : seq->layers()) {
        if (i >= decoded.layers.size()) throw Error(ErrorKind::CorruptHeader, "model has too few layers");
        auto& stored = decoded.layers[i++];
        if (stored->kind() != layer->kind() || stored->hyper() != layer->hyper())
          throw Error(ErrorKind::ShapeMismatch, "stored layer " + std::to_string(i - 1) + " does not match the config");
        layer = std::move(stored);
      }
    if (i != decoded.layers.size()) throw Error(ErrorKind::CorruptHeader, "model has extra layers");
    return net;
  }

  void save(const std::string& path) const { io::write_file_bytes(path, encode()); }
  static RssNet load(const std::string& path) { return decode(io::read_file_bytes(path)); }

 private:
  std::array<nn::Sequential*, 5> sequences() { return {&patch_, &range_, &fuse_, &point_, &head_}; }
  std::array<const nn::Sequential*, 5> sequences() const { return {&patch_, &range_, &fuse_, &point_, &head_}; }

  RssNetConfig cfg_;
  nn::Sequential patch_, range_, fuse_, point_, head_;
};

/// Mean squared RSS error normalized by the RSS span.
inline double rss_loss(std::span<const double> predictions, std::span<const double> targets, double a_min, double a_max) {
  if (predictions.size() != targets.size()) throw Error(ErrorKind::LengthMismatch, "prediction/target count mismatch");
  if (!(a_max > a_min)) throw Error(ErrorKind::DegenerateRange, "a_max must exceed a_min");
  if (predictions.empty()) throw Error(ErrorKind::EmptyInput, "rss loss needs at least one signal");
  const double span = a_max - a_min;
  double sum = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double d = (targets[i] - predictions[i]) / span;
    sum += d * d;
  }
  return sum / static_cast<double>(predictions.size());
}

struct TrainOptions {
  int epochs = 100;
  double lr = 1e-4;
  std::uint64_t seed = 0;
  int batch_size = 0;              // 0 = full batch
  double stop_below = 0.0;         // stop once full-dataset loss drops below this (0 = never)
  bool freeze_normalization = false;  // keep config a_min/a_max instead of fitting them
};

struct LossRecord {
  long long step = 0;
  double loss = 0.0;
};

struct TrainResult {
  RssNet model;
  std::vector<LossRecord> history;  // entry 0 is the loss at initialization
};

/// Full-dataset loss in index order.
inline double evaluate_loss(RssNet& net, std::span<const RssSample> data) {
  const auto preds = net.predict(data);
  std::vector<double> targets;
  targets.reserve(data.size());
  for (const auto& s : data) targets.push_back(s.target);
  return rss_loss(preds, targets, net.config().a_min, net.config().a_max);
}

/// Adam on the normalized RSS loss. Deterministic for a given seed: weight
/// init and per-epoch shuffling both derive from it. The history holds the
/// full-dataset loss before training and after every epoch. With full batches
/// the training forward pass supplies those values directly.
inline TrainResult train(std::span<const RssSample> dataset, RssNetConfig cfg, const TrainOptions& opt) {
  if (dataset.empty()) throw Error(ErrorKind::EmptyDataset, "no RSS training samples");
  if (opt.epochs < 0) throw Error(ErrorKind::OutOfRange, "epochs must be >= 0");
  if (!opt.freeze_normalization) {
    const auto [lo, hi] = std::minmax_element(dataset.begin(), dataset.end(),
                                              [](const auto& a, const auto& b) { return a.target < b.target; });
    cfg.a_min = lo->target;
    cfg.a_max = hi->target;
  }
  if (!(cfg.a_max > cfg.a_min)) throw Error(ErrorKind::DegenerateRange, "training targets have zero spread");

  TrainResult result{RssNet(cfg), {}};
  RssNet& net = result.model;
  net.init(opt.seed);
  auto params = net.params();
  nn::AdamState adam(params, opt.lr);
  SeededRng shuffle_rng(opt.seed, 0x53485546ull);

  const std::size_t n = dataset.size();
  const std::size_t batch = opt.batch_size <= 0 ? n : std::min<std::size_t>(n, static_cast<std::size_t>(opt.batch_size));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  const bool full_batch = batch == n;
  if (!full_batch) result.history.push_back({0, evaluate_loss(net, dataset)});
  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    if (!full_batch && opt.stop_below > 0.0 && result.history.back().loss < opt.stop_below) break;
    if (!full_batch)
      for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[shuffle_rng.uniform_index(i + 1)]);
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t end = std::min(n, start + batch);
      std::vector<const RssSample*> ptrs;
      for (std::size_t i = start; i < end; ++i) ptrs.push_back(&dataset[order[i]]);
      const RssBatch b = make_batch(ptrs, net.config());
      nn::zero_grads(params);
      const nn::Tensor y = net.forward(b);
      nn::Tensor grad(y.shape());
      const double m = static_cast<double>(ptrs.size());
      std::vector<double> units(ptrs.size()), targets(ptrs.size());
      for (std::size_t i = 0; i < ptrs.size(); ++i) {
        const double d = y[i] - net.to_normalized(ptrs[i]->target);
        grad[i] = 2.0 * d / m;
        units[i] = net.to_units(y[i]);
        targets[i] = ptrs[i]->target;
      }
      if (full_batch) {
        // the full-batch forward is the loss of the current weights; computed
        // exactly as evaluate_loss does so the history has one definition
        const double loss = rss_loss(units, targets, net.config().a_min, net.config().a_max);
        result.history.push_back({adam.t, loss});
        if (opt.stop_below > 0.0 && loss < opt.stop_below) return result;
      }
      net.backward(grad);
      nn::adam_step(params, adam);
    }
    if (!full_batch) result.history.push_back({adam.t, evaluate_loss(net, dataset)});
  }
  if (full_batch) result.history.push_back({adam.t, evaluate_loss(net, dataset)});
  return result;
}

/// Builds network inputs for a signal at radar-frame position `point`
/// (Doppler `v`). The anchor pixel is the point's projection, clamped onto
/// the image when parallax pushes it just outside.
inline RssSample make_rss_sample(const FrameBundle& frame, std::span<const CartesianPoint3> cloud_radar,
                                 const CartesianPoint3& point, double v, const RssNetConfig& cfg) {
  const auto px = try_project_to_image(frame.calibration.k, frame.calibration.radar_to_camera, point);
  if (!px) throw Error(ErrorKind::AnchorOutOfImage, frame.id + ": signal projects behind the camera");
  const double u = std::clamp(px->u, 0.0, frame.width() - 1.0);
  const double vv = std::clamp(px->v, 0.0, frame.height() - 1.0);
  RssSample s;
  s.patch = extract_patch(frame.image, u, vv, cfg.patch_radius);
  const auto local = local_cloud(cloud_radar, point, cfg.r_l);
  s.range_image = build_range_image(local, point, cfg.r_l, cfg.range_width, cfg.range_height);
  s.point = {point.x(), point.y(), point.z(), v};
  return s;
}

inline std::vector<CartesianPoint3> lidar_in_radar_frame(const FrameBundle& frame) {
  std::vector<CartesianPoint3> out;
  out.reserve(frame.lidar.size());
  for (const auto& p : frame.lidar) out.push_back(frame.calibration.lidar_to_radar.apply(p));
  return out;
}

/// Fills the RSS field of every signal.
inline RadarDatagram predict_datagram_rss(const RadarDatagram& datagram, const FrameBundle& frame, RssNet& model) {
  RadarDatagram out = datagram;
  if (out.signals.empty()) return out;
  const auto cloud = lidar_in_radar_frame(frame);
  std::vector<RssSample> samples;
  samples.reserve(out.signals.size());
  for (const auto& s : out.signals) samples.push_back(make_rss_sample(frame, cloud, s.cartesian(), s.v, model.config()));
  const auto rss = model.predict(samples);
  for (std::size_t i = 0; i < out.signals.size(); ++i) out.signals[i].rss = rss[i];
  return out;
}

}  // namespace radar_forge
