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

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "radar_forge/io/binary.hpp"
#include "radar_forge/nn/layers.hpp"

namespace radar_forge::nn {

inline constexpr std::uint32_t kModelFormatVersion = 1;

/// Binary layout, all little-endian:
///   "RFNN", u32 version, u32 layer count, then per layer
///     u8 kind, u32 hyper count, u32 hyper[...],
///     u32 tensor count, per tensor: u32 rank, u32 dims[rank], f64 data[...]
///   then u32 metadata count, f64 metadata[...].
/// Metadata carries model-level settings the layer list cannot express.
inline std::vector<std::uint8_t> encode_model(const std::vector<const Layer*>& layers, const std::vector<double>& metadata) {
  std::vector<std::uint8_t> out;
  io::put_bytes(out, "RFNN");
  io::put_u32(out, kModelFormatVersion);
  io::put_u32(out, static_cast<std::uint32_t>(layers.size()));
  for (const auto* layer : layers) {
    io::put_u8(out, static_cast<std::uint8_t>(layer->kind()));
    const auto hyper = layer->hyper();
    io::put_u32(out, static_cast<std::uint32_t>(hyper.size()));
    for (auto h : hyper) io::put_u32(out, h);
    const auto params = const_cast<Layer*>(layer)->params();
    io::put_u32(out, static_cast<std::uint32_t>(params.size()));
    for (const auto* p : params) {
      const auto& shape = p->value.shape();
      io::put_u32(out, 4);
      for (int d : shape) io::put_u32(out, static_cast<std::uint32_t>(d));
      for (double v : p->value.values()) io::put_f64(out, v);
    }
  }
  io::put_u32(out, static_cast<std::uint32_t>(metadata.size()));
  for (double m : metadata) io::put_f64(out, m);
  return out;
}

inline std::unique_ptr<Layer> make_layer(LayerKind kind, const std::vector<std::uint32_t>& h) {
  auto need = [&](std::size_t n) {
    if (h.size() != n) throw Error(ErrorKind::CorruptHeader, "layer hyperparameter count mismatch");
  };
  auto i = [&](std::size_t k) { return static_cast<int>(h[k]); };
  switch (kind) {
    case LayerKind::Conv2d: need(5); return std::make_unique<Conv2d>(i(0), i(1), i(2), i(3), i(4));
    case LayerKind::FullyConnected: need(2); return std::make_unique<FullyConnected>(i(0), i(1));
    case LayerKind::Activation:
      need(1);
      if (h[0] > 2) throw Error(ErrorKind::CorruptHeader, "unknown activation");
      return std::make_unique<Activation>(static_cast<ActivationKind>(h[0]));
    case LayerKind::AvgPool: need(1); return std::make_unique<AvgPool>(i(0));
    case LayerKind::AdaptiveAvgPool: need(2); return std::make_unique<AdaptiveAvgPool>(i(0), i(1));
    case LayerKind::Flatten: need(0); return std::make_unique<Flatten>();
  }
  throw Error(ErrorKind::CorruptHeader, "unknown layer kind " + std::to_string(static_cast<int>(kind)));
}

struct DecodedModel {
  std::vector<std::unique_ptr<Layer>> layers;
  std::vector<double> metadata;
};

inline DecodedModel decode_model(std::span<const std::uint8_t> bytes) {
  io::ByteReader r(bytes);
  if (r.bytes(4) != "RFNN") throw Error(ErrorKind::CorruptHeader, "bad model magic");
  if (const auto version = r.u32(); version != kModelFormatVersion)
    throw Error(ErrorKind::UnsupportedFormat, "model format version " + std::to_string(version));
  DecodedModel model;
  const auto count = r.u32();
  for (std::uint32_t li = 0; li < count; ++li) {
    const auto kind = static_cast<LayerKind>(r.u8());
    const auto hyper_count = r.u32();
    if (hyper_count > 16) throw Error(ErrorKind::CorruptHeader, "too many hyperparameters");
    std::vector<std::uint32_t> hyper(hyper_count);
    for (auto& h : hyper) {
      h = r.u32();
      if (h > 65536) throw Error(ErrorKind::CorruptHeader, "implausible layer hyperparameter");
    }
    auto layer = make_layer(kind, hyper);
    const auto params = layer->params();
    if (r.u32() != params.size()) throw Error(ErrorKind::CorruptHeader, "tensor count does not match layer kind");
    for (auto* p : params) {
      if (r.u32() != 4) throw Error(ErrorKind::CorruptHeader, "expected rank-4 tensors");
      Tensor::Shape shape{};
      for (auto& d : shape) d = static_cast<int>(r.u32());
      if (shape != p->value.shape()) throw Error(ErrorKind::ShapeMismatch, "stored tensor shape disagrees with layer");
      for (auto& v : p->value.values()) v = r.f64();
      p->value.require_finite("model file");
    }
    model.layers.push_back(std::move(layer));
  }
  const auto meta_count = r.u32();
  if (static_cast<std::size_t>(meta_count) * 8 > r.remaining()) throw Error(ErrorKind::TruncatedFile, "metadata is truncated");
  model.metadata.resize(meta_count);
  for (auto& m : model.metadata) m = r.f64();
  if (!r.at_end()) throw Error(ErrorKind::CorruptHeader, "trailing bytes after model");
  return model;
}

}  // namespace radar_forge::nn
