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
#include <cstdint>
#include <span>
#include <vector>

#include "radar_forge/error.hpp"
#include "radar_forge/geometry.hpp"
#include "radar_forge/io/image.hpp"

namespace radar_forge {

/// Square RGB crop of side 2 * r_c around an anchor pixel, HWC layout.
/// Row 0 / column 0 correspond to anchor - r_c + 1; pixels outside the
/// source image are zero.
struct ImagePatch {
  int side = 0;
  int anchor_u = 0;
  int anchor_v = 0;
  std::vector<std::uint8_t> data;

  const std::uint8_t* pixel(int col, int row) const { return data.data() + (static_cast<std::size_t>(row) * side + col) * 3; }
};

inline ImagePatch extract_patch(const RgbImage& image, double u, double v, int r_c) {
  if (r_c <= 0) throw Error(ErrorKind::OutOfRange, "patch radius must be positive");
  if (!in_image({u, v}, image.width, image.height))
    throw Error(ErrorKind::AnchorOutOfImage, "patch anchor lies outside the image");
  ImagePatch patch;
  patch.side = 2 * r_c;
  patch.anchor_u = static_cast<int>(std::lround(u));
  patch.anchor_v = static_cast<int>(std::lround(v));
  patch.data.assign(static_cast<std::size_t>(patch.side) * patch.side * 3, 0);
  const int u0 = patch.anchor_u - r_c + 1;
  const int v0 = patch.anchor_v - r_c + 1;
  for (int row = 0; row < patch.side; ++row) {
    const int sv = v0 + row;
    if (sv < 0 || sv >= image.height) continue;
    const int c_lo = std::max(0, -u0);
    const int c_hi = std::min(patch.side, image.width - u0);
    if (c_lo >= c_hi) continue;
    std::copy_n(image.pixel(u0 + c_lo, sv), static_cast<std::size_t>(c_hi - c_lo) * 3,
                patch.data.data() + (static_cast<std::size_t>(row) * patch.side + c_lo) * 3);
  }
  return patch;
}

/// Points within Euclidean distance r_l (inclusive) of the anchor.
inline std::vector<CartesianPoint3> local_cloud(std::span<const CartesianPoint3> cloud, const CartesianPoint3& anchor,
                                                double r_l) {
  if (!(r_l > 0.0)) throw Error(ErrorKind::OutOfRange, "neighbourhood radius must be positive");
  std::vector<CartesianPoint3> out;
  const double r2 = r_l * r_l;
  for (const auto& p : cloud)
    if ((p - anchor).squaredNorm() <= r2) out.push_back(p);
  return out;
}

/// w x h grayscale encoding of a local neighbourhood seen along the radar
/// x axis. Value 127 marks the anchor depth; farther points are brighter.
/// Cells nobody maps to hold 0 and are flagged invalid in `mask`.
struct RangeImage {
  int width = 0;
  int height = 0;
  double r_l = 1.0;
  CartesianPoint3 anchor = CartesianPoint3::Zero();
  std::vector<std::uint8_t> values;
  std::vector<std::uint8_t> mask;  // 1 where at least one point landed

  std::uint8_t at(int u, int v) const { return values[static_cast<std::size_t>(v) * width + u]; }
  bool valid(int u, int v) const { return mask[static_cast<std::size_t>(v) * width + u] != 0; }

  GrayImage as_gray() const {
    GrayImage g(width, height);
    g.data = values;
    return g;
  }
};

inline RangeImage build_range_image(std::span<const CartesianPoint3> local, const CartesianPoint3& anchor, double r_l,
                                    int w, int h) {
  if (w <= 0 || h <= 0) throw Error(ErrorKind::OutOfRange, "range image dimensions must be positive");
  if (!(r_l > 0.0)) throw Error(ErrorKind::OutOfRange, "neighbourhood radius must be positive");
  const std::size_t cells = static_cast<std::size_t>(w) * h;
  std::vector<std::int64_t> sum(cells, 0);
  std::vector<std::int64_t> count(cells, 0);
  const double anchor_range = anchor.norm();

  for (const auto& l : local) {
    const double fu = std::floor(0.5 * (1.0 - (l.y() - anchor.y()) / r_l) * w);
    const double fv = std::floor((1.0 - (l.z() - anchor.z() + r_l) / (2.0 * r_l)) * h);
    const int u = static_cast<int>(std::clamp(fu, 0.0, static_cast<double>(w - 1)));
    const int v = static_cast<int>(std::clamp(fv, 0.0, static_cast<double>(h - 1)));

    const double scaled = (l - anchor).norm() / (2.0 * r_l) * 255.0;
    const double gray = l.norm() >= anchor_range ? 127.0 + std::ceil(scaled) : 127.0 - std::floor(scaled);
    const std::size_t idx = static_cast<std::size_t>(v) * w + u;
    sum[idx] += static_cast<std::int64_t>(std::clamp(gray, 0.0, 255.0));
    ++count[idx];
  }

  RangeImage img;
  img.width = w;
  img.height = h;
  img.r_l = r_l;
  img.anchor = anchor;
  img.values.assign(cells, 0);
  img.mask.assign(cells, 0);
  for (std::size_t i = 0; i < cells; ++i) {
    if (count[i] == 0) continue;
    // round half up: floor(sum / count + 1/2)
    img.values[i] = static_cast<std::uint8_t>((2 * sum[i] + count[i]) / (2 * count[i]));
    img.mask[i] = 1;
  }
  return img;
}

}  // namespace radar_forge
