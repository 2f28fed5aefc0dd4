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
#include <sstream>
#include <string>
#include <vector>

#include "radar_forge/error.hpp"
#include "radar_forge/geometry.hpp"
#include "radar_forge/gt_distribution.hpp"
#include "radar_forge/io/calibration.hpp"
#include "radar_forge/io/image.hpp"
#include "radar_forge/io/text.hpp"
#include "radar_forge/radar_types.hpp"

namespace radar_forge::vis {

/// Max-normalized 8-bit heatmap of a grid.
inline GrayImage heatmap(const ProbabilityGrid& grid) {
  const auto ex = export_grayscale(grid, GrayscaleMode::MaxNorm);
  GrayImage g(ex.width, ex.height);
  g.data = ex.as_bytes();
  return g;
}

/// Keeps about `fraction` of n items, evenly spread: item i is kept when
/// floor((i + 1) f) > floor(i f).
inline std::vector<std::size_t> subsample_indices(std::size_t n, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw Error(ErrorKind::OutOfRange, "subsample fraction must be in (0, 1]");
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < n; ++i)
    if (std::floor((i + 1) * fraction) > std::floor(i * fraction)) keep.push_back(i);
  return keep;
}

struct OverlayLayer {
  const RadarDatagram* datagram = nullptr;
  std::string color;
  std::string label;
};

/// SVG with the camera image as runs of flat-colour rectangles and one
/// circle per projected signal of each layer (signals that fall off the
/// image are skipped).
inline std::string overlay_svg(const RgbImage& image, const Calibration& cal, const std::vector<OverlayLayer>& layers,
                               double fraction = 1.0, double radius = 0.6) {
  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << image.width * 8 << "\" height=\"" << image.height * 8
     << "\" viewBox=\"-0.5 -0.5 " << image.width << ' ' << image.height << "\">\n";
  os << "<g id=\"image\" shape-rendering=\"crispEdges\">\n";
  for (int v = 0; v < image.height; ++v) {
    int u = 0;
    while (u < image.width) {
      const auto* p = image.pixel(u, v);
      int end = u + 1;
      while (end < image.width) {
        const auto* q = image.pixel(end, v);
        if (q[0] != p[0] || q[1] != p[1] || q[2] != p[2]) break;
        ++end;
      }
      os << "<rect x=\"" << u - 0.5 << "\" y=\"" << v - 0.5 << "\" width=\"" << end - u
         << "\" height=\"1\" fill=\"rgb(" << int(p[0]) << ',' << int(p[1]) << ',' << int(p[2]) << ")\"/>\n";
      u = end;
    }
  }
  os << "</g>\n";
  for (const auto& layer : layers) {
    if (!layer.datagram) continue;
    os << "<g id=\"" << layer.label << "\" fill=\"" << layer.color << "\" fill-opacity=\"0.8\">\n";
    for (std::size_t i : subsample_indices(layer.datagram->size(), fraction)) {
      const auto px =
          try_project_to_image(cal.k, cal.radar_to_camera, layer.datagram->signals[i].cartesian());
      if (!px || !in_image(*px, image.width, image.height)) continue;
      os << "<circle cx=\"" << io::format_double(px->u) << "\" cy=\"" << io::format_double(px->v) << "\" r=\""
         << radius << "\"/>\n";
    }
    os << "</g>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace radar_forge::vis
