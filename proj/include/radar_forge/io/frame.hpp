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

#include <optional>
#include <string>
#include <vector>

#include "radar_forge/io/calibration.hpp"
#include "radar_forge/io/datagram_csv.hpp"
#include "radar_forge/io/image.hpp"
#include "radar_forge/io/lidar.hpp"
#include "radar_forge/io/manifest.hpp"

namespace radar_forge {

/// Everything one time step provides to the simulator.
struct FrameBundle {
  std::string id;
  RgbImage image;
  std::vector<CartesianPoint3> lidar;  // lidar frame
  Vec3 ego_velocity = Vec3::Zero();    // radar frame, m/s
  Calibration calibration;
  std::optional<RadarDatagram> ground_truth;
  ObjectVelocityMap object_velocities;

  FrameBundle(std::string frame_id, RgbImage img, std::vector<CartesianPoint3> cloud, Vec3 ego, Calibration calib)
      : id(std::move(frame_id)),
        image(std::move(img)),
        lidar(std::move(cloud)),
        ego_velocity(ego),
        calibration(std::move(calib)) {}

  int width() const { return image.width; }
  int height() const { return image.height; }
};

namespace io {

/// Loads and validates every file of a frame up front.
inline FrameBundle load_frame(const FrameDescriptor& desc) {
  if (!desc.ego_velocity.allFinite()) throw Error(ErrorKind::NonFinite, desc.id + ": ego velocity must be finite");
  FrameBundle frame(desc.id, load_image(desc.image), load_lidar_bin(desc.lidar), desc.ego_velocity,
                    load_calibration(desc.calibration));
  if (desc.radar) frame.ground_truth = read_datagram_csv(*desc.radar, desc.id);
  if (desc.object_velocities)
    frame.object_velocities = parse_object_velocity_csv(read_file_text(*desc.object_velocities), *desc.object_velocities);
  return frame;
}

}  // namespace io
}  // namespace radar_forge
