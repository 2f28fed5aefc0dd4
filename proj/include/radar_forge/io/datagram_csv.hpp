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

#include <string>

#include "radar_forge/error.hpp"
#include "radar_forge/io/binary.hpp"
#include "radar_forge/io/text.hpp"
#include "radar_forge/radar_types.hpp"

namespace radar_forge::io {

inline constexpr std::string_view kDatagramHeader = "r,theta,phi,v,rss";

/// One row per signal; values use the shortest exact decimal form, so a
/// write/read cycle reproduces every double bit for bit. Missing RSS is an
/// empty field.
inline std::string format_datagram_csv(const RadarDatagram& d) {
  std::string out(kDatagramHeader);
  out += '\n';
  for (const auto& s : d.signals) {
    out += format_double(s.r) + ',' + format_double(s.theta) + ',' + format_double(s.phi) + ',' + format_double(s.v) + ',';
    if (s.rss) out += format_double(*s.rss);
    out += '\n';
  }
  return out;
}

inline RadarDatagram parse_datagram_csv(std::string_view text, std::string frame_id = {},
                                        const std::string& origin = "<datagram>") {
  RadarDatagram d;
  d.frame_id = std::move(frame_id);
  const auto lines = split(text, '\n');
  std::size_t i = 0;
  while (i < lines.size() && trim(lines[i]).empty()) ++i;
  if (i == lines.size() || trim(lines[i]) != kDatagramHeader)
    throw Error(ErrorKind::ParseError, origin + ": expected header '" + std::string(kDatagramHeader) + "'");
  for (++i; i < lines.size(); ++i) {
    const auto line = trim(lines[i]);
    if (line.empty()) continue;
    const std::string where = origin + ": row " + std::to_string(i + 1);
    const auto fields = split(line, ',');
    if (fields.size() != 5) throw Error(ErrorKind::ParseError, where + ": expected 5 fields");
    double vals[4];
    for (int f = 0; f < 4; ++f) {
      const auto v = parse_double(fields[f]);
      if (!v) throw Error(ErrorKind::ParseError, where + ": bad number '" + std::string(fields[f]) + "'");
      vals[f] = *v;
    }
    RadarSignal s{vals[0], vals[1], vals[2], vals[3], std::nullopt};
    if (!trim(fields[4]).empty()) {
      const auto rss = parse_double(fields[4]);
      if (!rss) throw Error(ErrorKind::ParseError, where + ": bad rss '" + std::string(fields[4]) + "'");
      s.rss = *rss;
    }
    if (const auto problem = signal_violation(s); !problem.empty())
      throw Error(ErrorKind::RangeViolation, where + ": " + problem);
    d.signals.push_back(s);
  }
  return d;
}

inline RadarDatagram read_datagram_csv(const std::string& path, std::string frame_id = {}) {
  return parse_datagram_csv(read_file_text(path), std::move(frame_id), path);
}

inline void write_datagram_csv(const std::string& path, const RadarDatagram& d) {
  write_file_text(path, format_datagram_csv(d));
}

inline constexpr std::string_view kObjectVelocityHeader = "u_min,v_min,u_max,v_max,vx,vy,vz";

inline ObjectVelocityMap parse_object_velocity_csv(std::string_view text, const std::string& origin = "<objvel>") {
  std::vector<ObjectVelocityMap::Region> regions;
  const auto lines = split(text, '\n');
  std::size_t i = 0;
  while (i < lines.size() && trim(lines[i]).empty()) ++i;
  if (i == lines.size() || trim(lines[i]) != kObjectVelocityHeader)
    throw Error(ErrorKind::ParseError, origin + ": expected header '" + std::string(kObjectVelocityHeader) + "'");
  for (++i; i < lines.size(); ++i) {
    const auto line = trim(lines[i]);
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    const std::string where = origin + ": row " + std::to_string(i + 1);
    if (fields.size() != 7) throw Error(ErrorKind::ParseError, where + ": expected 7 fields");
    double v[7];
    for (int f = 0; f < 7; ++f) {
      const auto x = parse_double(fields[f]);
      if (!x) throw Error(ErrorKind::ParseError, where + ": bad number");
      v[f] = *x;
    }
    regions.push_back({v[0], v[1], v[2], v[3], Vec3(v[4], v[5], v[6])});
  }
  return ObjectVelocityMap(std::move(regions));
}

inline std::string format_object_velocity_csv(const ObjectVelocityMap& map) {
  std::string out(kObjectVelocityHeader);
  out += '\n';
  for (const auto& r : map.regions()) {
    out += format_double(r.u_min) + ',' + format_double(r.v_min) + ',' + format_double(r.u_max) + ',' +
           format_double(r.v_max) + ',' + format_double(r.velocity.x()) + ',' + format_double(r.velocity.y()) + ',' +
           format_double(r.velocity.z()) + '\n';
  }
  return out;
}

}  // namespace radar_forge::io
