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

#include <cstring>

#include "radar_forge/fixture.hpp"
#include "radar_forge/io/frame.hpp"
#include "radar_forge/io/grid_io.hpp"
#include "radar_forge/sampler.hpp"
#include "test_util.hpp"

using namespace radar_forge;
using namespace radar_forge::io;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::IoError;
}

const char* kIdentityCalib =
    "K: 100 0 32 0 100 24 0 0 1\n"
    "T_LD: 1 0 0 0 0 1 0 0 0 0 1 0 0 0 0 1\n"
    "T_CD: 1 0 0 0 0 1 0 0 0 0 1 0 0 0 0 1\n";

std::string minimal_manifest() {
  return "dataset = tiny\n"
         "[frame a]\n"
         "image = images/a.ppm\n"
         "lidar = lidar/a.bin\n"
         "calibration = calib/a.txt\n"
         "ego_velocity = 1, 2, 3\n";
}

}  // namespace

TEST(Text, ParseNumbers) {
  EXPECT_EQ(parse_double(" 1.5 "), 1.5);
  EXPECT_FALSE(parse_double("1.5x").has_value());
  EXPECT_FALSE(parse_double("").has_value());
  EXPECT_EQ(parse_int("42"), 42);
  EXPECT_FALSE(parse_int("4.2").has_value());
  EXPECT_EQ(*parse_double(format_double(0.1 + 0.2)), 0.1 + 0.2);
}

TEST(Manifest, MinimalFrame) {
  const auto d = parse_manifest(minimal_manifest(), "/data");
  EXPECT_EQ(d.name, "tiny");
  ASSERT_EQ(d.frames.size(), 1u);
  EXPECT_EQ(d.frames[0].id, "a");
  EXPECT_EQ(d.frames[0].image, "/data/images/a.ppm");
  EXPECT_EQ(d.frames[0].ego_velocity, Vec3(1, 2, 3));
  EXPECT_FALSE(d.frames[0].radar.has_value());
  EXPECT_FALSE(d.sigma.has_value());
  EXPECT_EQ(d.sigma_neighbors, 8);
  EXPECT_EQ(d.spec.n_max, 661);
}

TEST(Manifest, MissingKeyIsNamed) {
  std::string text = minimal_manifest();
  text.erase(text.find("calibration"), std::strlen("calibration = calib/a.txt\n"));
  try {
    parse_manifest(text, "/data");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ParseError);
    EXPECT_NE(std::string(e.what()).find("calibration"), std::string::npos);
  }
}

TEST(Manifest, Rejections) {
  const std::string dup = minimal_manifest() + "[frame a]\nimage = x\nlidar = y\ncalibration = z\nego_velocity = 0,0,0\n";
  EXPECT_EQ(kind_of([&] { parse_manifest(dup, "."); }), ErrorKind::ParseError);
  EXPECT_EQ(kind_of([&] { parse_manifest("bogus = 1\n", "."); }), ErrorKind::ParseError);
  EXPECT_EQ(kind_of([&] { parse_manifest("n_max = 0\n", "."); }), ErrorKind::ParseError);
  EXPECT_EQ(kind_of([&] { parse_manifest("sigma = 1, -2, 1\n", "."); }), ErrorKind::ParseError);
  EXPECT_EQ(kind_of([&] { parse_manifest("azimuth_fov_deg = 10, -10\n", "."); }), ErrorKind::ParseError);
  EXPECT_EQ(kind_of([&] { parse_manifest("[frame x\n", "."); }), ErrorKind::ParseError);
  EXPECT_EQ(kind_of([&] { parse_manifest("max_range = 1\nmax_range = 2\n", "."); }), ErrorKind::ParseError);
}

TEST(Manifest, GlobalKeysAndRoundTrip) {
  const std::string text =
      "dataset = demo\ndelta1_deg = 2\ndelta2_deg = 0.5\nmax_range = 80\nazimuth_fov_deg = -40, 45\n"
      "elevation_fov_deg = -10, 12\nn_max = 300\nsigma = 3, 2\nsigma_neighbors = 5\nseed = 99\n" +
      minimal_manifest().substr(minimal_manifest().find("[frame")) + "radar = radar/a.csv\n";
  const auto d = parse_manifest(text, "/data");
  EXPECT_NEAR(d.spec.delta1, deg_to_rad(2), 1e-15);
  EXPECT_EQ(d.spec.max_range, 80);
  EXPECT_EQ(d.spec.n_max, 300);
  ASSERT_TRUE(d.sigma.has_value());
  EXPECT_EQ(d.sigma->matrix()(0, 0), 9.0);
  EXPECT_EQ(d.sigma->matrix()(1, 1), 4.0);
  EXPECT_EQ(d.sigma_neighbors, 5);
  EXPECT_EQ(d.seed, 99u);
  const std::string printed = format_manifest(d);
  EXPECT_NE(printed.find("azimuth_fov_deg = -40, 45"), std::string::npos);
  EXPECT_EQ(format_manifest(parse_manifest(printed, "/data")), printed);
}

TEST(Lidar, DecodeCases) {
  std::vector<std::uint8_t> one;
  for (float f : {1.0f, 2.0f, 3.0f, 0.5f}) put_u32(one, std::bit_cast<std::uint32_t>(f));
  const auto cloud = decode_lidar_bin(one);
  ASSERT_EQ(cloud.size(), 1u);
  EXPECT_EQ(cloud[0], CartesianPoint3(1, 2, 3));
  EXPECT_TRUE(decode_lidar_bin({}).empty());
  one.push_back(0);
  EXPECT_EQ(kind_of([&] { decode_lidar_bin(one); }), ErrorKind::TruncatedFile);
}

TEST(Lidar, FileRoundTrip) {
  rf_test::TempDir dir("lidar");
  const std::vector<CartesianPoint3> cloud{{1.25, -2.5, 0.125}, {100, 0, -3}};
  save_lidar_bin(dir / "c.bin", cloud);
  EXPECT_EQ(load_lidar_bin(dir / "c.bin"), cloud);
  EXPECT_EQ(kind_of([&] { load_lidar_bin(dir / "missing.bin"); }), ErrorKind::IoError);
}

TEST(Image, NetpbmCases) {
  rf_test::TempDir dir("img");
  const std::string p6 = std::string("P6\n# c\n2 2\n255\n") + std::string("\x01\x02\x03\x04\x05\x06\x07\x08\x09\x0a\x0b\x0c", 12);
  write_file_text(dir / "a.ppm", p6);
  const auto img = load_image(dir / "a.ppm");
  ASSERT_EQ(img.width, 2);
  EXPECT_EQ(img.pixel(1, 1)[2], 12);
  EXPECT_EQ(img.pixel(1, 0)[0], 4);

  write_file_text(dir / "g.pgm", std::string("P5 2 1 255\n") + std::string("\x10\x20", 2));
  const auto gray = load_image(dir / "g.pgm");
  EXPECT_EQ(gray.pixel(1, 0)[0], 0x20);
  EXPECT_EQ(gray.pixel(1, 0)[1], 0x20);
  EXPECT_EQ(gray.pixel(1, 0)[2], 0x20);

  write_file_text(dir / "w.pgm", "P5 1 1 65535\n\x01\x02");
  EXPECT_EQ(kind_of([&] { load_image(dir / "w.pgm"); }), ErrorKind::UnsupportedFormat);
  write_file_text(dir / "t.ppm", "P6 4 4 255\n\x01");
  EXPECT_EQ(kind_of([&] { load_image(dir / "t.ppm"); }), ErrorKind::CorruptHeader);

  save_ppm(dir / "rt.ppm", img);
  EXPECT_EQ(load_image(dir / "rt.ppm").data, img.data);
}

TEST(DatagramCsv, RoundTripIsExact) {
  RadarDatagram d;
  d.signals.push_back({10.123456789012345, 0.1, -0.05, -9.87654321, 33.3});
  d.signals.push_back({1e-3, kPi, kPi / 2, 0.0, std::nullopt});
  d.signals.push_back({49.999999999, -3.14159, -1.5, 1e-12, -7.25});
  const auto back = parse_datagram_csv(format_datagram_csv(d));
  ASSERT_EQ(back.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(back.signals[i].r, d.signals[i].r);
    EXPECT_EQ(back.signals[i].theta, d.signals[i].theta);
    EXPECT_EQ(back.signals[i].v, d.signals[i].v);
    EXPECT_EQ(back.signals[i].rss, d.signals[i].rss);
  }
}

TEST(DatagramCsv, Rejections) {
  EXPECT_TRUE(parse_datagram_csv("r,theta,phi,v,rss\n").empty());
  try {
    parse_datagram_csv("r,theta,phi,v,rss\n1,0,0,0,\n-1,0,0,0,\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::RangeViolation);
    EXPECT_NE(std::string(e.what()).find("row 3"), std::string::npos);
  }
  EXPECT_EQ(kind_of([] { parse_datagram_csv("x,y\n"); }), ErrorKind::ParseError);
  EXPECT_EQ(kind_of([] { parse_datagram_csv("r,theta,phi,v,rss\n1,0,0\n"); }), ErrorKind::ParseError);
  EXPECT_EQ(kind_of([] { parse_datagram_csv("r,theta,phi,v,rss\n1,zero,0,0,\n"); }), ErrorKind::ParseError);
}

TEST(ObjectVelocityCsv, RoundTrip) {
  const ObjectVelocityMap m({{1, 2, 3, 4, Vec3(1.5, -2, 0)}, {0, 0, 10, 10, Vec3(0, 0, 0.25)}});
  const auto back = parse_object_velocity_csv(format_object_velocity_csv(m));
  ASSERT_EQ(back.regions().size(), 2u);
  EXPECT_EQ(back.regions()[0].velocity, Vec3(1.5, -2, 0));
  EXPECT_EQ(back.lookup({2, 3}), Vec3(1.5, -2, 0));
  EXPECT_EQ(back.lookup({20, 3}), Vec3::Zero());
}

TEST(Calibration, IdentityAndErrors) {
  const auto c = parse_calibration(kIdentityCalib);
  EXPECT_EQ(c.lidar_to_radar.matrix(), Mat4::Identity());
  EXPECT_EQ(c.camera_to_radar.matrix(), Mat4::Identity());
  EXPECT_EQ(c.k.fx(), 100);

  std::string reflect = kIdentityCalib;
  reflect.replace(reflect.find("T_CD: 1"), 7, "T_CD: -1");
  EXPECT_EQ(kind_of([&] { parse_calibration(reflect); }), ErrorKind::NonRigidTransform);
  std::string bad_k = kIdentityCalib;
  bad_k.replace(0, 7, "K: 0 0");
  EXPECT_EQ(kind_of([&] { parse_calibration(bad_k); }), ErrorKind::InvalidIntrinsics);
  EXPECT_EQ(kind_of([] { parse_calibration("K: 1 0 0 0 1 0 0 0 1\n"); }), ErrorKind::ParseError);
}

TEST(Calibration, FormatRoundTrip) {
  const auto f = fixture::make_frame(fixture::FixtureOptions{.scene = fixture::Scene::Boxes}, 0).bundle;
  const auto text = format_calibration(f.calibration);
  const auto back = parse_calibration(text);
  EXPECT_EQ(back.k.matrix(), f.calibration.k.matrix());
  EXPECT_LT((back.camera_to_radar.matrix() - f.calibration.camera_to_radar.matrix()).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(format_calibration(back), text);
}

TEST(Grid, BinaryRoundTripIsByteExact) {
  const std::vector<PixelCoord> pts{{3.2, 4.1}, {20, 11}};
  const auto g = rasterize_mixture(pts, Covariance2::diagonal(4, 2), 32, 16);
  const auto bytes = encode_grid(g);
  const auto back = decode_grid(bytes);
  EXPECT_EQ(encode_grid(back), bytes);
  EXPECT_TRUE(std::equal(g.mass().begin(), g.mass().end(), back.mass().begin()));
  auto cut = bytes;
  cut.pop_back();
  EXPECT_EQ(kind_of([&] { decode_grid(cut); }), ErrorKind::TruncatedFile);
  auto magic = bytes;
  magic[1] = 'X';
  EXPECT_EQ(kind_of([&] { decode_grid(magic); }), ErrorKind::CorruptHeader);
}

TEST(Grid, PgmToGridToPgm) {
  rf_test::TempDir dir("pgm");
  SeededRng rng(3);
  GrayImage src(64, 48);
  for (auto& v : src.data) v = static_cast<std::uint8_t>(rng.uniform_index(256));
  src.data[0] = 0;
  src.data[1] = 255;
  save_pgm(dir / "src.pgm", src);
  const auto loaded = load_pgm(dir / "src.pgm");
  const auto g = grid_from_grayscale<std::uint8_t>(loaded.width, loaded.height, loaded.data);
  GrayImage out(64, 48);
  out.data = export_grayscale(g, GrayscaleMode::MaxNorm).as_bytes();
  save_pgm(dir / "out.pgm", out);
  const auto again = load_pgm(dir / "out.pgm");
  EXPECT_EQ(again.data, src.data);
  EXPECT_LT(kl_divergence(g, grid_from_grayscale<std::uint8_t>(64, 48, again.data)), 1e-3);
}

TEST(Frame, FixtureLoadsEagerly) {
  rf_test::TempDir dir("frame");
  fixture::FixtureOptions o;
  o.scene = fixture::Scene::Boxes;
  o.frames = 2;
  const auto manifest = fixture::write_fixture(o, dir.str());
  const auto d = load_manifest(manifest);
  ASSERT_EQ(d.frames.size(), 2u);
  const auto f = load_frame(d.frames[1]);
  const auto expected = fixture::make_frame(o, 1).bundle;
  EXPECT_EQ(f.image.data, expected.image.data);
  EXPECT_EQ(f.lidar.size(), expected.lidar.size());
  ASSERT_TRUE(f.ground_truth.has_value());
  ASSERT_EQ(f.ground_truth->size(), expected.ground_truth->size());
  EXPECT_EQ(f.ground_truth->signals[5].r, expected.ground_truth->signals[5].r);
  EXPECT_EQ(f.ego_velocity, expected.ego_velocity);
  EXPECT_EQ(f.object_velocities.regions().size(), expected.object_velocities.regions().size());

  // damage one file: the problem surfaces at load time, not later
  write_file_text(d.frames[0].calibration, "K: 0 0 0 0 0 0 0 0 1\n");
  EXPECT_THROW(load_frame(d.frames[0]), Error);
}
