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
#include <atomic>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <functional>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "radar_forge/error.hpp"
#include "radar_forge/gt_distribution.hpp"
#include "radar_forge/io/frame.hpp"
#include "radar_forge/io/manifest.hpp"
#include "radar_forge/io/text.hpp"
#include "radar_forge/predictors.hpp"

namespace radar_forge::app {

inline constexpr int kExitOk = 0;
inline constexpr int kExitPartial = 1;
inline constexpr int kExitUsage = 2;

inline constexpr const char* kSeedEnv = "RADAR_FORGE_SEED";

/// Problems with the invocation itself (exit code 2).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Context {
  std::ostream& out = std::cout;
  std::ostream& err = std::cerr;
  bool json = false;
};

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. The first exception
/// (lowest index) is rethrown after all workers finish.
inline void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

/// Seed precedence: flag, then manifest, then RADAR_FORGE_SEED, then 0.
inline std::uint64_t resolve_seed(std::optional<std::uint64_t> flag, const DatasetDescriptor* manifest) {
  if (flag) return *flag;
  if (manifest && manifest->seed) return *manifest->seed;
  if (const char* env = std::getenv(kSeedEnv)) {
    const auto v = io::parse_int(env);
    if (!v || *v < 0) throw UsageError(std::string(kSeedEnv) + " must be a non-negative integer");
    return static_cast<std::uint64_t>(*v);
  }
  return 0;
}

inline DatasetDescriptor load_manifest_checked(const std::string& path) {
  if (path.empty()) throw UsageError("--manifest is required");
  if (!std::filesystem::exists(path)) throw UsageError("manifest not found: " + path);
  DatasetDescriptor d;
  try {
    d = io::load_manifest(path);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  if (d.frames.empty()) throw UsageError(path + ": manifest lists no frames");
  return d;
}

/// Loaded frames, parallel to the manifest; failures carry their message.
struct LoadedDataset {
  DatasetDescriptor descriptor;
  std::vector<std::optional<FrameBundle>> frames;
  std::vector<std::string> errors;

  std::vector<FrameBundle> loaded() const {
    std::vector<FrameBundle> out;
    for (const auto& f : frames)
      if (f) out.push_back(*f);
    return out;
  }
};

inline LoadedDataset load_dataset(const std::string& manifest_path, int jobs) {
  LoadedDataset ds{load_manifest_checked(manifest_path), {}, {}};
  const std::size_t n = ds.descriptor.frames.size();
  ds.frames.resize(n);
  ds.errors.resize(n);
  parallel_for(n, jobs, [&](std::size_t i) {
    try {
      ds.frames[i] = io::load_frame(ds.descriptor.frames[i]);
    } catch (const Error& e) {
      ds.errors[i] = e.what();
    }
  });
  return ds;
}

/// "auto" or "su, sv" (standard deviations in pixels).
inline std::optional<Covariance2> parse_sigma_flag(const std::string& flag) {
  if (flag.empty() || flag == "auto") return std::nullopt;
  const auto parts = io::tokens(flag);
  if (parts.size() != 2) throw UsageError("--sigma expects 'auto' or 'sigma_u,sigma_v'");
  const auto su = io::parse_double(parts[0]), sv = io::parse_double(parts[1]);
  if (!su || !sv || !(*su > 0.0) || !(*sv > 0.0)) throw UsageError("--sigma values must be positive numbers");
  return Covariance2::from_stddev(*su, *sv);
}

struct ResolvedSigma {
  Covariance2 sigma;
  std::string source;  // flag | manifest | auto
};

/// Sigma precedence: explicit flag, then manifest, then estimated from the
/// ground truth of every loaded frame.
inline ResolvedSigma resolve_sigma(const std::string& flag, const LoadedDataset& ds) {
  if (flag != "auto") {
    if (auto s = parse_sigma_flag(flag)) return {*s, "flag"};
    if (ds.descriptor.sigma) return {*ds.descriptor.sigma, "manifest"};
  }
  const auto frames = ds.loaded();
  return {estimate_dataset_sigma(frames, ds.descriptor.sigma_neighbors), "auto"};
}

inline nlohmann::json sigma_json(const Covariance2& s) {
  const auto& m = s.matrix();
  return nlohmann::json::array({m(0, 0), m(0, 1), m(1, 1)});
}

inline void ensure_dir(const std::string& dir) {
  if (dir.empty()) throw UsageError("--out-dir is required");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw UsageError("cannot create " + dir + ": " + ec.message());
}

inline std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

}  // namespace radar_forge::app
