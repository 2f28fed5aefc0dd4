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
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "radar_forge/app/common.hpp"
#include "radar_forge/encoders.hpp"
#include "radar_forge/eval.hpp"
#include "radar_forge/fixture.hpp"
#include "radar_forge/io/datagram_csv.hpp"
#include "radar_forge/io/grid_io.hpp"
#include "radar_forge/io/image.hpp"
#include "radar_forge/predictors.hpp"
#include "radar_forge/rss_net.hpp"
#include "radar_forge/signal_synth.hpp"
#include "radar_forge/vis.hpp"

namespace radar_forge::app {

using nlohmann::json;

// ---------------------------------------------------------------- gt-dist

struct GtDistOptions {
  std::string manifest;
  std::string sigma;  // empty: manifest, then auto
  std::string out_dir;
  int jobs = 1;
};

/// Per frame: <id>.grid (full precision), <id>.pgm (heatmap), <id>.count.
/// run.json records the covariance used and where it came from.
inline int cmd_gt_dist(const GtDistOptions& opt, Context& ctx) {
  ensure_dir(opt.out_dir);
  const LoadedDataset ds = load_dataset(opt.manifest, opt.jobs);
  const ResolvedSigma sigma = resolve_sigma(opt.sigma, ds);
  const std::size_t n = ds.frames.size();
  std::vector<json> rows(n);
  parallel_for(n, opt.jobs, [&](std::size_t i) {
    json row{{"frame_id", ds.descriptor.frames[i].id}};
    try {
      if (!ds.frames[i]) throw Error(ErrorKind::IoError, ds.errors[i]);
      const FrameBundle& f = *ds.frames[i];
      const auto pred = oracle_predict(f, sigma.sigma);
      io::save_grid(join_path(opt.out_dir, f.id + ".grid"), pred.grid);
      io::save_pgm(join_path(opt.out_dir, f.id + ".pgm"), vis::heatmap(pred.grid));
      io::write_file_text(join_path(opt.out_dir, f.id + ".count"), std::to_string(pred.count) + "\n");
      const auto [au, av] = pred.grid.argmax();
      row["count"] = pred.count;
      row["argmax"] = json::array({au, av});
    } catch (const Error& e) {
      row["error"] = e.what();
    }
    rows[i] = std::move(row);
  });

  std::size_t failed = 0;
  for (const auto& r : rows) failed += r.contains("error");
  json run{{"command", "gt-dist"},
           {"manifest", opt.manifest},
           {"sigma", sigma_json(sigma.sigma)},
           {"sigma_source", sigma.source},
           {"frames", rows}};
  io::write_file_text(join_path(opt.out_dir, "run.json"), run.dump(2) + "\n");
  if (ctx.json) {
    ctx.out << run.dump() << "\n";
  } else {
    const auto& m = sigma.sigma.matrix();
    ctx.out << "sigma (" << sigma.source << "): [" << io::format_double(m(0, 0)) << ", " << io::format_double(m(0, 1))
            << "; " << io::format_double(m(0, 1)) << ", " << io::format_double(m(1, 1)) << "]\n";
    for (const auto& r : rows) {
      if (r.contains("error"))
        ctx.err << r["frame_id"].get<std::string>() << ": " << r["error"].get<std::string>() << "\n";
      else
        ctx.out << r["frame_id"].get<std::string>() << ": count " << r["count"].get<long long>() << "\n";
    }
  }
  return failed ? kExitPartial : kExitOk;
}

// ------------------------------------------------------------------ synth

enum class PredictorKind { Oracle, Heuristic, External };

inline PredictorKind parse_predictor(const std::string& s) {
  if (s == "oracle") return PredictorKind::Oracle;
  if (s == "heuristic") return PredictorKind::Heuristic;
  if (s == "external") return PredictorKind::External;
  throw UsageError("--predictor must be oracle, heuristic or external");
}

struct SynthOptions {
  std::string manifest;
  std::string predictor = "oracle";
  std::string pred_dir;  // external predictor input
  std::string sigma;
  std::optional<std::uint64_t> seed;
  double noise = 0.0;
  bool jitter = false;
  std::string model;  // optional RSS model
  std::string out_dir;
  int jobs = 1;
};

inline constexpr std::uint64_t kNoiseStream = 0x4e4f495345ull;

/// Per frame: <id>.csv datagram. report.jsonl: one SynthesisReport per
/// frame, in manifest order.
inline int cmd_synth(const SynthOptions& opt, Context& ctx) {
  const PredictorKind kind = parse_predictor(opt.predictor);
  if (kind == PredictorKind::External && opt.pred_dir.empty())
    throw UsageError("--pred-dir is required with --predictor external");
  if (!(opt.noise >= 0.0 && opt.noise <= 1.0)) throw UsageError("--noise must be in [0, 1]");
  ensure_dir(opt.out_dir);
  const LoadedDataset ds = load_dataset(opt.manifest, opt.jobs);
  const std::uint64_t seed = resolve_seed(opt.seed, &ds.descriptor);
  const RadarSpec& spec = ds.descriptor.spec;

  std::optional<ResolvedSigma> sigma;
  std::optional<HeuristicModel> heuristic;
  if (kind == PredictorKind::Oracle) sigma = resolve_sigma(opt.sigma, ds);
  if (kind == PredictorKind::Heuristic) {
    sigma = resolve_sigma(opt.sigma, ds);
    const auto frames = ds.loaded();
    heuristic = fit_heuristic(frames, spec, ds.descriptor.sigma_neighbors, sigma->sigma);
  }
  std::optional<RssNet> model;
  if (!opt.model.empty()) {
    try {
      model = RssNet::load(opt.model);
    } catch (const Error& e) {
      throw UsageError(std::string("cannot load model: ") + e.what());
    }
  }

  const std::size_t n = ds.frames.size();
  std::vector<json> rows(n);
  parallel_for(n, opt.jobs, [&](std::size_t i) {
    const std::string& id = ds.descriptor.frames[i].id;
    json row{{"frame_id", id}, {"predictor", opt.predictor}, {"seed", seed}};
    try {
      if (!ds.frames[i]) throw Error(ErrorKind::IoError, ds.errors[i]);
      const FrameBundle& f = *ds.frames[i];
      DistributionPrediction pred = [&] {
        switch (kind) {
          case PredictorKind::Oracle: return oracle_predict(f, sigma->sigma);
          case PredictorKind::Heuristic: return heuristic_predict(f, *heuristic);
          case PredictorKind::External: break;
        }
        return load_external(join_path(opt.pred_dir, id + ".pgm"), join_path(opt.pred_dir, id + ".count"));
      }();
      SeededRng rng = SeededRng::for_frame(seed, i);
      SynthesisOptions so;
      so.jitter = opt.jitter;
      SynthesisResult res = synthesize_frame(f, pred, spec, rng, so);
      std::vector<std::size_t> noisy;
      if (opt.noise > 0.0) {
        SeededRng noise_rng = SeededRng::for_frame(seed, i, kNoiseStream);
        noisy = replace_with_noise(res.datagram, opt.noise, f, spec, noise_rng);
      }
      if (model) {
        RssNet local = *model;
        res.datagram = predict_datagram_rss(res.datagram, f, local);
      }
      io::write_datagram_csv(join_path(opt.out_dir, id + ".csv"), res.datagram);
      const auto& r = res.report;
      row["requested"] = r.requested;
      row["emitted"] = r.emitted;
      row["dropped_outside_fov"] = r.dropped_outside_fov;
      row["dropped_no_lidar"] = r.dropped_no_lidar;
      row["dropped_beyond_range"] = r.dropped_beyond_range;
      row["widened"] = r.widened;
      row["lidar_points"] = r.lidar_points;
      row["noise_replaced"] = noisy.size();
      row["noise_indices"] = noisy;
      row["rss"] = model.has_value();
    } catch (const Error& e) {
      row["error"] = e.what();
    }
    rows[i] = std::move(row);
  });

  std::ostringstream lines;
  std::size_t failed = 0;
  for (const auto& r : rows) {
    lines << r.dump() << "\n";
    failed += r.contains("error");
  }
  io::write_file_text(join_path(opt.out_dir, "report.jsonl"), lines.str());
  if (ctx.json) {
    ctx.out << lines.str();
  } else {
    for (const auto& r : rows) {
      if (r.contains("error")) {
        ctx.err << r["frame_id"].get<std::string>() << ": " << r["error"].get<std::string>() << "\n";
        continue;
      }
      ctx.out << r["frame_id"].get<std::string>() << ": emitted " << r["emitted"].get<long long>() << "/"
              << r["requested"].get<long long>();
      const long long dropped = r["dropped_outside_fov"].get<long long>() + r["dropped_no_lidar"].get<long long>() +
                                r["dropped_beyond_range"].get<long long>();
      if (dropped) ctx.out << ", dropped " << dropped;
      if (r["noise_replaced"].get<std::size_t>()) ctx.out << ", noise " << r["noise_replaced"].get<std::size_t>();
      ctx.out << "\n";
    }
  }
  return failed ? kExitPartial : kExitOk;
}

// -------------------------------------------------------------- train-rss

struct TrainRssOptions {
  std::string manifest;
  int epochs = 100;
  double lr = 1e-4;
  int rc = 50;
  double rl = 1.0;
  int samples_per_frame = 50;
  int batch_size = 0;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string loss_csv;  // default: <out>.loss.csv
  int jobs = 1;
};

inline constexpr std::uint64_t kSampleStream = 0x52535353ull;

/// Up to `per_frame` ground-truth signals with RSS from each frame, chosen
/// without replacement by a per-frame stream.
inline std::vector<RssSample> build_rss_samples(const std::vector<std::optional<FrameBundle>>& frames,
                                                const RssNetConfig& cfg, int per_frame, std::uint64_t seed) {
  std::vector<RssSample> out;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (!frames[i] || !frames[i]->ground_truth) continue;
    const FrameBundle& f = *frames[i];
    std::vector<std::size_t> candidates;
    for (std::size_t j = 0; j < f.ground_truth->size(); ++j)
      if (f.ground_truth->signals[j].rss) candidates.push_back(j);
    if (candidates.empty()) continue;
    SeededRng rng = SeededRng::for_frame(seed, i, kSampleStream);
    const std::size_t take = std::min(candidates.size(), static_cast<std::size_t>(std::max(0, per_frame)));
    for (std::size_t k = 0; k < take; ++k)
      std::swap(candidates[k], candidates[k + rng.uniform_index(candidates.size() - k)]);
    const auto cloud = lidar_in_radar_frame(f);
    for (std::size_t k = 0; k < take; ++k) {
      const auto& s = f.ground_truth->signals[candidates[k]];
      RssSample sample = make_rss_sample(f, cloud, s.cartesian(), s.v, cfg);
      sample.target = *s.rss;
      out.push_back(std::move(sample));
    }
  }
  return out;
}

inline std::string format_loss_csv(const std::vector<LossRecord>& history) {
  std::ostringstream os;
  os << "step,loss\n";
  for (const auto& r : history) os << r.step << ',' << io::format_double(r.loss) << '\n';
  return os.str();
}

inline int cmd_train_rss(const TrainRssOptions& opt, Context& ctx) {
  if (opt.out.empty()) throw UsageError("--out is required");
  if (opt.epochs < 0) throw UsageError("--epochs must be >= 0");
  if (!(opt.lr >= 0.0)) throw UsageError("--lr must be >= 0");
  if (opt.samples_per_frame < 1) throw UsageError("--samples-per-frame must be >= 1");
  const LoadedDataset ds = load_dataset(opt.manifest, opt.jobs);
  const std::uint64_t seed = resolve_seed(opt.seed, &ds.descriptor);
  RssNetConfig cfg;
  cfg.patch_radius = opt.rc;
  cfg.r_l = opt.rl;
  const auto samples = build_rss_samples(ds.frames, cfg, opt.samples_per_frame, seed);
  if (samples.empty()) throw Error(ErrorKind::EmptyDataset, "no ground-truth signals with RSS in " + opt.manifest);

  TrainOptions to;
  to.epochs = opt.epochs;
  to.lr = opt.lr;
  to.seed = seed;
  to.batch_size = opt.batch_size;
  const TrainResult result = train(samples, cfg, to);
  const auto out_dir = std::filesystem::path(opt.out).parent_path();
  if (!out_dir.empty()) std::filesystem::create_directories(out_dir);
  result.model.save(opt.out);
  const std::string loss_path = opt.loss_csv.empty() ? opt.out + ".loss.csv" : opt.loss_csv;
  io::write_file_text(loss_path, format_loss_csv(result.history));

  std::size_t failed = 0;
  for (const auto& e : ds.errors) failed += !e.empty();
  const auto& c = result.model.config();
  json summary{{"command", "train-rss"},
               {"samples", samples.size()},
               {"epochs", opt.epochs},
               {"seed", seed},
               {"a_min", c.a_min},
               {"a_max", c.a_max},
               {"initial_loss", result.history.front().loss},
               {"final_loss", result.history.back().loss},
               {"model", opt.out},
               {"loss_csv", loss_path}};
  if (ctx.json) {
    ctx.out << summary.dump() << "\n";
  } else {
    ctx.out << "samples: " << samples.size() << "\n"
            << "loss: " << io::format_double(result.history.front().loss) << " -> "
            << io::format_double(result.history.back().loss) << "\n"
            << "model: " << opt.out << "\n";
  }
  for (std::size_t i = 0; i < ds.errors.size(); ++i)
    if (!ds.errors[i].empty()) ctx.err << ds.descriptor.frames[i].id << ": " << ds.errors[i] << "\n";
  return failed ? kExitPartial : kExitOk;
}

// ------------------------------------------------------------------- eval

struct EvalOptions {
  std::string pred_dir;
  std::string gt_manifest;
  std::string report;  // CSV path, optional
  std::string sigma;
  int jobs = 1;
};

/// Drop counts keyed by frame id, from a synth report.jsonl if present.
inline std::map<std::string, DropCounts> read_drop_counts(const std::string& pred_dir) {
  std::map<std::string, DropCounts> out;
  const std::string path = join_path(pred_dir, "report.jsonl");
  if (!std::filesystem::exists(path)) return out;
  std::istringstream in(io::read_file_text(path));
  std::string line;
  while (std::getline(in, line)) {
    if (io::trim(line).empty()) continue;
    const json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.contains("frame_id") || j.contains("error")) continue;
    DropCounts d;
    d.outside_fov = j.value("dropped_outside_fov", 0LL);
    d.no_lidar = j.value("dropped_no_lidar", 0LL);
    d.beyond_range = j.value("dropped_beyond_range", 0LL);
    out[j["frame_id"].get<std::string>()] = d;
  }
  return out;
}

inline EvalReport evaluate_directory(const std::string& pred_dir, const LoadedDataset& ds, const Covariance2& sigma,
                                     int jobs) {
  std::vector<std::string> missing;
  for (const auto& f : ds.descriptor.frames)
    if (!std::filesystem::exists(join_path(pred_dir, f.id + ".csv"))) missing.push_back(f.id);
  if (!missing.empty()) {
    std::string list;
    for (std::size_t i = 0; i < missing.size() && i < 5; ++i) list += (i ? ", " : "") + missing[i];
    if (missing.size() > 5) list += ", ...";
    throw Error(ErrorKind::FrameIdMismatch, std::to_string(missing.size()) + " manifest frame(s) have no prediction in " +
                                                pred_dir + ": " + list);
  }
  for (std::size_t i = 0; i < ds.frames.size(); ++i)
    if (!ds.frames[i]) throw Error(ErrorKind::IoError, ds.errors[i]);
  const auto frames = ds.loaded();
  const auto span = rss_span(frames);
  const auto drops = read_drop_counts(pred_dir);
  EvalReport report;
  report.sigma = sigma;
  report.rows.resize(frames.size());
  parallel_for(frames.size(), jobs, [&](std::size_t i) {
    const auto& f = frames[i];
    const auto pred = io::read_datagram_csv(join_path(pred_dir, f.id + ".csv"), f.id);
    report.rows[i] = evaluate_frame(pred, f, sigma, span);
    if (auto it = drops.find(f.id); it != drops.end()) report.rows[i].drops = it->second;
  });
  report.aggregate();
  return report;
}

inline json eval_json(const EvalReport& r) {
  auto num = [](double v) { return std::isnan(v) ? json(nullptr) : json(v); };
  json rows = json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"frame_id", row.frame_id},
                    {"n_pred", row.n_pred},
                    {"n_true", row.n_true},
                    {"kl", row.kl},
                    {"count_error", row.count_error},
                    {"rss_nmse", num(row.rss_nmse)},
                    {"dropped_outside_fov", row.drops.outside_fov},
                    {"dropped_no_lidar", row.drops.no_lidar},
                    {"dropped_beyond_range", row.drops.beyond_range}});
  return {{"command", "eval"},
          {"sigma", sigma_json(r.sigma)},
          {"rows", rows},
          {"mean_kl", r.mean_kl},
          {"mean_count_error", r.mean_count_error},
          {"mean_rss_nmse", num(r.mean_rss_nmse)}};
}

inline int cmd_eval(const EvalOptions& opt, Context& ctx) {
  if (opt.pred_dir.empty()) throw UsageError("--pred is required");
  if (!std::filesystem::is_directory(opt.pred_dir)) throw UsageError("not a directory: " + opt.pred_dir);
  const LoadedDataset ds = load_dataset(opt.gt_manifest, opt.jobs);
  const ResolvedSigma sigma = resolve_sigma(opt.sigma, ds);
  const EvalReport report = evaluate_directory(opt.pred_dir, ds, sigma.sigma, opt.jobs);
  if (!opt.report.empty()) io::write_file_text(opt.report, io::format_eval_csv(report));
  if (ctx.json)
    ctx.out << eval_json(report).dump() << "\n";
  else
    ctx.out << io::format_eval_summary(report);
  return kExitOk;
}

// -------------------------------------------------------------------- vis

struct VisOptions {
  std::string manifest;
  std::string frame;  // frame id; default first frame
  std::string what = "overlay";
  std::string out;
  std::string pred;  // synthesized datagram CSV (overlay, rangeimg)
  std::string grid;  // .grid file for dist; default oracle grid
  std::string sigma;
  std::size_t signal = 0;
  double subsample = 1.0;
  double rl = 1.0;
  int range_width = 128;
  int range_height = 32;
};

inline int cmd_vis(const VisOptions& opt, Context& ctx) {
  if (opt.out.empty()) throw UsageError("--out is required");
  if (opt.what != "dist" && opt.what != "overlay" && opt.what != "rangeimg")
    throw UsageError("--what must be dist, overlay or rangeimg");
  if (!(opt.subsample > 0.0 && opt.subsample <= 1.0)) throw UsageError("--subsample must be in (0, 1]");
  const DatasetDescriptor desc = load_manifest_checked(opt.manifest);
  const FrameDescriptor* fd = &desc.frames.front();
  if (!opt.frame.empty()) {
    fd = nullptr;
    for (const auto& f : desc.frames)
      if (f.id == opt.frame) fd = &f;
    if (!fd) throw UsageError("frame '" + opt.frame + "' is not in " + opt.manifest);
  }
  const FrameBundle frame = io::load_frame(*fd);
  std::optional<RadarDatagram> synth;
  if (!opt.pred.empty()) synth = io::read_datagram_csv(opt.pred, frame.id);

  std::size_t drawn = 0;
  if (opt.what == "dist") {
    ProbabilityGrid grid = ProbabilityGrid::uniform(1, 1);
    if (!opt.grid.empty()) {
      grid = io::load_grid(opt.grid);
    } else {
      LoadedDataset ds{desc, {}, {}};
      ds.frames.push_back(frame);
      ds.errors.emplace_back();
      if (opt.sigma == "auto" || (opt.sigma.empty() && !desc.sigma)) ds = load_dataset(opt.manifest, 1);
      grid = oracle_predict(frame, resolve_sigma(opt.sigma, ds).sigma).grid;
    }
    io::save_pgm(opt.out, vis::heatmap(grid));
  } else if (opt.what == "overlay") {
    std::vector<vis::OverlayLayer> layers;
    if (frame.ground_truth) layers.push_back({&*frame.ground_truth, "red", "real"});
    if (synth) layers.push_back({&*synth, "blue", "synthesized"});
    const std::string svg = vis::overlay_svg(frame.image, frame.calibration, layers, opt.subsample);
    io::write_file_text(opt.out, svg);
    for (std::size_t p = svg.find("<circle"); p != std::string::npos; p = svg.find("<circle", p + 1)) ++drawn;
  } else {
    const RadarDatagram* d = synth ? &*synth : (frame.ground_truth ? &*frame.ground_truth : nullptr);
    if (!d || opt.signal >= d->size())
      throw UsageError("--signal " + std::to_string(opt.signal) + " is out of range for frame " + frame.id);
    const auto anchor = d->signals[opt.signal].cartesian();
    const auto cloud = lidar_in_radar_frame(frame);
    const auto local = local_cloud(cloud, anchor, opt.rl);
    const RangeImage img = build_range_image(local, anchor, opt.rl, opt.range_width, opt.range_height);
    io::save_pgm(opt.out, img.as_gray());
    drawn = local.size();
  }
  if (ctx.json)
    ctx.out << json{{"command", "vis"}, {"what", opt.what}, {"frame_id", frame.id}, {"out", opt.out}, {"items", drawn}}
                   .dump()
            << "\n";
  else
    ctx.out << "wrote " << opt.out << "\n";
  return kExitOk;
}

// ----------------------------------------------------------- make-fixture

struct MakeFixtureOptions {
  std::string scene = "wall";
  int frames = 4;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  int width = 64;
  int height = 48;
};

inline int cmd_make_fixture(const MakeFixtureOptions& opt, Context& ctx) {
  fixture::FixtureOptions fo;
  try {
    fo.scene = fixture::parse_scene(opt.scene);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  if (opt.frames < 1) throw UsageError("--frames must be >= 1");
  if (opt.width < 8 || opt.height < 8) throw UsageError("--width and --height must be >= 8");
  ensure_dir(opt.out_dir);
  fo.frames = opt.frames;
  fo.seed = resolve_seed(opt.seed, nullptr);
  fo.width = opt.width;
  fo.height = opt.height;
  fo.focal = 60.0 * opt.width / 64.0;
  const std::string manifest = fixture::write_fixture(fo, opt.out_dir);
  if (ctx.json)
    ctx.out << json{{"command", "make-fixture"}, {"scene", opt.scene}, {"frames", opt.frames}, {"seed", fo.seed},
                    {"manifest", manifest}}
                   .dump()
            << "\n";
  else
    ctx.out << "wrote " << manifest << "\n";
  return kExitOk;
}

}  // namespace radar_forge::app
