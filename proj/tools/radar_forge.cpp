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


// radar-forge command line: gt-dist, synth, train-rss, eval, vis, make-fixture.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "radar_forge/app/commands.hpp"

namespace rf = radar_forge;
namespace app = radar_forge::app;

namespace {

// CLI11 has no optional<uint64_t> binding that distinguishes "absent".
void add_seed(CLI::App* cmd, std::optional<std::uint64_t>& target) {
  cmd->add_option_function<std::uint64_t>(
         "--seed", [&target](const std::uint64_t& v) { target = v; },
         "RNG seed (default: manifest, then $RADAR_FORGE_SEED, then 0)")
      ->check(CLI::NonNegativeNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Synthesize 4D radar datagrams from camera, lidar and calibration."};
  cli.require_subcommand(1);
  cli.fallthrough();
  bool json = false;
  cli.add_flag("--json", json, "machine-readable output on stdout");

  app::GtDistOptions gt;
  auto* gt_cmd = cli.add_subcommand("gt-dist", "ground-truth signal distributions and counts");
  gt_cmd->add_option("--manifest", gt.manifest, "dataset manifest")->required();
  gt_cmd->add_option("--sigma", gt.sigma, "auto or sigma_u,sigma_v in pixels (default: manifest, then auto)");
  gt_cmd->add_option("--out-dir", gt.out_dir, "output directory")->required();
  gt_cmd->add_option("--jobs", gt.jobs, "worker threads")->check(CLI::PositiveNumber);

  app::SynthOptions sy;
  auto* sy_cmd = cli.add_subcommand("synth", "synthesize radar datagrams");
  sy_cmd->add_option("--manifest", sy.manifest, "dataset manifest")->required();
  sy_cmd->add_option("--predictor", sy.predictor, "oracle, heuristic or external")
      ->check(CLI::IsMember({"oracle", "heuristic", "external"}));
  sy_cmd->add_option("--pred-dir", sy.pred_dir, "directory of <id>.pgm and <id>.count (external predictor)");
  sy_cmd->add_option("--sigma", sy.sigma, "auto or sigma_u,sigma_v in pixels");
  add_seed(sy_cmd, sy.seed);
  sy_cmd->add_option("--noise", sy.noise, "fraction of signals replaced by uniform noise")->check(CLI::Range(0.0, 1.0));
  sy_cmd->add_flag("--jitter", sy.jitter, "sub-pixel jitter on sampled pixels");
  sy_cmd->add_option("--model", sy.model, "RSS model; fills the rss column");
  sy_cmd->add_option("--out-dir", sy.out_dir, "output directory")->required();
  sy_cmd->add_option("--jobs", sy.jobs, "worker threads")->check(CLI::PositiveNumber);

  app::TrainRssOptions tr;
  auto* tr_cmd = cli.add_subcommand("train-rss", "train the RSS network");
  tr_cmd->add_option("--manifest", tr.manifest, "dataset manifest")->required();
  tr_cmd->add_option("--epochs", tr.epochs, "training epochs")->check(CLI::NonNegativeNumber);
  tr_cmd->add_option("--lr", tr.lr, "Adam learning rate")->check(CLI::NonNegativeNumber);
  tr_cmd->add_option("--rc", tr.rc, "image patch radius (pixels)")->check(CLI::PositiveNumber);
  tr_cmd->add_option("--rl", tr.rl, "lidar neighbourhood radius (m)")->check(CLI::PositiveNumber);
  tr_cmd->add_option("--samples-per-frame", tr.samples_per_frame, "training signals drawn per frame")
      ->check(CLI::PositiveNumber);
  tr_cmd->add_option("--batch-size", tr.batch_size, "minibatch size (0 = full batch)")->check(CLI::NonNegativeNumber);
  add_seed(tr_cmd, tr.seed);
  tr_cmd->add_option("--out", tr.out, "model file")->required();
  tr_cmd->add_option("--loss-csv", tr.loss_csv, "loss history (default: <out>.loss.csv)");
  tr_cmd->add_option("--jobs", tr.jobs, "loader threads")->check(CLI::PositiveNumber);

  app::EvalOptions ev;
  auto* ev_cmd = cli.add_subcommand("eval", "compare predicted datagrams with ground truth");
  ev_cmd->add_option("--pred", ev.pred_dir, "directory of <id>.csv datagrams")->required();
  ev_cmd->add_option("--gt", ev.gt_manifest, "ground-truth manifest")->required();
  ev_cmd->add_option("--report", ev.report, "per-frame CSV report");
  ev_cmd->add_option("--sigma", ev.sigma, "auto or sigma_u,sigma_v in pixels");
  ev_cmd->add_option("--jobs", ev.jobs, "worker threads")->check(CLI::PositiveNumber);

  app::VisOptions vi;
  auto* vi_cmd = cli.add_subcommand("vis", "heatmaps, overlays and range images");
  vi_cmd->add_option("--manifest", vi.manifest, "dataset manifest")->required();
  vi_cmd->add_option("--frame", vi.frame, "frame id (default: first)");
  vi_cmd->add_option("--what", vi.what, "dist, overlay or rangeimg")->check(CLI::IsMember({"dist", "overlay", "rangeimg"}));
  vi_cmd->add_option("--out", vi.out, "output file (.pgm or .svg)")->required();
  vi_cmd->add_option("--pred", vi.pred, "synthesized datagram CSV");
  vi_cmd->add_option("--grid", vi.grid, "grid file for --what dist");
  vi_cmd->add_option("--sigma", vi.sigma, "auto or sigma_u,sigma_v in pixels");
  vi_cmd->add_option("--signal", vi.signal, "signal index for --what rangeimg");
  vi_cmd->add_option("--subsample", vi.subsample, "fraction of points drawn in overlays")->check(CLI::Range(0.0, 1.0));
  vi_cmd->add_option("--rl", vi.rl, "lidar neighbourhood radius (m)")->check(CLI::PositiveNumber);

  app::MakeFixtureOptions fx;
  auto* fx_cmd = cli.add_subcommand("make-fixture", "write a synthetic scene dataset");
  fx_cmd->add_option("--scene", fx.scene, "wall, boxes or street")->check(CLI::IsMember({"wall", "boxes", "street"}));
  fx_cmd->add_option("--frames", fx.frames, "frame count")->check(CLI::PositiveNumber);
  add_seed(fx_cmd, fx.seed);
  fx_cmd->add_option("--out-dir", fx.out_dir, "output directory")->required();
  fx_cmd->add_option("--width", fx.width, "image width")->check(CLI::Range(8, 4096));
  fx_cmd->add_option("--height", fx.height, "image height")->check(CLI::Range(8, 4096));

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e);
    return code == 0 ? app::kExitOk : app::kExitUsage;
  }

  app::Context ctx{std::cout, std::cerr, json};
  try {
    if (*gt_cmd) return app::cmd_gt_dist(gt, ctx);
    if (*sy_cmd) return app::cmd_synth(sy, ctx);
    if (*tr_cmd) return app::cmd_train_rss(tr, ctx);
    if (*ev_cmd) return app::cmd_eval(ev, ctx);
    if (*vi_cmd) return app::cmd_vis(vi, ctx);
    if (*fx_cmd) return app::cmd_make_fixture(fx, ctx);
  } catch (const app::UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return app::kExitUsage;
  } catch (const rf::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return app::kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return app::kExitUsage;
  }
  return app::kExitUsage;
}
