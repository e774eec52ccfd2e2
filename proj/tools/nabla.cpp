// Copyright 2026 The NABLA Engine Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nabla/cli/commands.hpp"
#include "nabla/errors.hpp"

namespace {

using namespace nabla;
using namespace nabla::cli;

struct Common {
  std::uint64_t seed = 0;
  std::string out;
  std::string format = "csv";
  std::optional<int> threads;
};

void add_common(CLI::App* cmd, Common& c, bool with_format = true) {
  cmd->add_option("--seed", c.seed, "Random seed");
  cmd->add_option("--out", c.out, "Write the result here instead of stdout");
  if (with_format) {
    cmd->add_option("--format", c.format, "Output format")
        ->check(CLI::IsMember({"csv", "json"}));
  }
  cmd->add_option("--threads", c.threads, "Worker threads (default: $NABLA_ENGINE_THREADS or 1)");
}

void add_layout(CLI::App* cmd, VideoLayout& layout) {
  cmd->add_option("--frames", layout.frames, "Latent frames T")->capture_default_str();
  cmd->add_option("--height", layout.height, "Latent height H")->capture_default_str();
  cmd->add_option("--width", layout.width, "Latent width W")->capture_default_str();
  cmd->add_option("--patch", layout.patch, "Patch side P")->capture_default_str();
}

// Runs fn into a buffer so a failed command never leaves a partial file.
template <typename Fn>
void emit(const Common& c, Fn&& fn) {
  std::ostringstream buf;
  fn(buf);
  if (c.out.empty()) {
    std::cout << buf.str();
    return;
  }
  std::ofstream f(c.out, std::ios::binary);
  if (!f) throw IoError("cannot write " + c.out);
  f << buf.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Block-sparse attention toolkit"};
  app.require_subcommand(1);

  Common common;

  MaskOptions mask;
  std::vector<std::size_t> sta;
  std::string qk = "local";
  std::string mask_dir, pgm_dir;
  auto* mask_cmd = app.add_subcommand("mask", "Build adaptive block masks on synthetic Q/K");
  add_common(mask_cmd, common);
  add_layout(mask_cmd, mask.layout);
  mask_cmd->add_option("--heads", mask.heads)->capture_default_str();
  mask_cmd->add_option("--head-dim", mask.head_dim)->capture_default_str();
  mask_cmd->add_option("--block-size", mask.block_size, "Tokens per block (default P^2)");
  mask_cmd->add_option("--thr", mask.thresholds, "One or more CDF thresholds")->capture_default_str();
  mask_cmd->add_option("--sta", sta, "STA window: t h w (odd)")->expected(3);
  mask_cmd->add_option("--qk", qk, "Synthetic Q/K generator")->check(CLI::IsMember({"local", "gaussian"}));
  mask_cmd->add_option("--mask-dir", mask_dir, "Write one bitset per threshold here");
  mask_cmd->add_option("--pgm-dir", pgm_dir, "Write one PGM per threshold and head here");

  BenchCommandOptions bench;
  bool no_error = false;
  auto* bench_cmd = app.add_subcommand("bench", "Time block-sparse against dense attention");
  add_common(bench_cmd, common);
  bench_cmd->add_option("-s,--seq", bench.seq)->capture_default_str();
  bench_cmd->add_option("-d,--head-dim", bench.head_dim)->capture_default_str();
  bench_cmd->add_option("--heads", bench.heads)->capture_default_str();
  bench_cmd->add_option("--sparsity", bench.sparsities, "Target sparsities")->capture_default_str();
  bench_cmd->add_option("--block-size", bench.block_size)->capture_default_str();
  bench_cmd->add_option("--repeats", bench.repeats)->capture_default_str();
  bench_cmd->add_flag("--no-error", no_error, "Skip the masked dense error check");

  CostCommandOptions cost;
  std::vector<int> offload_flags;
  auto* cost_cmd = app.add_subcommand("cost", "Sweep the analytic step-time and memory model");
  add_common(cost_cmd, common);
  cost_cmd->add_option("--preset", cost.presets, "image-lite, video-lite, video-pro (default all)");
  cost_cmd->add_option("--volume", cost.volumes, "Latent volumes S");
  cost_cmd->add_option("--gpus", cost.gpus, "GPU counts N")->capture_default_str();
  cost_cmd->add_option("--offload", offload_flags, "Offload settings (0/1)");
  cost_cmd->add_option("--batch", cost.batch)->capture_default_str();

  BatchSimOptions sim;
  std::string items_path, tar_plan_path;
  auto* sim_cmd = app.add_subcommand("batch-sim", "Simulate the batching scheduler");
  add_common(sim_cmd, common, false);
  sim_cmd->add_option("--items", items_path, "JSON-lines item stream");
  sim_cmd->add_option("--synthetic", sim.synthetic, "Generate this many items instead");
  sim_cmd->add_option("--synthetic-image-share", sim.synthetic_image_share, "Image share of the synthetic stream (default: balanced)");
  sim_cmd->add_option("--t-max", sim.t_max)->capture_default_str();
  sim_cmd->add_option("--image-fraction", sim.image_fraction);
  sim_cmd->add_option("--task-mix", sim.task_mix, "video-lite or video-pro");
  sim_cmd->add_option("--aspect", sim.aspects, "Aspect classes (default: order of appearance)");
  sim_cmd->add_option("--policy", sim.policy)->check(CLI::IsMember({"round-robin", "weighted"}))->capture_default_str();
  sim_cmd->add_option("--resolution-mix", sim.resolution_mix, "Queue weights for --policy weighted");
  sim_cmd->add_option("--patience", sim.patience)->capture_default_str();
  sim_cmd->add_flag("--summary", sim.summary, "Print per-queue utilization instead of the plan");
  sim_cmd->add_option("--tar-plan", tar_plan_path, "Also write a tar packing plan here");

  SoupCommandOptions soup;
  std::string soup_out;
  auto* soup_cmd = app.add_subcommand("soup", "Merge parameter sets by weighted averaging");
  soup_cmd->add_option("--manifest", soup.manifests, "Parameter set manifests")->required();
  soup_cmd->add_option("--scheme", soup.scheme)->check(CLI::IsMember({"equal", "proportional", "sqrt"}))->capture_default_str();
  soup_cmd->add_option("--merged", soup_out, "Manifest path for the merged set")->required();
  add_common(soup_cmd, common, false);

  ReorderCommandOptions reorder;
  auto* reorder_cmd = app.add_subcommand("reorder", "Print the patch-contiguous token permutation");
  add_layout(reorder_cmd, reorder.layout);
  add_common(reorder_cmd, common, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << error_json("UsageError", e.what()) << '\n';
    return 1;
  }

  try {
    const int threads = resolve_threads(common.threads);
    if (*mask_cmd) {
      mask.seed = common.seed;
      mask.format = parse_format(common.format);
      mask.threads = threads;
      mask.qk = parse_qk_kind(qk);
      if (!sta.empty()) mask.sta = StaWindow{sta[0], sta[1], sta[2]};
      if (!mask_dir.empty()) mask.mask_dir = mask_dir;
      if (!pgm_dir.empty()) mask.pgm_dir = pgm_dir;
      emit(common, [&](std::ostream& o) { run_mask(mask, o); });
    } else if (*bench_cmd) {
      bench.seed = common.seed;
      bench.format = parse_format(common.format);
      bench.threads = threads;
      bench.check_error = !no_error;
      emit(common, [&](std::ostream& o) { run_bench(bench, o); });
    } else if (*cost_cmd) {
      cost.format = parse_format(common.format);
      if (!offload_flags.empty()) {
        cost.offload.clear();
        for (int f : offload_flags) cost.offload.push_back(f != 0);
      }
      emit(common, [&](std::ostream& o) { run_cost(cost, o); });
    } else if (*sim_cmd) {
      sim.seed = common.seed;
      if (!items_path.empty()) sim.items = items_path;
      if (!tar_plan_path.empty()) sim.tar_plan = tar_plan_path;
      emit(common, [&](std::ostream& o) { run_batch_sim(sim, o); });
    } else if (*soup_cmd) {
      soup.out = soup_out;
      emit(common, [&](std::ostream& o) { run_soup(soup, o); });
    } else if (*reorder_cmd) {
      emit(common, [&](std::ostream& o) { run_reorder(reorder, o); });
    }
  } catch (const Error& e) {
    std::cerr << error_json(e.kind(), e.what()) << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << error_json("InternalError", e.what()) << '\n';
    return 1;
  }
  return 0;
}
