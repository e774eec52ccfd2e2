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

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <set>
#include <string>

#include <gtest/gtest.h>
#include <json.hpp>

#include "nabla/cli/commands.hpp"
#include "nabla/errors.hpp"
#include "nabla/rng.hpp"
#include "nabla/soup.hpp"

namespace nabla::cli {
namespace {

namespace fs = std::filesystem;

struct CliRun {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("nabla_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

CliRun run_cli(const std::string& args) {
  const fs::path err = fs::temp_directory_path() / "nabla_cli_test_stderr.txt";
  const std::string cmd = std::string(NABLA_CLI_PATH) + " " + args + " 2>" + err.string();
  CliRun r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof(buf), pipe)) > 0) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = slurp(err);
  return r;
}

TEST(Cli, HelpExitsZero) {
  EXPECT_EQ(run_cli("--help").code, 0);
  EXPECT_EQ(run_cli("mask --help").code, 0);
}

TEST(Cli, UnknownFlagIsUsageError) {
  const CliRun r = run_cli("mask --bogus");
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(nlohmann::json::parse(r.err)["error"], "UsageError");
}

TEST(Cli, MaskZeroThresholdIsDense) {
  MaskOptions opt;
  opt.thresholds = {0.0};
  std::stringstream out;
  run_mask(opt, out);
  std::string line;
  std::getline(out, line);
  EXPECT_EQ(line, "thr,head,kept_blocks,total_blocks,sparsity");
  while (std::getline(out, line)) EXPECT_EQ(line.substr(line.rfind(',') + 1), "0");
}

TEST(Cli, MaskSweepSparsityIsMonotone) {
  const CliRun r = run_cli("mask --thr 0 0.1 0.2 0.4 0.6 0.8 --heads 3 --seed 5");
  ASSERT_EQ(r.code, 0) << r.err;
  std::stringstream ss(r.out);
  std::string line;
  std::getline(ss, line);
  double prev = -1.0;
  int rows = 0;
  while (std::getline(ss, line)) {
    if (line.find(",all,") == std::string::npos) continue;
    const double s = std::stod(line.substr(line.rfind(',') + 1));
    EXPECT_GE(s, prev) << line;
    prev = s;
    ++rows;
  }
  EXPECT_EQ(rows, 6);
}

TEST(Cli, MaskLayoutErrorExitsNonZero) {
  const CliRun r = run_cli("mask --height 30");
  EXPECT_EQ(r.code, 1);
  const auto j = nlohmann::json::parse(r.err);
  EXPECT_EQ(j["error"], "LayoutError");
  EXPECT_TRUE(r.out.empty());
}

TEST(Cli, MaskWritesBitsetsAndPgms) {
  const fs::path dir = scratch("mask");
  const CliRun r = run_cli("mask --heads 2 --thr 0.2 --sta 1 3 3 --format json --mask-dir " +
                        (dir / "bits").string() + " --pgm-dir " + (dir / "pgm").string());
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "bits" / "mask_thr0.2.bin"));
  EXPECT_TRUE(fs::exists(dir / "pgm" / "mask_thr0.2_head1.pgm"));
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["masks"][0]["heads"].size(), 2u);
  std::ifstream bits(dir / "bits" / "mask_thr0.2.bin", std::ios::binary);
  const BlockMask m = read_block_mask(bits, 64);
  EXPECT_EQ(m.heads(), 2u);
  EXPECT_TRUE(m.rows_nonempty());
  fs::remove_all(dir);
}

TEST(Cli, SyntheticLocalQkIsSparseAndSeeded) {
  const VideoLayout layout{2, 32, 32, 8};
  const auto [q1, k1] = make_synthetic_qk(layout, 2, 16, QkKind::kLocal, 3);
  const auto [q2, k2] = make_synthetic_qk(layout, 2, 16, QkKind::kLocal, 3);
  EXPECT_EQ(q1, q2);
  EXPECT_EQ(k1, k2);
  const BlockMask m =
      build_nabla_mask(q1, k1, layout, {0.2, 64, {}}, AttentionSpec::for_head_dim(2, 16));
  EXPECT_GT(m.sparsity(), 0.3);
}

TEST(Cli, BenchJsonIsDeterministicOutsideWallClock) {
  const std::string args = "bench --seq 512 --head-dim 16 --heads 2 --sparsity 0 0.5 --repeats 1 --format json --seed 4";
  const CliRun a = run_cli(args), b = run_cli(args);
  ASSERT_EQ(a.code, 0) << a.err;
  auto ja = nlohmann::json::parse(a.out), jb = nlohmann::json::parse(b.out);
  ASSERT_EQ(ja.size(), 2u);
  EXPECT_EQ(ja[0]["flops_sparse"], ja[0]["flops_dense"]);
  for (auto* j : {&ja, &jb}) {
    for (auto& row : *j) row.erase("wall_clock");
  }
  EXPECT_EQ(ja.dump(), jb.dump());
}

TEST(Cli, CostSweepTable) {
  const CliRun r = run_cli("cost --volume 3047424 6094848 --gpus 1 8");
  ASSERT_EQ(r.code, 0) << r.err;
  std::stringstream ss(r.out);
  std::string line;
  std::getline(ss, line);
  EXPECT_EQ(line, "preset,d,d_t,d_f,L,B,S,N,offload,step_time,gpu_memory");
  int rows = 0;
  while (std::getline(ss, line)) ++rows;
  EXPECT_EQ(rows, 12);
  EXPECT_EQ(run_cli("cost --preset nope").code, 1);
}

TEST(Cli, BatchSimEmptyItemsFile) {
  const fs::path dir = scratch("empty");
  std::ofstream(dir / "items.jsonl").close();
  const CliRun r = run_cli("batch-sim --items " + (dir / "items.jsonl").string());
  EXPECT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_TRUE(j["batches"].empty());
  fs::remove_all(dir);
}

TEST(Cli, BatchSimOversizeItemIsNamedError) {
  const fs::path dir = scratch("oversize");
  std::ofstream(dir / "items.jsonl")
      << R"({"id":"a","modality":"video","aspect":"1:1","t":200,"resolution":"low"})" << '\n';
  const CliRun r = run_cli("batch-sim --items " + (dir / "items.jsonl").string());
  EXPECT_NE(r.code, 0);
  EXPECT_EQ(nlohmann::json::parse(r.err)["error"], "OversizeItemError");
  fs::remove_all(dir);
}

TEST(Cli, BatchSimSyntheticFractionAndTarPlan) {
  const fs::path dir = scratch("sim");
  const CliRun r = run_cli("batch-sim --synthetic 10000 --image-fraction 0.2 --summary --seed 1 --tar-plan " +
                        (dir / "tar.json").string());
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_NEAR(j["image_fraction"].get<double>(), 0.2, 0.02);
  EXPECT_EQ(j["items"], 10000);
  const auto tar = nlohmann::json::parse(slurp(dir / "tar.json"));
  EXPECT_FALSE(tar["archives"].empty());
  fs::remove_all(dir);
}

TEST(Cli, BatchSimWeightedUsesMixBucketsAsQueues) {
  const CliRun r = run_cli("batch-sim --synthetic 3000 --policy weighted --resolution-mix video-lr --summary");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  std::set<std::string> aspects;
  for (const auto& q : j["queues"]) aspects.insert(q["aspect"].get<std::string>());
  EXPECT_EQ(aspects, (std::set<std::string>{"256x256", "256x384", "384x256"}));
  EXPECT_EQ(run_cli("batch-sim --synthetic 10 --policy weighted").code, 1);
}

TEST(Cli, SoupMergesManifests) {
  const fs::path dir = scratch("soup");
  Rng rng(1);
  for (auto [name, size] : {std::pair{"a", 4}, {"b", 1}}) {
    soup::ParamSet s;
    s.subdomain = name;
    s.dataset_size = size;
    s.params.emplace("w", random_normal({3, 3}, rng));
    soup::save_param_set(dir / (std::string(name) + ".json"), s);
  }
  const CliRun r = run_cli("soup --manifest " + (dir / "a.json").string() + " " + (dir / "b.json").string() +
                        " --merged " + (dir / "out" / "merged.json").string());
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_DOUBLE_EQ(j["inputs"][0]["weight"].get<double>(), 2.0 / 3.0);
  const auto merged = soup::load_param_set(dir / "out" / "merged.json");
  EXPECT_EQ(merged.subdomain, "a+b");
  const CliRun missing = run_cli("soup --manifest " + (dir / "nope.json").string() + " --merged x.json");
  EXPECT_EQ(nlohmann::json::parse(missing.err)["error"], "IoError");
  fs::remove_all(dir);
}

TEST(Cli, ReorderPlanMapsIndexEightToSixtyFour) {
  const CliRun r = run_cli("reorder --height 16 --width 16 --patch 8");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(nlohmann::json::parse(r.out)[8], 64);
}

TEST(Cli, OutFlagWritesFile) {
  const fs::path dir = scratch("out");
  const CliRun r = run_cli("cost --out " + (dir / "sweep.csv").string());
  ASSERT_EQ(r.code, 0);
  EXPECT_TRUE(r.out.empty());
  EXPECT_EQ(slurp(dir / "sweep.csv").rfind("preset,", 0), 0u);
  fs::remove_all(dir);
}

TEST(Cli, ThreadResolution) {
  EXPECT_EQ(resolve_threads(3), 3);
  EXPECT_THROW(resolve_threads(0), ParameterError);
  ::setenv("NABLA_ENGINE_THREADS", "5", 1);
  EXPECT_EQ(resolve_threads(std::nullopt), 5);
  EXPECT_EQ(resolve_threads(2), 2);
  ::setenv("NABLA_ENGINE_THREADS", "x", 1);
  EXPECT_THROW(resolve_threads(std::nullopt), ParameterError);
  ::unsetenv("NABLA_ENGINE_THREADS");
  EXPECT_EQ(resolve_threads(std::nullopt), 1);
}

}  // namespace
}  // namespace nabla::cli
