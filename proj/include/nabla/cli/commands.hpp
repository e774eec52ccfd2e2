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

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nabla/mask_builder.hpp"
#include "nabla/reorder.hpp"
#include "nabla/tensor.hpp"

namespace nabla::cli {

enum class Format { kCsv, kJson };

Format parse_format(const std::string& name);

// Thread count: explicit flag, else NABLA_ENGINE_THREADS, else 1.
int resolve_threads(std::optional<int> flag);

// Synthetic Q/K with spatio-temporal structure: tokens attend most strongly
// to nearby tokens, with per-head bandwidths. "gaussian" gives i.i.d. noise.
enum class QkKind { kLocal, kGaussian };
QkKind parse_qk_kind(const std::string& name);

// Returns [heads x s x head_dim] q and k in reordered token order.
std::pair<Tensor, Tensor> make_synthetic_qk(const VideoLayout& layout, std::size_t heads,
                                            std::size_t head_dim, QkKind kind,
                                            std::uint64_t seed);

struct MaskOptions {
  VideoLayout layout{1, 32, 32, 8};
  std::size_t heads = 4;
  std::size_t head_dim = 64;
  std::size_t block_size = 0;  // 0 = patch^2
  std::vector<double> thresholds{0.1};
  std::optional<StaWindow> sta;
  QkKind qk = QkKind::kLocal;
  std::uint64_t seed = 0;
  Format format = Format::kCsv;
  std::optional<std::filesystem::path> mask_dir;  // bitset per threshold
  std::optional<std::filesystem::path> pgm_dir;   // PGM per threshold and head
  int threads = 1;
};

struct BenchCommandOptions {
  std::size_t seq = 8192;
  std::size_t head_dim = 64;
  std::size_t heads = 4;
  std::vector<double> sparsities{0.9};
  std::size_t block_size = 64;
  int repeats = 5;
  bool check_error = true;
  std::uint64_t seed = 0;
  Format format = Format::kCsv;
  int threads = 1;
};

struct CostCommandOptions {
  std::vector<std::string> presets;  // empty = all presets
  std::vector<double> volumes;       // empty = reference volume
  std::vector<double> gpus{1};
  std::vector<bool> offload{false};
  double batch = 1;
  Format format = Format::kCsv;
};

struct BatchSimOptions {
  std::optional<std::filesystem::path> items;
  std::size_t synthetic = 0;  // generate this many items when no file is given
  std::optional<double> synthetic_image_share;  // default: balanced for the target
  std::size_t t_max = 121;
  std::optional<double> image_fraction;
  std::optional<std::string> task_mix;
  std::vector<std::string> aspects;  // empty = order of first appearance
  std::string policy = "round-robin";
  std::optional<std::string> resolution_mix;  // weights for "weighted"
  std::size_t patience = 100000;
  std::uint64_t seed = 0;
  bool summary = false;
  std::optional<std::filesystem::path> tar_plan;
};

struct SoupCommandOptions {
  std::vector<std::filesystem::path> manifests;
  std::string scheme = "sqrt";
  std::filesystem::path out;
};

struct ReorderCommandOptions {
  VideoLayout layout{1, 16, 16, 8};
};

// Each command writes its artifact to `out`; library errors propagate as
// nabla::Error.
void run_mask(const MaskOptions& opt, std::ostream& out);
void run_bench(const BenchCommandOptions& opt, std::ostream& out);
void run_cost(const CostCommandOptions& opt, std::ostream& out);
void run_batch_sim(const BatchSimOptions& opt, std::ostream& out);
void run_soup(const SoupCommandOptions& opt, std::ostream& out);
void run_reorder(const ReorderCommandOptions& opt, std::ostream& out);

// {"error": kind, "message": what} on one line.
std::string error_json(const std::string& kind, const std::string& message);

}  // namespace nabla::cli
