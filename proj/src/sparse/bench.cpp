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

#include <chrono>
#include <cstdio>
#include <limits>
#include <string>
#include <thread>

#include <json.hpp>

#include "nabla/errors.hpp"
#include "nabla/sparse_attention.hpp"

namespace nabla {

namespace {

template <typename Fn>
std::int64_t best_of(int repeats, Fn&& fn) {
  std::int64_t best = std::numeric_limits<std::int64_t>::max();
  for (int r = 0; r < repeats; ++r) {
    const auto start = std::chrono::steady_clock::now();
    fn();
    const auto stop = std::chrono::steady_clock::now();
    best = std::min<std::int64_t>(
        best, std::chrono::duration_cast<std::chrono::nanoseconds>(stop - start).count());
  }
  return best;
}

std::string fmt6(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", x);
  return buf;
}

}  // namespace

double SparseAttnReport::flop_ratio() const {
  return flops_dense == 0 ? 0.0 : static_cast<double>(flops_sparse) / static_cast<double>(flops_dense);
}

double SparseAttnReport::speedup() const {
  return wall_sparse_ns == 0 ? 0.0 : static_cast<double>(wall_dense_ns) / static_cast<double>(wall_sparse_ns);
}

std::string SparseAttnReport::to_json() const {
  nlohmann::json j;
  j["seq"] = seq;
  j["head_dim"] = head_dim;
  j["heads"] = heads;
  j["block_size"] = block_size;
  j["target_sparsity"] = target_sparsity;
  j["sparsity"] = sparsity;
  j["flops_dense"] = flops_dense;
  j["flops_sparse"] = flops_sparse;
  j["flop_ratio"] = flop_ratio();
  j["max_abs_err_vs_dense"] = max_abs_err_vs_dense;
  j["seed"] = seed;
  j["repeats"] = repeats;
  j["threads"] = threads;
  j["wall_clock"] = {
      {"wall_dense_ns", wall_dense_ns},
      {"wall_sparse_ns", wall_sparse_ns},
      {"speedup", speedup()},
      {"machine",
       {{"hardware_concurrency", std::thread::hardware_concurrency()},
        {"compiler", __VERSION__}}},
  };
  return j.dump();
}

std::string SparseAttnReport::csv_header() {
  return "seq,head_dim,heads,block_size,target_sparsity,sparsity,flops_dense,flops_sparse,"
         "flop_ratio,max_abs_err_vs_dense,seed,wall_dense_ns,wall_sparse_ns,speedup";
}

std::string SparseAttnReport::to_csv_row() const {
  return std::to_string(seq) + ',' + std::to_string(head_dim) + ',' + std::to_string(heads) + ',' +
         std::to_string(block_size) + ',' + fmt6(target_sparsity) + ',' + fmt6(sparsity) + ',' +
         std::to_string(flops_dense) + ',' + std::to_string(flops_sparse) + ',' +
         fmt6(flop_ratio()) + ',' + fmt6(max_abs_err_vs_dense) + ',' + std::to_string(seed) + ',' +
         std::to_string(wall_dense_ns) + ',' + std::to_string(wall_sparse_ns) + ',' +
         fmt6(speedup());
}

SparseAttnReport bench_sparse_vs_dense(std::size_t seq, std::size_t head_dim, std::size_t heads,
                                       double target_sparsity, std::uint64_t seed,
                                       const BenchOptions& options) {
  if (options.block_size == 0 || seq == 0 || seq % options.block_size != 0) {
    throw ParameterError("sequence length " + std::to_string(seq) +
                         " must be a positive multiple of block size " +
                         std::to_string(options.block_size));
  }
  if (options.repeats < 1) throw ParameterError("repeats must be >= 1");
  const std::size_t blocks = seq / options.block_size;
  Rng rng(seed);
  const BlockMask mask = random_mask_with_sparsity(BlockGrid{options.block_size, blocks, blocks},
                                                   heads, target_sparsity, rng);
  const Tensor q = random_normal({heads, seq, head_dim}, rng);
  const Tensor k = random_normal({heads, seq, head_dim}, rng);
  const Tensor v = random_normal({heads, seq, head_dim}, rng);
  const auto spec = AttentionSpec::for_head_dim(heads, head_dim);

  SparseAttnReport report;
  report.seq = seq;
  report.head_dim = head_dim;
  report.heads = heads;
  report.block_size = options.block_size;
  report.target_sparsity = target_sparsity;
  report.sparsity = mask.sparsity();
  report.flops_dense = dense_attention_flops(heads, seq, head_dim);
  report.flops_sparse = sparse_attention_flops(mask, heads, head_dim);
  report.seed = seed;
  report.repeats = options.repeats;
  report.threads = options.threads;

  Tensor sparse_out;
  report.wall_dense_ns = best_of(options.repeats, [&] {
    volatile float sink = dense_attention(q, k, v, spec, options.threads).data()[0];
    (void)sink;
  });
  report.wall_sparse_ns = best_of(options.repeats, [&] {
    sparse_out = block_sparse_attention(q, k, v, mask, spec, options.threads);
  });
  if (options.check_error) {
    const Tensor oracle = dense_attention_masked(q, k, v, spec, mask, options.threads);
    report.max_abs_err_vs_dense = max_abs_diff(sparse_out, oracle);
  }
  return report;
}

}  // namespace nabla
