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

#include <cstddef>
#include <cstdint>
#include <string>

#include "nabla/attention.hpp"
#include "nabla/block_mask.hpp"
#include "nabla/rng.hpp"
#include "nabla/tensor.hpp"

namespace nabla {

// Block-sparse attention. For every (head, query block) the allowed key blocks
// are visited in increasing order with a streaming (running max, running sum)
// softmax, so K/V rows of disallowed blocks are never read. The mask may have
// one head (broadcast) or spec.num_heads heads; every row must allow at least
// one block.
Tensor block_sparse_attention(const Tensor& q, const Tensor& k, const Tensor& v,
                              const BlockMask& mask, const AttentionSpec& spec, int threads = 1);

// Multiply-add FLOPs (2 per MAC) of the score and value products.
std::uint64_t dense_attention_flops(std::size_t heads, std::size_t seq, std::size_t head_dim);
std::uint64_t sparse_attention_flops(const BlockMask& mask, std::size_t heads, std::size_t head_dim);

// Test hooks: overwrite K/V rows with NaN so any read of them shows up in the
// output.
//   poison_row_complement: every key block that (head, query_block) disallows.
//   poison_unreferenced:   per head, key blocks no query block allows.
void poison_row_complement(Tensor& k, Tensor& v, const BlockMask& mask, std::size_t head,
                           std::size_t query_block);
void poison_unreferenced(Tensor& k, Tensor& v, const BlockMask& mask);

// Random mask in which every row keeps round((1 - target) * key_blocks) blocks
// chosen uniformly. Throws ParameterError if that rounds to zero blocks.
BlockMask random_mask_with_sparsity(const BlockGrid& grid, std::size_t heads, double target,
                                    Rng& rng);

struct SparseAttnReport {
  std::size_t seq = 0;
  std::size_t head_dim = 0;
  std::size_t heads = 0;
  std::size_t block_size = 0;
  double target_sparsity = 0.0;
  double sparsity = 0.0;
  std::uint64_t flops_dense = 0;
  std::uint64_t flops_sparse = 0;
  double max_abs_err_vs_dense = 0.0;
  std::uint64_t seed = 0;
  int repeats = 0;
  int threads = 1;
  // Wall-clock fields; machine dependent.
  std::int64_t wall_dense_ns = 0;
  std::int64_t wall_sparse_ns = 0;

  double flop_ratio() const;
  double speedup() const;

  // Wall-clock values live under the "wall_clock" key, next to machine
  // metadata, so they can be stripped for reproducibility checks.
  std::string to_json() const;
  static std::string csv_header();
  std::string to_csv_row() const;
};

struct BenchOptions {
  std::size_t block_size = 64;
  int repeats = 5;
  int threads = 1;
  // Compare the sparse output against dense_attention_masked (not timed).
  bool check_error = true;
};

// Times dense_attention against block_sparse_attention on identical random
// inputs under a random mask of the requested sparsity (best of `repeats`).
SparseAttnReport bench_sparse_vs_dense(std::size_t seq, std::size_t head_dim, std::size_t heads,
                                       double target_sparsity, std::uint64_t seed,
                                       const BenchOptions& options = {});

}  // namespace nabla
