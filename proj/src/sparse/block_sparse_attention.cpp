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

#include "nabla/sparse_attention.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "core/gemm.hpp"
#include "nabla/errors.hpp"
#include "nabla/parallel.hpp"

namespace nabla {

namespace {

void check_mask_for(const Tensor& q, const BlockMask& mask, const AttentionSpec& spec) {
  const std::size_t s = q.dim(1);
  const std::size_t n = mask.block_size();
  if (s % n != 0) {
    throw DimensionError("sequence length " + std::to_string(s) + " not divisible by block size " +
                         std::to_string(n));
  }
  if (mask.query_blocks() != s / n || mask.key_blocks() != s / n) {
    throw DimensionError("mask grid " + std::to_string(mask.query_blocks()) + "x" +
                         std::to_string(mask.key_blocks()) + " does not match " +
                         std::to_string(s / n) + " blocks");
  }
  if (mask.heads() != 1 && mask.heads() != spec.num_heads) {
    throw DimensionError("mask head count must be 1 or num_heads");
  }
  mask.require_rows_nonempty();
}

// Scratch buffers for one (head, query block) task.
struct Workspace {
  std::vector<float> query;   // N x d, pre-scaled query block
  std::vector<float> key_t;   // d x N, transposed key block
  std::vector<float> scores;  // N x N, logits then probabilities
  std::vector<float> acc;     // N x d
  std::vector<float> row_max;
  std::vector<float> row_sum;

  Workspace(std::size_t n, std::size_t d)
      : query(n * d), key_t(d * n), scores(n * n), acc(n * d), row_max(n), row_sum(n) {}
};

void attend_query_block(const float* qh, const float* kh, const float* vh, float* oh,
                        std::span<const std::uint8_t> allowed, std::size_t qb, std::size_t n,
                        std::size_t d, float scale, Workspace& ws) {
  constexpr float kNegInf = -std::numeric_limits<float>::infinity();
  std::fill(ws.acc.begin(), ws.acc.end(), 0.0f);
  std::fill(ws.row_max.begin(), ws.row_max.end(), kNegInf);
  std::fill(ws.row_sum.begin(), ws.row_sum.end(), 0.0f);
  const float* qblk = qh + qb * n * d;
  for (std::size_t i = 0; i < n * d; ++i) ws.query[i] = qblk[i] * scale;

  for (std::size_t kb = 0; kb < allowed.size(); ++kb) {
    if (!allowed[kb]) continue;
    const float* kblk = kh + kb * n * d;
    const float* vblk = vh + kb * n * d;
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t c = 0; c < d; ++c) ws.key_t[c * n + j] = kblk[j * d + c];

    std::fill(ws.scores.begin(), ws.scores.end(), 0.0f);
    detail::gemm_accumulate(ws.query.data(), d, ws.key_t.data(), n, ws.scores.data(), n, n, n, d);

    // Online softmax: rescale what has been accumulated so far to the new
    // running max, then turn this block's logits into unnormalized weights.
    for (std::size_t i = 0; i < n; ++i) {
      float* srow = ws.scores.data() + i * n;
      const float block_max = *std::max_element(srow, srow + n);
      const float new_max = std::max(ws.row_max[i], block_max);
      const float correction = std::exp(ws.row_max[i] - new_max);
      if (correction != 1.0f) {
        float* arow = ws.acc.data() + i * d;
        for (std::size_t c = 0; c < d; ++c) arow[c] *= correction;
      }
      float block_sum = 0.0f;
      for (std::size_t j = 0; j < n; ++j) {
        srow[j] = std::exp(srow[j] - new_max);
        block_sum += srow[j];
      }
      ws.row_sum[i] = ws.row_sum[i] * correction + block_sum;
      ws.row_max[i] = new_max;
    }
    detail::gemm_accumulate(ws.scores.data(), n, vblk, d, ws.acc.data(), d, n, d, n);
  }

  float* oblk = oh + qb * n * d;
  for (std::size_t i = 0; i < n; ++i) {
    const float inv = 1.0f / ws.row_sum[i];
    for (std::size_t c = 0; c < d; ++c) oblk[i * d + c] = ws.acc[i * d + c] * inv;
  }
}

void fill_nan_block(Tensor& t, std::size_t head, std::size_t block, std::size_t n) {
  const std::size_t d = t.dim(2);
  auto dst = t.slice(head).subspan(block * n * d, n * d);
  std::fill(dst.begin(), dst.end(), std::numeric_limits<float>::quiet_NaN());
}

}  // namespace

Tensor block_sparse_attention(const Tensor& q, const Tensor& k, const Tensor& v,
                              const BlockMask& mask, const AttentionSpec& spec, int threads) {
  check_qkv(q, k, v, spec);
  check_mask_for(q, mask, spec);
  const std::size_t heads = q.dim(0), s = q.dim(1), d = q.dim(2);
  const std::size_t n = mask.block_size();
  const std::size_t blocks = s / n;
  const float scale = spec.effective_scale();
  Tensor out(q.shape());

  const std::size_t workers = static_cast<std::size_t>(std::max(threads, 1));
  const std::size_t tasks = heads * blocks;
  const std::size_t chunk = (tasks + workers - 1) / workers;
  // One workspace per contiguous chunk of (head, query block) tasks.
  parallel_for((tasks + chunk - 1) / chunk, threads, [&](std::size_t w) {
    Workspace ws(n, d);
    for (std::size_t task = w * chunk; task < std::min(tasks, (w + 1) * chunk); ++task) {
      const std::size_t h = task / blocks, qb = task % blocks;
      const std::size_t mh = mask.heads() == 1 ? 0 : h;
      attend_query_block(q.slice(h).data(), k.slice(h).data(), v.slice(h).data(),
                         out.slice(h).data(), mask.row(mh, qb), qb, n, d, scale, ws);
    }
  });
  return out;
}

std::uint64_t dense_attention_flops(std::size_t heads, std::size_t seq, std::size_t head_dim) {
  return 4ull * heads * seq * seq * head_dim;
}

std::uint64_t sparse_attention_flops(const BlockMask& mask, std::size_t heads,
                                     std::size_t head_dim) {
  const std::uint64_t n = mask.block_size();
  std::uint64_t kept = mask.count_true();
  if (mask.heads() == 1) kept *= heads;
  return 4ull * kept * n * n * head_dim;
}

void poison_row_complement(Tensor& k, Tensor& v, const BlockMask& mask, std::size_t head,
                           std::size_t query_block) {
  const std::size_t mh = mask.heads() == 1 ? 0 : head;
  for (std::size_t kb = 0; kb < mask.key_blocks(); ++kb) {
    if (!mask.at(mh, query_block, kb)) {
      fill_nan_block(k, head, kb, mask.block_size());
      fill_nan_block(v, head, kb, mask.block_size());
    }
  }
}

void poison_unreferenced(Tensor& k, Tensor& v, const BlockMask& mask) {
  const std::size_t heads = k.dim(0);
  for (std::size_t h = 0; h < heads; ++h) {
    const std::size_t mh = mask.heads() == 1 ? 0 : h;
    for (std::size_t kb = 0; kb < mask.key_blocks(); ++kb) {
      bool used = false;
      for (std::size_t qb = 0; qb < mask.query_blocks() && !used; ++qb) used = mask.at(mh, qb, kb);
      if (!used) {
        fill_nan_block(k, h, kb, mask.block_size());
        fill_nan_block(v, h, kb, mask.block_size());
      }
    }
  }
}

BlockMask random_mask_with_sparsity(const BlockGrid& grid, std::size_t heads, double target,
                                    Rng& rng) {
  grid.validate();
  if (!(target >= 0.0 && target < 1.0)) throw ParameterError("target sparsity must lie in [0, 1)");
  const double ideal = (1.0 - target) * static_cast<double>(grid.key_blocks);
  const auto keep = static_cast<std::size_t>(std::llround(ideal));
  if (keep == 0) {
    throw ParameterError("sparsity " + std::to_string(target) + " leaves less than one of " +
                         std::to_string(grid.key_blocks) + " key blocks per row");
  }
  BlockMask mask(grid, heads);
  std::vector<std::size_t> idx(grid.key_blocks);
  for (std::size_t h = 0; h < heads; ++h) {
    for (std::size_t q = 0; q < grid.query_blocks; ++q) {
      std::iota(idx.begin(), idx.end(), 0);
      rng.shuffle(idx.begin(), idx.end());
      for (std::size_t i = 0; i < keep; ++i) mask.set(h, q, idx[i]);
    }
  }
  return mask;
}

}  // namespace nabla
