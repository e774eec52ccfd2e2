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

#include "nabla/mask_builder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "nabla/errors.hpp"
#include "nabla/parallel.hpp"

namespace nabla {

namespace {

constexpr double kRowSumTolerance = 1e-4;

std::size_t abs_diff(std::size_t a, std::size_t b) { return a > b ? a - b : b - a; }

}  // namespace

BlockLayout block_layout_for(const VideoLayout& layout, std::size_t block_size) {
  layout.validate();
  if (block_size != layout.patch_tokens()) {
    throw LayoutError("block size " + std::to_string(block_size) + " must equal patch^2 = " +
                      std::to_string(layout.patch_tokens()) + " for block coordinates");
  }
  return BlockLayout{layout.frames, layout.patch_rows(), layout.patch_cols()};
}

void NablaConfig::validate() const {
  if (!(thr >= 0.0 && thr < 1.0)) throw ParameterError("thr must lie in [0, 1)");
  if (block_size == 0) throw ParameterError("block size must be positive");
  if (sta) {
    for (auto side : {sta->t, sta->h, sta->w}) {
      if (side == 0 || side % 2 == 0) throw ParameterError("STA window sides must be odd and >= 1");
    }
  }
}

Tensor pool_sequence(const Tensor& x, std::size_t block_size) {
  if (x.rank() != 3) throw DimensionError("pool_sequence expects [h x s x d]");
  if (block_size == 0) throw DimensionError("block size must be positive");
  const std::size_t h = x.dim(0), s = x.dim(1), d = x.dim(2);
  if (s % block_size != 0) {
    throw DimensionError("sequence length " + std::to_string(s) +
                         " is not divisible by block size " + std::to_string(block_size));
  }
  const std::size_t blocks = s / block_size;
  Tensor out({h, blocks, d});
  std::vector<double> acc(d);
  for (std::size_t head = 0; head < h; ++head) {
    for (std::size_t b = 0; b < blocks; ++b) {
      std::fill(acc.begin(), acc.end(), 0.0);
      for (std::size_t r = b * block_size; r < (b + 1) * block_size; ++r)
        for (std::size_t c = 0; c < d; ++c) acc[c] += x(head, r, c);
      for (std::size_t c = 0; c < d; ++c)
        out(head, b, c) = static_cast<float>(acc[c] / static_cast<double>(block_size));
    }
  }
  return out;
}

Tensor lowres_map(const Tensor& q_pooled, const Tensor& k_pooled, float scale) {
  if (q_pooled.rank() != 3 || k_pooled.rank() != 3) throw DimensionError("lowres_map expects rank-3 inputs");
  if (q_pooled.dim(0) != k_pooled.dim(0) || q_pooled.dim(2) != k_pooled.dim(2)) {
    throw DimensionError("pooled q/k shapes disagree: " + shape_string(q_pooled.shape()) + " vs " +
                         shape_string(k_pooled.shape()));
  }
  const std::size_t h = q_pooled.dim(0);
  std::vector<Tensor> heads;
  heads.reserve(h);
  for (std::size_t head = 0; head < h; ++head) {
    Tensor logits = matmul(q_pooled.sub(head), transpose(k_pooled.sub(head)));
    for (auto& v : logits.data()) v *= scale;
    heads.push_back(softmax_rows(logits));
  }
  return stack(heads);
}

std::vector<std::size_t> cdf_keep(std::span<const float> row, double thr) {
  if (row.empty()) throw DimensionError("cdf_keep: empty row");
  if (!(thr >= 0.0 && thr < 1.0)) throw ParameterError("thr must lie in [0, 1)");
  std::vector<std::size_t> order(row.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return row[a] > row[b]; });
  // tail[i] = mass of order[i..]; summed from the smallest entry upward.
  std::vector<double> tail(row.size() + 1, 0.0);
  for (std::size_t i = row.size(); i-- > 0;) tail[i] = tail[i + 1] + row[order[i]];
  const double budget = thr * tail[0];
  // Shortest prefix whose kept mass reaches (1 - thr) * total, i.e. whose
  // dropped tail is within thr * total. Phrasing it via the tail keeps every
  // positive entry at thr = 0 regardless of rounding in the row total.
  std::size_t keep = 1;
  while (keep < row.size() && tail[keep] > budget) ++keep;
  order.resize(keep);
  return order;
}

BlockMask cdf_threshold(const Tensor& map, double thr, std::size_t block_size) {
  if (map.rank() != 3) throw DimensionError("cdf_threshold expects [h x Bq x Bk]");
  if (!(thr >= 0.0 && thr < 1.0)) throw ParameterError("thr must lie in [0, 1)");
  const std::size_t h = map.dim(0), bq = map.dim(1), bk = map.dim(2);
  BlockMask mask(BlockGrid{block_size, bq, bk}, h);
  for (std::size_t head = 0; head < h; ++head) {
    for (std::size_t q = 0; q < bq; ++q) {
      auto row = map.slice(head).subspan(q * bk, bk);
      double sum = 0.0;
      for (float p : row) {
        if (!(p >= 0.0f)) throw ContractViolation("probability rows must be non-negative");
        sum += p;
      }
      if (std::fabs(sum - 1.0) > kRowSumTolerance) {
        throw ContractViolation("row (head " + std::to_string(head) + ", block " +
                                std::to_string(q) + ") sums to " + std::to_string(sum) +
                                ", not 1");
      }
      for (auto k : cdf_keep(row, thr)) mask.set(head, q, k);
    }
  }
  return mask;
}

BlockMask sta_mask(const BlockGrid& grid, const BlockLayout& blocks, const StaWindow& window) {
  grid.validate();
  if (blocks.count() != grid.query_blocks || blocks.count() != grid.key_blocks) {
    throw LayoutError("block layout " + std::to_string(blocks.frames) + "x" +
                      std::to_string(blocks.rows) + "x" + std::to_string(blocks.cols) +
                      " does not cover the " + std::to_string(grid.query_blocks) + "x" +
                      std::to_string(grid.key_blocks) + " grid");
  }
  for (auto side : {window.t, window.h, window.w}) {
    if (side == 0 || side % 2 == 0) throw ParameterError("STA window sides must be odd and >= 1");
  }
  const std::size_t rt = (window.t - 1) / 2, rh = (window.h - 1) / 2, rw = (window.w - 1) / 2;
  const std::size_t per_frame = blocks.rows * blocks.cols;
  BlockMask mask(grid, 1);
  for (std::size_t q = 0; q < grid.query_blocks; ++q) {
    const std::size_t qt = q / per_frame, qh = (q % per_frame) / blocks.cols, qw = q % blocks.cols;
    for (std::size_t k = 0; k < grid.key_blocks; ++k) {
      const std::size_t kt = k / per_frame, kh = (k % per_frame) / blocks.cols, kw = k % blocks.cols;
      if (abs_diff(qt, kt) <= rt && abs_diff(qh, kh) <= rh && abs_diff(qw, kw) <= rw) {
        mask.set(0, q, k);
      }
    }
  }
  return mask;
}

BlockMask build_nabla_mask(const Tensor& q, const Tensor& k, const VideoLayout& layout,
                           const NablaConfig& cfg, const AttentionSpec& spec, int threads) {
  cfg.validate();
  check_qkv(q, k, k, spec);
  layout.validate();
  const std::size_t s = q.dim(1);
  if (s != layout.sequence_length()) {
    throw LayoutError("sequence length " + std::to_string(s) + " != T*H*W = " +
                      std::to_string(layout.sequence_length()));
  }
  const Tensor qp = pool_sequence(q, cfg.block_size);
  const Tensor kp = pool_sequence(k, cfg.block_size);
  const std::size_t heads = spec.num_heads;
  const std::size_t blocks = s / cfg.block_size;
  const float scale = spec.effective_scale();

  // Per-head pipeline; each head writes only its own slice of the mask.
  BlockMask mask(BlockGrid{cfg.block_size, blocks, blocks}, heads);
  std::vector<BlockMask> per_head(heads);
  parallel_for(heads, threads, [&](std::size_t h) {
    const Tensor map = lowres_map(qp.sub(h).reshaped({1, blocks, qp.dim(2)}),
                                  kp.sub(h).reshaped({1, blocks, kp.dim(2)}), scale);
    per_head[h] = cdf_threshold(map, cfg.thr, cfg.block_size);
  });
  for (std::size_t h = 0; h < heads; ++h)
    for (std::size_t r = 0; r < blocks; ++r)
      for (std::size_t c = 0; c < blocks; ++c)
        if (per_head[h].at(0, r, c)) mask.set(h, r, c);

  if (cfg.sta) {
    const BlockMask sta = sta_mask(mask.grid(), block_layout_for(layout, cfg.block_size), *cfg.sta);
    mask = union_masks(mask, BlockMask::broadcast(sta, heads));
  }
  mask.require_rows_nonempty();
  return mask;
}

}  // namespace nabla
