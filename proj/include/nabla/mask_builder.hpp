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
#include <optional>
#include <span>
#include <vector>

#include "nabla/attention.hpp"
#include "nabla/block_mask.hpp"
#include "nabla/reorder.hpp"
#include "nabla/tensor.hpp"

namespace nabla {

// Sliding-tile window in block units along (time, rows, cols). Each side must
// be odd; a block attends to neighbours within (w - 1) / 2 along every axis.
struct StaWindow {
  std::size_t t = 1;
  std::size_t h = 1;
  std::size_t w = 1;
};

// Block coordinates of a reordered sequence: blocks enumerate frames, then
// patch rows, then patch columns.
struct BlockLayout {
  std::size_t frames = 1;
  std::size_t rows = 1;
  std::size_t cols = 1;

  std::size_t count() const { return frames * rows * cols; }
};

// The block layout of a reordered video when each block is one P x P patch.
// Throws LayoutError unless block_size == P * P.
BlockLayout block_layout_for(const VideoLayout& layout, std::size_t block_size);

struct NablaConfig {
  // Fraction of pooled attention mass that may be dropped per row.
  double thr = 0.1;
  std::size_t block_size = 64;
  std::optional<StaWindow> sta;

  void validate() const;
};

// [h x s x d] -> [h x s/N x d]; each output row is the mean of N consecutive
// input rows.
Tensor pool_sequence(const Tensor& x, std::size_t block_size);

// Per head softmax_rows(scale * Qp Kp^T) over pooled [h x B x d] inputs.
Tensor lowres_map(const Tensor& q_pooled, const Tensor& k_pooled, float scale);

// Indices kept for one probability row: sort descending (ties to the lower
// index) and keep the shortest non-empty prefix whose mass reaches
// (1 - thr) of the row total. Returned in descending-probability order.
std::vector<std::size_t> cdf_keep(std::span<const float> row, double thr);

// Applies cdf_keep to every (head, row) of an [h x Bq x Bk] map. Rows must sum
// to 1 within 1e-4.
BlockMask cdf_threshold(const Tensor& map, double thr, std::size_t block_size);

// Single-head content-independent sliding-tile mask.
BlockMask sta_mask(const BlockGrid& grid, const BlockLayout& blocks, const StaWindow& window);

// pool -> low-resolution map -> CDF threshold, unioned with the STA mask when
// cfg.sta is set. q and k must already be in reordered token order.
BlockMask build_nabla_mask(const Tensor& q, const Tensor& k, const VideoLayout& layout,
                           const NablaConfig& cfg, const AttentionSpec& spec, int threads = 1);

}  // namespace nabla
