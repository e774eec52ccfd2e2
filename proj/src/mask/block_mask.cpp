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

#include "nabla/block_mask.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <string>

#include "nabla/errors.hpp"
#include "nabla/tensor_io.hpp"

namespace nabla {

void BlockGrid::validate() const {
  if (block_size == 0 || query_blocks == 0 || key_blocks == 0) {
    throw DimensionError("block grid extents must be positive");
  }
}

BlockMask::BlockMask(BlockGrid grid, std::size_t heads, bool fill)
    : grid_(grid), heads_(heads) {
  grid_.validate();
  if (heads_ == 0) throw DimensionError("mask needs at least one head");
  bits_.assign(heads_ * grid_.query_blocks * grid_.key_blocks, fill ? 1 : 0);
}

BlockMask BlockMask::all_true(BlockGrid grid, std::size_t heads) {
  return BlockMask(grid, heads, true);
}

BlockMask BlockMask::diagonal(BlockGrid grid, std::size_t heads) {
  BlockMask m(grid, heads);
  for (std::size_t h = 0; h < heads; ++h)
    for (std::size_t q = 0; q < std::min(grid.query_blocks, grid.key_blocks); ++q) m.set(h, q, q);
  return m;
}

BlockMask BlockMask::broadcast(const BlockMask& single, std::size_t heads) {
  if (single.heads() != 1) throw DimensionError("broadcast expects a single-head mask");
  BlockMask m(single.grid(), heads);
  const std::size_t per_head = single.total();
  for (std::size_t h = 0; h < heads; ++h) {
    std::copy(single.bits_.begin(), single.bits_.end(), m.bits_.begin() + h * per_head);
  }
  return m;
}

std::size_t BlockMask::count_true() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1));
}

std::size_t BlockMask::count_true(std::size_t head) const {
  const std::size_t per_head = grid_.query_blocks * grid_.key_blocks;
  auto first = bits_.begin() + head * per_head;
  return static_cast<std::size_t>(std::count(first, first + per_head, 1));
}

std::size_t BlockMask::row_count(std::size_t h, std::size_t q) const {
  auto r = row(h, q);
  return static_cast<std::size_t>(std::count(r.begin(), r.end(), 1));
}

double BlockMask::sparsity() const {
  return 1.0 - static_cast<double>(count_true()) / static_cast<double>(total());
}

double BlockMask::sparsity(std::size_t head) const {
  const double per_head = static_cast<double>(grid_.query_blocks * grid_.key_blocks);
  return 1.0 - static_cast<double>(count_true(head)) / per_head;
}

bool BlockMask::rows_nonempty() const {
  for (std::size_t h = 0; h < heads_; ++h)
    for (std::size_t q = 0; q < grid_.query_blocks; ++q)
      if (row_count(h, q) == 0) return false;
  return true;
}

void BlockMask::require_rows_nonempty() const {
  for (std::size_t h = 0; h < heads_; ++h) {
    for (std::size_t q = 0; q < grid_.query_blocks; ++q) {
      if (row_count(h, q) == 0) {
        throw ContractViolation("mask row (head " + std::to_string(h) + ", query block " +
                                std::to_string(q) + ") allows no key block");
      }
    }
  }
}

BlockMask union_masks(const BlockMask& a, const BlockMask& b) {
  if (a.grid() != b.grid() || a.heads() != b.heads()) {
    throw DimensionError("union_masks: grids or head counts differ");
  }
  BlockMask out = a;
  for (std::size_t h = 0; h < a.heads(); ++h)
    for (std::size_t q = 0; q < a.query_blocks(); ++q)
      for (std::size_t k = 0; k < a.key_blocks(); ++k)
        if (b.at(h, q, k)) out.set(h, q, k);
  return out;
}

void write_block_mask(std::ostream& out, const BlockMask& mask) {
  le::put_u64(out, mask.heads());
  le::put_u64(out, mask.query_blocks());
  le::put_u64(out, mask.key_blocks());
  auto bits = mask.bits();
  std::string packed((bits.size() + 7) / 8, '\0');
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i]) packed[i / 8] = static_cast<char>(packed[i / 8] | (1u << (i % 8)));
  }
  out.write(packed.data(), static_cast<std::streamsize>(packed.size()));
  if (!out) throw IoError("failed writing block mask");
}

BlockMask read_block_mask(std::istream& in, std::size_t block_size) {
  const auto heads = le::get_u64(in);
  const auto qb = le::get_u64(in);
  const auto kb = le::get_u64(in);
  if (heads == 0 || qb == 0 || kb == 0) throw FormatError("block mask header has a zero extent");
  BlockMask mask(BlockGrid{block_size, qb, kb}, heads);
  std::string packed((mask.total() + 7) / 8, '\0');
  if (!in.read(packed.data(), static_cast<std::streamsize>(packed.size()))) {
    throw FormatError("truncated block mask payload");
  }
  std::size_t i = 0;
  for (std::size_t h = 0; h < heads; ++h)
    for (std::size_t q = 0; q < qb; ++q)
      for (std::size_t k = 0; k < kb; ++k, ++i)
        mask.set(h, q, k, (static_cast<unsigned char>(packed[i / 8]) >> (i % 8)) & 1u);
  return mask;
}

void write_mask_pgm(std::ostream& out, const BlockMask& mask, std::size_t head) {
  if (head >= mask.heads()) throw DimensionError("PGM head index out of range");
  out << "P5\n" << mask.key_blocks() << ' ' << mask.query_blocks() << "\n255\n";
  for (std::size_t q = 0; q < mask.query_blocks(); ++q) {
    for (auto bit : mask.row(head, q)) out.put(bit ? static_cast<char>(255) : '\0');
  }
  if (!out) throw IoError("failed writing PGM");
}

}  // namespace nabla
