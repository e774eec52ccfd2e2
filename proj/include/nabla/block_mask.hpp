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
#include <iosfwd>
#include <span>
#include <vector>

namespace nabla {

// Block geometry of a (query-block x key-block) mask. block_size is the number
// of consecutive tokens pooled into one block.
struct BlockGrid {
  std::size_t block_size = 64;
  std::size_t query_blocks = 1;
  std::size_t key_blocks = 1;

  void validate() const;
  bool operator==(const BlockGrid&) const = default;
};

// Per-head boolean matrix over (query block, key block); true = compute.
class BlockMask {
 public:
  BlockMask() = default;
  BlockMask(BlockGrid grid, std::size_t heads, bool fill = false);

  static BlockMask all_true(BlockGrid grid, std::size_t heads);
  static BlockMask diagonal(BlockGrid grid, std::size_t heads);
  // Repeats a single-head mask across `heads` heads.
  static BlockMask broadcast(const BlockMask& single, std::size_t heads);

  const BlockGrid& grid() const { return grid_; }
  std::size_t heads() const { return heads_; }
  std::size_t query_blocks() const { return grid_.query_blocks; }
  std::size_t key_blocks() const { return grid_.key_blocks; }
  std::size_t block_size() const { return grid_.block_size; }

  bool at(std::size_t h, std::size_t q, std::size_t k) const { return bits_[index(h, q, k)] != 0; }
  void set(std::size_t h, std::size_t q, std::size_t k, bool v = true) {
    bits_[index(h, q, k)] = v ? 1 : 0;
  }

  std::span<const std::uint8_t> row(std::size_t h, std::size_t q) const {
    return std::span<const std::uint8_t>(bits_).subspan(index(h, q, 0), grid_.key_blocks);
  }
  std::span<const std::uint8_t> bits() const { return bits_; }

  std::size_t count_true() const;
  std::size_t count_true(std::size_t head) const;
  std::size_t row_count(std::size_t h, std::size_t q) const;
  std::size_t total() const { return bits_.size(); }

  double sparsity() const;
  double sparsity(std::size_t head) const;

  bool rows_nonempty() const;
  // Throws ContractViolation naming the first (head, row) with no true block.
  void require_rows_nonempty() const;

  bool operator==(const BlockMask&) const = default;

 private:
  std::size_t index(std::size_t h, std::size_t q, std::size_t k) const {
    return (h * grid_.query_blocks + q) * grid_.key_blocks + k;
  }

  BlockGrid grid_{};
  std::size_t heads_ = 0;
  std::vector<std::uint8_t> bits_;
};

// Element-wise OR. Grids and head counts must match.
BlockMask union_masks(const BlockMask& a, const BlockMask& b);

// Bitset container:
//   u64 heads, u64 query_blocks, u64 key_blocks (little-endian), then the
//   row-major bits packed LSB-first, ceil(total / 8) bytes.
// The block size is not stored; the reader supplies it.
void write_block_mask(std::ostream& out, const BlockMask& mask);
BlockMask read_block_mask(std::istream& in, std::size_t block_size);

// Binary PGM (P5) of one head: rows are query blocks, columns key blocks,
// white = kept.
void write_mask_pgm(std::ostream& out, const BlockMask& mask, std::size_t head);

}  // namespace nabla
