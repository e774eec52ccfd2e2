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

#include <sstream>

#include <gtest/gtest.h>

#include "nabla/block_mask.hpp"
#include "nabla/errors.hpp"
#include "nabla/rng.hpp"

namespace nabla {
namespace {

BlockMask random_mask(const BlockGrid& grid, std::size_t heads, double p, Rng& rng) {
  BlockMask m(grid, heads);
  for (std::size_t h = 0; h < heads; ++h) {
    for (std::size_t q = 0; q < grid.query_blocks; ++q) {
      for (std::size_t k = 0; k < grid.key_blocks; ++k) m.set(h, q, k, rng.uniform() < p);
    }
  }
  return m;
}

TEST(BlockMask, CountsAndSparsity) {
  const BlockMask all = BlockMask::all_true({64, 4, 4}, 2);
  EXPECT_EQ(all.count_true(), 32u);
  EXPECT_DOUBLE_EQ(all.sparsity(), 0.0);
  const BlockMask diag = BlockMask::diagonal({64, 4, 4}, 2);
  EXPECT_EQ(diag.count_true(1), 4u);
  EXPECT_DOUBLE_EQ(diag.sparsity(), 0.75);
  EXPECT_TRUE(diag.rows_nonempty());
  EXPECT_FALSE(BlockMask({64, 2, 2}, 1).rows_nonempty());
  EXPECT_THROW(BlockMask({64, 2, 2}, 1).require_rows_nonempty(), ContractViolation);
}

TEST(BlockMask, UnionIdentities) {
  Rng rng(1);
  const BlockGrid grid{64, 5, 7};
  const BlockMask a = random_mask(grid, 3, 0.3, rng);
  const BlockMask b = random_mask(grid, 3, 0.3, rng);
  EXPECT_EQ(union_masks(a, a), a);
  const BlockMask all = BlockMask::all_true(grid, 3);
  EXPECT_EQ(union_masks(BlockMask::diagonal({64, 5, 5}, 1), BlockMask::all_true({64, 5, 5}, 1)),
            BlockMask::all_true({64, 5, 5}, 1));
  const BlockMask u = union_masks(a, b);
  for (std::size_t h = 0; h < 3; ++h) {
    for (std::size_t q = 0; q < 5; ++q) {
      for (std::size_t k = 0; k < 7; ++k) {
        EXPECT_EQ(u.at(h, q, k), a.at(h, q, k) || b.at(h, q, k));
      }
    }
  }
  EXPECT_LE(u.sparsity(), std::min(a.sparsity(), b.sparsity()));
  EXPECT_EQ(union_masks(a, all), all);
  EXPECT_THROW(union_masks(a, BlockMask(grid, 2)), DimensionError);
}

TEST(BlockMask, BroadcastRepeatsHead) {
  Rng rng(2);
  const BlockMask one = random_mask({64, 3, 3}, 1, 0.5, rng);
  const BlockMask many = BlockMask::broadcast(one, 4);
  for (std::size_t h = 0; h < 4; ++h) {
    for (std::size_t q = 0; q < 3; ++q) {
      for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(many.at(h, q, k), one.at(0, q, k));
    }
  }
}

TEST(BlockMask, BitsetRoundTrip) {
  Rng rng(3);
  for (auto [qb, kb] : {std::pair{1, 1}, {3, 5}, {8, 8}, {13, 7}}) {
    const BlockMask m = random_mask({16, std::size_t(qb), std::size_t(kb)}, 3, 0.5, rng);
    std::stringstream buf;
    write_block_mask(buf, m);
    EXPECT_EQ(read_block_mask(buf, 16), m);
  }
}

TEST(BlockMask, BitsetIsPackedLsbFirst) {
  BlockMask m({64, 1, 10}, 1);
  m.set(0, 0, 0, true);
  m.set(0, 0, 9, true);
  std::stringstream buf;
  write_block_mask(buf, m);
  const std::string bytes = buf.str();
  ASSERT_EQ(bytes.size(), 3 * 8 + 2u);
  EXPECT_EQ(static_cast<unsigned char>(bytes[24]), 0x01);
  EXPECT_EQ(static_cast<unsigned char>(bytes[25]), 0x02);
}

TEST(BlockMask, TruncatedBitsetIsFormatError) {
  std::stringstream buf;
  write_block_mask(buf, BlockMask::all_true({64, 8, 8}, 2));
  std::string bytes = buf.str();
  bytes.pop_back();
  std::stringstream cut(bytes);
  EXPECT_THROW(read_block_mask(cut, 64), FormatError);
}

TEST(BlockMask, PgmHeaderAndPixels) {
  const BlockMask m = BlockMask::diagonal({64, 2, 3}, 1);
  std::stringstream buf;
  write_mask_pgm(buf, m, 0);
  const std::string bytes = buf.str();
  const std::string header = "P5\n3 2\n255\n";
  ASSERT_EQ(bytes.substr(0, header.size()), header);
  const std::string pixels = bytes.substr(header.size());
  ASSERT_EQ(pixels.size(), 6u);
  EXPECT_EQ(static_cast<unsigned char>(pixels[0]), 255);
  EXPECT_EQ(static_cast<unsigned char>(pixels[1]), 0);
  EXPECT_EQ(static_cast<unsigned char>(pixels[4]), 255);
  EXPECT_THROW(write_mask_pgm(buf, m, 1), DimensionError);
}

}  // namespace
}  // namespace nabla
