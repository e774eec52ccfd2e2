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

#include "core/gemm.hpp"

#include <algorithm>
#include <cstring>

namespace nabla::detail {

namespace {

#if defined(__AVX__)
constexpr std::size_t kLanes = 8;
#else
constexpr std::size_t kLanes = 4;
#endif
constexpr std::size_t kRows = 4;
constexpr std::size_t kVecs = 2;
constexpr std::size_t kCols = kLanes * kVecs;

using Vec = float __attribute__((vector_size(kLanes * sizeof(float))));

inline Vec load_vec(const float* p) {
  Vec v;
  std::memcpy(&v, p, sizeof(v));
  return v;
}

inline void store_vec(float* p, Vec v) { std::memcpy(p, &v, sizeof(v)); }

// Full kRows x kCols tile accumulated in vector registers.
inline void tile(const float* a, std::size_t lda, const float* b, std::size_t ldb, float* c,
                 std::size_t ldc, std::size_t k) {
  Vec acc[kRows][kVecs];
  for (std::size_t r = 0; r < kRows; ++r)
    for (std::size_t v = 0; v < kVecs; ++v) acc[r][v] = load_vec(c + r * ldc + kLanes * v);
  for (std::size_t p = 0; p < k; ++p) {
    Vec brow[kVecs];
    for (std::size_t v = 0; v < kVecs; ++v) brow[v] = load_vec(b + p * ldb + kLanes * v);
    for (std::size_t r = 0; r < kRows; ++r) {
      const float av = a[r * lda + p];
      for (std::size_t v = 0; v < kVecs; ++v) acc[r][v] += av * brow[v];
    }
  }
  for (std::size_t r = 0; r < kRows; ++r)
    for (std::size_t v = 0; v < kVecs; ++v) store_vec(c + r * ldc + kLanes * v, acc[r][v]);
}

// Ragged edge: same per-element accumulation order as tile().
inline void edge(const float* a, std::size_t lda, const float* b, std::size_t ldb, float* c,
                 std::size_t ldc, std::size_t rows, std::size_t cols, std::size_t k) {
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < cols; ++j) {
      float acc = c[r * ldc + j];
      for (std::size_t p = 0; p < k; ++p) acc += a[r * lda + p] * b[p * ldb + j];
      c[r * ldc + j] = acc;
    }
  }
}

}  // namespace

void gemm_accumulate(const float* a, std::size_t lda, const float* b, std::size_t ldb, float* c,
                     std::size_t ldc, std::size_t m, std::size_t n, std::size_t k) {
  // Cache blocking over k and n. Partial sums round-trip through c between
  // k panels, which leaves each element's accumulation order unchanged.
  constexpr std::size_t kPanelK = 128;
  constexpr std::size_t kPanelN = 256;
  const std::size_t m_full = m - m % kRows;
  for (std::size_t p0 = 0; p0 < k; p0 += kPanelK) {
    const std::size_t kc = std::min(kPanelK, k - p0);
    const float* ap = a + p0;
    const float* bp = b + p0 * ldb;
    for (std::size_t j0 = 0; j0 < n; j0 += kPanelN) {
      const std::size_t nc = std::min(kPanelN, n - j0);
      const std::size_t nc_full = nc - nc % kCols;
      for (std::size_t i = 0; i < m_full; i += kRows) {
        for (std::size_t j = j0; j < j0 + nc_full; j += kCols) {
          tile(ap + i * lda, lda, bp + j, ldb, c + i * ldc + j, ldc, kc);
        }
        if (nc_full < nc) {
          const std::size_t j = j0 + nc_full;
          edge(ap + i * lda, lda, bp + j, ldb, c + i * ldc + j, ldc, kRows, nc - nc_full, kc);
        }
      }
      if (m_full < m) {
        edge(ap + m_full * lda, lda, bp + j0, ldb, c + m_full * ldc + j0, ldc, m - m_full, nc, kc);
      }
    }
  }
}

}  // namespace nabla::detail
