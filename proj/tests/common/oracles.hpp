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

// Naive reference implementations used by the tests. They share no code with
// the library: plain loops, double accumulation, no blocking.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

#include "nabla/block_mask.hpp"
#include "nabla/tensor.hpp"

namespace nabla::oracle {

inline Tensor matmul(const Tensor& a, const Tensor& b) {
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  Tensor c({m, n});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += double(a(i, p)) * double(b(p, j));
      c(i, j) = static_cast<float>(acc);
    }
  }
  return c;
}

// Per-element attention over [h x s x d]; `allowed(h, qi, kj)` filters keys.
template <typename Allowed>
Tensor attention(const Tensor& q, const Tensor& k, const Tensor& v, double scale,
                 Allowed allowed) {
  const std::size_t h = q.dim(0), s = q.dim(1), d = q.dim(2);
  Tensor out({h, s, d});
  std::vector<double> logits(s);
  for (std::size_t hh = 0; hh < h; ++hh) {
    for (std::size_t i = 0; i < s; ++i) {
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < s; ++j) {
        if (!allowed(hh, i, j)) continue;
        double dot = 0.0;
        for (std::size_t c = 0; c < d; ++c) dot += double(q(hh, i, c)) * double(k(hh, j, c));
        logits[j] = dot * scale;
        mx = std::max(mx, logits[j]);
      }
      double denom = 0.0;
      for (std::size_t j = 0; j < s; ++j) {
        if (allowed(hh, i, j)) denom += std::exp(logits[j] - mx);
      }
      for (std::size_t c = 0; c < d; ++c) {
        double acc = 0.0;
        for (std::size_t j = 0; j < s; ++j) {
          if (allowed(hh, i, j)) acc += std::exp(logits[j] - mx) / denom * double(v(hh, j, c));
        }
        out(hh, i, c) = static_cast<float>(acc);
      }
    }
  }
  return out;
}

inline Tensor attention(const Tensor& q, const Tensor& k, const Tensor& v, double scale) {
  return attention(q, k, v, scale, [](std::size_t, std::size_t, std::size_t) { return true; });
}

inline Tensor masked_attention(const Tensor& q, const Tensor& k, const Tensor& v, double scale,
                               const BlockMask& mask) {
  const std::size_t n = mask.block_size();
  const bool shared = mask.heads() == 1;
  return attention(q, k, v, scale, [&](std::size_t h, std::size_t i, std::size_t j) {
    return mask.at(shared ? 0 : h, i / n, j / n);
  });
}

// softmax(scale * mean-pooled q . mean-pooled k) for one head, in double.
inline std::vector<std::vector<double>> pooled_softmax(const Tensor& q, const Tensor& k,
                                                       std::size_t head, std::size_t n,
                                                       double scale) {
  const std::size_t s = q.dim(1), d = q.dim(2), b = s / n;
  auto pool = [&](const Tensor& x) {
    std::vector<std::vector<double>> p(b, std::vector<double>(d, 0.0));
    for (std::size_t i = 0; i < s; ++i) {
      for (std::size_t c = 0; c < d; ++c) p[i / n][c] += x(head, i, c) / double(n);
    }
    return p;
  };
  const auto qp = pool(q), kp = pool(k);
  std::vector<std::vector<double>> map(b, std::vector<double>(b));
  for (std::size_t i = 0; i < b; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < b; ++j) {
      map[i][j] = scale * std::inner_product(qp[i].begin(), qp[i].end(), kp[j].begin(), 0.0);
      mx = std::max(mx, map[i][j]);
    }
    double sum = 0.0;
    for (auto& x : map[i]) sum += (x = std::exp(x - mx));
    for (auto& x : map[i]) x /= sum;
  }
  return map;
}

}  // namespace nabla::oracle
