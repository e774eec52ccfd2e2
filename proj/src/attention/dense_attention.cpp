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

#include "nabla/attention.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "nabla/errors.hpp"
#include "nabla/parallel.hpp"

namespace nabla {

float AttentionSpec::effective_scale() const {
  return scale > 0.0f ? scale : 1.0f / std::sqrt(static_cast<float>(head_dim));
}

void AttentionSpec::validate() const {
  if (num_heads == 0 || head_dim == 0) throw ParameterError("attention heads and head_dim must be positive");
  if (!(std::isfinite(scale) && scale >= 0.0f)) throw ParameterError("attention scale must be positive");
}

AttentionSpec AttentionSpec::for_head_dim(std::size_t heads, std::size_t head_dim) {
  return AttentionSpec{heads, head_dim, 1.0f / std::sqrt(static_cast<float>(head_dim))};
}

void check_qkv(const Tensor& q, const Tensor& k, const Tensor& v, const AttentionSpec& spec) {
  spec.validate();
  if (q.rank() != 3) throw DimensionError("attention inputs must be [heads x seq x dim]");
  if (q.shape() != k.shape() || q.shape() != v.shape()) {
    throw DimensionError("q/k/v shapes differ: " + shape_string(q.shape()) + ", " +
                         shape_string(k.shape()) + ", " + shape_string(v.shape()));
  }
  if (q.dim(0) != spec.num_heads || q.dim(2) != spec.head_dim) {
    throw DimensionError("q shape " + shape_string(q.shape()) + " does not match spec (" +
                         std::to_string(spec.num_heads) + " heads, dim " +
                         std::to_string(spec.head_dim) + ")");
  }
}

namespace {

// Scaled logits for one head, optionally masked, followed by softmax and the
// value product. `mask_head` < 0 means unmasked.
Tensor attend_head(const Tensor& q, const Tensor& k, const Tensor& v, float scale,
                   const BlockMask* mask, std::size_t mask_head) {
  Tensor logits = matmul(q, transpose(k));
  for (auto& x : logits.data()) x *= scale;
  if (mask != nullptr) {
    const std::size_t n = mask->block_size();
    const std::size_t s = q.dim(0);
    for (std::size_t i = 0; i < s; ++i) {
      for (std::size_t j = 0; j < s; ++j) {
        if (!mask->at(mask_head, i / n, j / n)) logits(i, j) = -std::numeric_limits<float>::infinity();
      }
    }
  }
  return matmul(softmax_rows(logits), v);
}

Tensor run_heads(const Tensor& q, const Tensor& k, const Tensor& v, const AttentionSpec& spec,
                 const BlockMask* mask, int threads) {
  const std::size_t h = q.dim(0);
  Tensor out(q.shape());
  const float scale = spec.effective_scale();
  parallel_for(h, threads, [&](std::size_t head) {
    const std::size_t mh = (mask && mask->heads() == 1) ? 0 : head;
    Tensor o = attend_head(q.sub(head), k.sub(head), v.sub(head), scale, mask, mh);
    auto dst = out.slice(head);
    std::copy(o.data().begin(), o.data().end(), dst.begin());
  });
  return out;
}

}  // namespace

Tensor dense_attention(const Tensor& q, const Tensor& k, const Tensor& v,
                       const AttentionSpec& spec, int threads) {
  check_qkv(q, k, v, spec);
  return run_heads(q, k, v, spec, nullptr, threads);
}

Tensor dense_attention_masked(const Tensor& q, const Tensor& k, const Tensor& v,
                              const AttentionSpec& spec, const BlockMask& mask, int threads) {
  check_qkv(q, k, v, spec);
  const std::size_t s = q.dim(1);
  const std::size_t n = mask.block_size();
  if (s % n != 0) {
    throw DimensionError("sequence length " + std::to_string(s) + " not divisible by block size " +
                         std::to_string(n));
  }
  if (mask.query_blocks() != s / n || mask.key_blocks() != s / n) {
    throw DimensionError("mask grid does not match sequence length");
  }
  if (mask.heads() != 1 && mask.heads() != spec.num_heads) {
    throw DimensionError("mask head count must be 1 or num_heads");
  }
  mask.require_rows_nonempty();
  return run_heads(q, k, v, spec, &mask, threads);
}

}  // namespace nabla
