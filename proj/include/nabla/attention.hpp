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

#include "nabla/block_mask.hpp"
#include "nabla/tensor.hpp"

namespace nabla {

struct AttentionSpec {
  std::size_t num_heads = 1;
  std::size_t head_dim = 1;
  // Non-positive means "use 1/sqrt(head_dim)".
  float scale = 0.0f;

  float effective_scale() const;
  void validate() const;

  static AttentionSpec for_head_dim(std::size_t heads, std::size_t head_dim);
};

// Checks q, k, v are [h x s x d] with h and d matching the spec.
void check_qkv(const Tensor& q, const Tensor& k, const Tensor& v, const AttentionSpec& spec);

// Per head: softmax_rows(scale * Q K^T) V.
Tensor dense_attention(const Tensor& q, const Tensor& k, const Tensor& v,
                       const AttentionSpec& spec, int threads = 1);

// Same as dense_attention, but logits of keys in blocks the mask disallows are
// set to -inf before the softmax, so each row renormalizes over allowed keys.
// The mask may have one head (broadcast) or spec.num_heads heads.
Tensor dense_attention_masked(const Tensor& q, const Tensor& k, const Tensor& v,
                              const AttentionSpec& spec, const BlockMask& mask,
                              int threads = 1);

}  // namespace nabla
