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
#include <string>
#include <vector>

#include "nabla/tensor.hpp"

namespace nabla {

// 3-D latent token grid. All extents are in latent-token units; patch is the
// side of the square spatial patch made contiguous by reordering.
struct VideoLayout {
  std::size_t frames = 1;
  std::size_t height = 1;
  std::size_t width = 1;
  std::size_t patch = 1;

  // Throws LayoutError unless every extent is positive and P divides H and W.
  void validate() const;

  std::size_t sequence_length() const { return frames * height * width; }
  std::size_t tokens_per_frame() const { return height * width; }
  std::size_t patch_tokens() const { return patch * patch; }
  std::size_t patch_rows() const { return height / patch; }
  std::size_t patch_cols() const { return width / patch; }

  bool operator==(const VideoLayout&) const = default;
};

// forward[i] is the new position of original token i; inverse undoes it.
struct ReorderPlan {
  std::vector<std::size_t> forward;
  std::vector<std::size_t> inverse;

  std::size_t size() const { return forward.size(); }
  bool is_identity() const;
};

// Within each frame, P x P patches are enumerated in row-major patch order and
// the tokens of a patch in row-major order, so each patch occupies P*P
// consecutive positions. Frames keep their original order.
ReorderPlan build_reorder_plan(const VideoLayout& layout);

// Output row forward[i] = input row i. Accepts [s x d] or [h x s x d]
// (the permutation acts on the sequence axis).
Tensor apply_reorder(const Tensor& x, const ReorderPlan& plan);
// Output row i = input row forward[i].
Tensor apply_inverse(const Tensor& x, const ReorderPlan& plan);

// JSON array of forward indices.
std::string reorder_plan_to_json(const ReorderPlan& plan);
ReorderPlan reorder_plan_from_json(const std::string& text);

}  // namespace nabla
