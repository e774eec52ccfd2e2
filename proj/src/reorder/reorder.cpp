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

#include "nabla/reorder.hpp"

#include <algorithm>
#include <string>

#include <json.hpp>

#include "nabla/errors.hpp"

namespace nabla {

void VideoLayout::validate() const {
  if (frames == 0 || height == 0 || width == 0 || patch == 0) {
    throw LayoutError("layout extents must be positive");
  }
  if (height % patch != 0 || width % patch != 0) {
    throw LayoutError("height " + std::to_string(height) + " and width " + std::to_string(width) +
                      " must be divisible by patch " + std::to_string(patch));
  }
}

bool ReorderPlan::is_identity() const {
  for (std::size_t i = 0; i < forward.size(); ++i)
    if (forward[i] != i) return false;
  return true;
}

ReorderPlan build_reorder_plan(const VideoLayout& layout) {
  layout.validate();
  const std::size_t P = layout.patch;
  const std::size_t per_frame = layout.tokens_per_frame();
  const std::size_t patch_cols = layout.patch_cols();
  ReorderPlan plan;
  plan.forward.resize(layout.sequence_length());
  plan.inverse.resize(layout.sequence_length());
  for (std::size_t f = 0; f < layout.frames; ++f) {
    for (std::size_t y = 0; y < layout.height; ++y) {
      for (std::size_t x = 0; x < layout.width; ++x) {
        const std::size_t original = f * per_frame + y * layout.width + x;
        const std::size_t patch_index = (y / P) * patch_cols + (x / P);
        const std::size_t within = (y % P) * P + (x % P);
        const std::size_t target = f * per_frame + patch_index * P * P + within;
        plan.forward[original] = target;
        plan.inverse[target] = original;
      }
    }
  }
  return plan;
}

namespace {

enum class Direction { kForward, kInverse };

Tensor permute_rows(const Tensor& x, const ReorderPlan& plan, Direction dir) {
  if (x.rank() != 2 && x.rank() != 3) throw DimensionError("reorder expects [s x d] or [h x s x d]");
  const std::size_t seq_axis = x.rank() - 2;
  const std::size_t s = x.dim(seq_axis);
  if (s != plan.size()) {
    throw DimensionError("sequence length " + std::to_string(s) + " does not match plan length " +
                         std::to_string(plan.size()));
  }
  const std::size_t d = x.shape().back();
  const std::size_t outer = x.rank() == 3 ? x.dim(0) : 1;
  Tensor out(x.shape());
  const float* src = x.data().data();
  float* dst = out.data().data();
  for (std::size_t o = 0; o < outer; ++o) {
    const std::size_t base = o * s * d;
    for (std::size_t i = 0; i < s; ++i) {
      const std::size_t from = dir == Direction::kForward ? i : plan.forward[i];
      const std::size_t to = dir == Direction::kForward ? plan.forward[i] : i;
      std::copy_n(src + base + from * d, d, dst + base + to * d);
    }
  }
  return out;
}

}  // namespace

Tensor apply_reorder(const Tensor& x, const ReorderPlan& plan) {
  return permute_rows(x, plan, Direction::kForward);
}

Tensor apply_inverse(const Tensor& x, const ReorderPlan& plan) {
  return permute_rows(x, plan, Direction::kInverse);
}

std::string reorder_plan_to_json(const ReorderPlan& plan) {
  return nlohmann::json(plan.forward).dump();
}

ReorderPlan reorder_plan_from_json(const std::string& text) {
  ReorderPlan plan;
  try {
    plan.forward = nlohmann::json::parse(text).get<std::vector<std::size_t>>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("reorder plan JSON: ") + e.what());
  }
  const std::size_t n = plan.forward.size();
  plan.inverse.assign(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t t = plan.forward[i];
    if (t >= n || plan.inverse[t] != n) throw FormatError("reorder plan is not a permutation");
    plan.inverse[t] = i;
  }
  return plan;
}

}  // namespace nabla
