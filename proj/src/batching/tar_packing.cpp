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

#include <array>

#include "nabla/batch_scheduler.hpp"

namespace nabla::batching {

std::size_t tar_capacity(Resolution resolution, Modality modality) {
  static constexpr std::array<std::size_t, 3> kImages = {1024, 256, 64};
  static constexpr std::array<std::size_t, 3> kVideos = {16, 4, 1};
  const auto r = static_cast<std::size_t>(resolution);
  return modality == Modality::kImage ? kImages[r] : kVideos[r];
}

TarPackPlan plan_tar_packing(std::span<const LatentItem> items) {
  TarPackPlan plan;
  for (auto res : {Resolution::kLow, Resolution::kMedium, Resolution::kHigh}) {
    for (auto mod : {Modality::kImage, Modality::kVideo}) {
      const std::size_t cap = tar_capacity(res, mod);
      TarArchive open{res, mod, {}};
      for (const auto& item : items) {
        if (item.resolution != res || item.modality != mod) continue;
        open.ids.push_back(item.id);
        if (open.ids.size() == cap) {
          plan.archives.push_back(std::move(open));
          open = TarArchive{res, mod, {}};
        }
      }
      if (!open.ids.empty()) plan.archives.push_back(std::move(open));
    }
  }
  return plan;
}

}  // namespace nabla::batching
