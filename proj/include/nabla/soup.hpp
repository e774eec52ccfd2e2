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

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nabla/tensor.hpp"

namespace nabla::soup {

enum class Scheme { kEqual, kProportional, kSqrt };

Scheme parse_scheme(std::string_view name);
std::string_view to_string(Scheme scheme);

// A checkpoint as named flat tensors plus the size of the data it was tuned on.
struct ParamSet {
  std::map<std::string, Tensor> params;
  std::string subdomain;
  std::uint64_t dataset_size = 0;
};

// Positive weights summing to one: 1/n, size_i / sum, or sqrt(size_i) / sum.
std::vector<double> soup_weights(std::span<const std::uint64_t> sizes, Scheme scheme);
std::vector<double> soup_weights(std::span<const ParamSet> sets, Scheme scheme);

// Element-wise sum_i w_i * theta_i, accumulated in double. Weights must be
// non-negative and sum to 1 within 1e-9; every set must carry the same names
// and shapes.
ParamSet merge(std::span<const ParamSet> sets, std::span<const double> weights);

inline constexpr double kDefaultEmaDecay = 0.9999;

// state <- decay * state + (1 - decay) * update.
void ema_update(ParamSet& state, const ParamSet& update, double decay = kDefaultEmaDecay);

// Manifest: {"subdomain": str, "dataset_size": int, "params": {name: file}}.
// Tensor files use the binary tensor container; relative paths resolve
// against the manifest's directory.
ParamSet load_param_set(const std::filesystem::path& manifest);
// Writes one <manifest stem>.<name>.bin per parameter next to the manifest.
void save_param_set(const std::filesystem::path& manifest, const ParamSet& set);

}  // namespace nabla::soup
