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
#include <iosfwd>

#include "nabla/tensor.hpp"

namespace nabla {

// Binary container:
//   u64 rank, u64 extent[rank], f32 data[product(extents)]
// All fields little-endian, independent of host byte order.
void write_tensor(std::ostream& out, const Tensor& t);
Tensor read_tensor(std::istream& in);

void save_tensor(const std::filesystem::path& path, const Tensor& t);
Tensor load_tensor(const std::filesystem::path& path);

// CSV for rank 1 (one line) and rank 2 (one line per row). Values are printed
// with 9 significant digits so float round trips are exact.
void write_tensor_csv(std::ostream& out, const Tensor& t);
// Always yields a rank-2 tensor.
Tensor read_tensor_csv(std::istream& in);

namespace le {
void put_u64(std::ostream& out, std::uint64_t v);
std::uint64_t get_u64(std::istream& in);
void put_f32(std::ostream& out, float v);
float get_f32(std::istream& in);
}  // namespace le

}  // namespace nabla
