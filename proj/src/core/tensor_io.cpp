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

#include "nabla/tensor_io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "nabla/errors.hpp"

namespace nabla {

namespace le {

void put_u64(std::ostream& out, std::uint64_t v) {
  std::array<char, 8> bytes;
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(bytes.data(), bytes.size());
}

std::uint64_t get_u64(std::istream& in) {
  std::array<unsigned char, 8> bytes;
  if (!in.read(reinterpret_cast<char*>(bytes.data()), bytes.size())) {
    throw FormatError("unexpected end of stream reading u64");
  }
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return v;
}

void put_f32(std::ostream& out, float v) {
  const auto bits = std::bit_cast<std::uint32_t>(v);
  std::array<char, 4> bytes;
  for (int i = 0; i < 4; ++i) bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xFF);
  out.write(bytes.data(), bytes.size());
}

float get_f32(std::istream& in) {
  std::array<unsigned char, 4> bytes;
  if (!in.read(reinterpret_cast<char*>(bytes.data()), bytes.size())) {
    throw FormatError("unexpected end of stream reading f32");
  }
  std::uint32_t bits = 0;
  for (int i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(bytes[i]) << (8 * i);
  return std::bit_cast<float>(bits);
}

}  // namespace le

void write_tensor(std::ostream& out, const Tensor& t) {
  le::put_u64(out, t.rank());
  for (auto e : t.shape()) le::put_u64(out, e);
  for (float x : t.data()) le::put_f32(out, x);
  if (!out) throw IoError("failed writing tensor");
}

Tensor read_tensor(std::istream& in) {
  const std::uint64_t rank = le::get_u64(in);
  if (rank == 0 || rank > 16) throw FormatError("implausible tensor rank " + std::to_string(rank));
  Tensor::Shape shape(rank);
  for (auto& e : shape) e = le::get_u64(in);
  const std::size_t n = shape_product(shape);
  std::vector<float> data(n);
  for (auto& x : data) x = le::get_f32(in);
  return Tensor(std::move(shape), std::move(data));
}

void save_tensor(const std::filesystem::path& path, const Tensor& t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_tensor(out, t);
}

Tensor load_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_tensor(in);
}

void write_tensor_csv(std::ostream& out, const Tensor& t) {
  if (t.rank() > 2) throw DimensionError("CSV supports tensors of rank <= 2");
  const std::size_t cols = t.shape().back();
  const std::size_t rows = t.size() / cols;
  char buf[32];
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (c) out << ',';
      std::snprintf(buf, sizeof(buf), "%.9g", t.data()[r * cols + c]);
      out << buf;
    }
    out << '\n';
  }
}

Tensor read_tensor_csv(std::istream& in) {
  std::vector<float> data;
  std::size_t cols = 0, rows = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::size_t count = 0;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    while (p <= end) {
      const char* comma = static_cast<const char*>(std::memchr(p, ',', end - p));
      const char* field_end = comma ? comma : end;
      while (p < field_end && *p == ' ') ++p;
      float v = 0.0f;
      auto [ptr, ec] = std::from_chars(p, field_end, v);
      if (ec != std::errc() || ptr != field_end) {
        throw FormatError("bad CSV number in row " + std::to_string(rows + 1));
      }
      data.push_back(v);
      ++count;
      if (!comma) break;
      p = comma + 1;
    }
    if (rows == 0) cols = count;
    if (count != cols) throw FormatError("ragged CSV row " + std::to_string(rows + 1));
    ++rows;
  }
  if (rows == 0) throw FormatError("empty CSV");
  return Tensor({rows, cols}, std::move(data));
}

}  // namespace nabla
