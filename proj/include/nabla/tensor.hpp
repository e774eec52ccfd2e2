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
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace nabla {

class Rng;

// Dense row-major array of 32-bit floats. Every extent is positive and the
// flat buffer always holds exactly product(shape) elements.
class Tensor {
 public:
  using Shape = std::vector<std::size_t>;

  Tensor() = default;
  explicit Tensor(Shape shape, float fill = 0.0f);
  Tensor(Shape shape, std::vector<float> data);

  static Tensor identity(std::size_t n);
  // Builds a 2-D tensor from nested rows; all rows must have equal length.
  static Tensor from_rows(std::initializer_list<std::initializer_list<float>> rows);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<float> data() { return data_; }
  std::span<const float> data() const { return data_; }

  float& operator()(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
  float operator()(std::size_t i, std::size_t j) const { return data_[i * shape_[1] + j]; }
  float& operator()(std::size_t i, std::size_t j, std::size_t k) {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }
  float operator()(std::size_t i, std::size_t j, std::size_t k) const {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
  }

  // Contiguous sub-array addressed by the leading index: a row of a matrix,
  // or one head's [s x d] matrix of a rank-3 tensor.
  std::span<float> slice(std::size_t outer);
  std::span<const float> slice(std::size_t outer) const;

  // Copy of slice(outer) as a tensor of rank - 1.
  Tensor sub(std::size_t outer) const;

  Tensor reshaped(Shape shape) const;

  bool operator==(const Tensor& other) const = default;

 private:
  Shape shape_;
  std::vector<float> data_;
};

std::size_t shape_product(const Tensor::Shape& shape);
std::string shape_string(const Tensor::Shape& shape);

// [m x k] * [k x n] -> [m x n]. Accumulates in float in a fixed order.
Tensor matmul(const Tensor& a, const Tensor& b);

Tensor transpose(const Tensor& a);

// Softmax along the last axis with max subtraction.
Tensor softmax_rows(const Tensor& a);

// Largest absolute element difference; shapes must match.
float max_abs_diff(const Tensor& a, const Tensor& b);

bool allclose(const Tensor& a, const Tensor& b, float atol);

// Stacks equally shaped tensors along a new leading axis.
Tensor stack(std::span<const Tensor> parts);

Tensor random_normal(const Tensor::Shape& shape, Rng& rng, float stddev = 1.0f);
Tensor random_uniform(const Tensor::Shape& shape, Rng& rng, float lo, float hi);

bool all_finite(const Tensor& t);

}  // namespace nabla
