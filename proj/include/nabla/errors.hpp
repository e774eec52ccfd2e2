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

#include <stdexcept>
#include <string>

namespace nabla {

// Base of every error the library raises. kind() is a stable, machine-parsable
// name that the CLI reports on stderr.
class Error : public std::runtime_error {
 public:
  Error(const char* kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  const char* kind() const noexcept { return kind_; }

 private:
  const char* kind_;
};

#define NABLA_DEFINE_ERROR(Name)                                   \
  class Name : public Error {                                      \
   public:                                                         \
    explicit Name(const std::string& what) : Error(#Name, what) {} \
  }

// Shapes or extents that do not line up.
NABLA_DEFINE_ERROR(DimensionError);
// An input violates a documented precondition (e.g. a fully masked row).
NABLA_DEFINE_ERROR(ContractViolation);
// A VideoLayout or block-grid geometry is inconsistent.
NABLA_DEFINE_ERROR(LayoutError);
// A scalar parameter is out of range.
NABLA_DEFINE_ERROR(ParameterError);
// A latent names an aspect class no queue was configured for.
NABLA_DEFINE_ERROR(RoutingError);
// A single latent is longer than the batch budget.
NABLA_DEFINE_ERROR(OversizeItemError);
// The requested image fraction cannot be met by the supplied stream.
NABLA_DEFINE_ERROR(StarvationError);
// Parameter sets being merged disagree on names or shapes.
NABLA_DEFINE_ERROR(AlignmentError);
// Malformed file or stream contents.
NABLA_DEFINE_ERROR(FormatError);
NABLA_DEFINE_ERROR(IoError);

#undef NABLA_DEFINE_ERROR

}  // namespace nabla
