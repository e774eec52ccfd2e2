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
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace nabla::cost {

// Reference constants of the step-time model: hidden size of the 2B model and
// the reference video volume 256 * 384 * 31.
inline constexpr double kReferenceHidden = 1792.0;
inline constexpr double kReferenceVolume = 256.0 * 384.0 * 31.0;

struct CostParams {
  double hidden = kReferenceHidden;  // d
  double time_dim = 512;             // d_t
  double ff_dim = 7168;              // d_f
  double blocks = 1;                 // L
  double batch = 1;                  // B
  double volume = kReferenceVolume;  // S
  double gpus = 1;                   // N
  bool offload = false;              // activations offloaded => o = 0

  // Throws ParameterError on any non-positive (or non-finite) field.
  void validate() const;
};

// CrossDiT presets (blocks, linear-layer width, model width, time width).
struct ModelPreset {
  std::string name;
  double hidden;
  double ff_dim;
  double time_dim;
  double blocks;
};

std::span<const ModelPreset> model_presets();
const ModelPreset& find_preset(std::string_view name);

// Fills hidden, ff_dim, time_dim and blocks from a preset.
CostParams params_for(const ModelPreset& preset, double volume, double gpus, bool offload,
                      double batch = 1);

// (d/d0) (S/S0) (9 + 14 S/S0 + 6 d/d0) L B, in relative units.
double step_time(const CostParams& p);

// 12L W/N + max(4L W/N, 2S(L d o + 18d + 2 d_f)), W = 9 d_t d + 8 d^2 + 2 d_f d.
double gpu_memory(const CostParams& p);

// Converts relative units to measured units from one reference observation.
class Calibration {
 public:
  // `measured` is the observed quantity (seconds, bytes, ...) at `reference`.
  Calibration(double relative_at_reference, double measured);
  static Calibration for_step_time(const CostParams& reference, double measured_seconds);
  static Calibration for_memory(const CostParams& reference, double measured_bytes);

  double units_per_relative() const { return factor_; }
  double apply(double relative) const { return relative * factor_; }

 private:
  double factor_;
};

struct SweepRow {
  std::string preset;
  CostParams params;
  double step_time = 0.0;
  double gpu_memory = 0.0;
};

struct SweepAxes {
  std::vector<std::string> presets;
  std::vector<double> volumes;
  std::vector<double> gpus;
  std::vector<bool> offload;
  double batch = 1;
};

// Cartesian product, sorted by (preset order in the model table, S, N,
// offload).
std::vector<SweepRow> sweep(const SweepAxes& axes);

inline constexpr const char* kSweepCsvHeader =
    "preset,d,d_t,d_f,L,B,S,N,offload,step_time,gpu_memory";

// Numbers use 6 significant digits ("%.6g").
void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);
std::string sweep_to_json(std::span<const SweepRow> rows);

}  // namespace nabla::cost
