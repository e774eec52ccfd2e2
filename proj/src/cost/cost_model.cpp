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

#include "nabla/cost_model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <tuple>

#include <json.hpp>

#include "nabla/errors.hpp"

namespace nabla::cost {

namespace {

const std::array<ModelPreset, 3> kPresets = {{
    {"image-lite", 2560, 10240, 512, 50},
    {"video-lite", 1792, 7168, 512, 32},
    {"video-pro", 4096, 16384, 1024, 60},
}};

void require_positive(double v, const char* name) {
  if (!(std::isfinite(v) && v > 0.0)) {
    throw ParameterError(std::string(name) + " must be positive and finite");
  }
}

std::string g6(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", x);
  return buf;
}

std::size_t preset_rank(const std::string& name) {
  for (std::size_t i = 0; i < kPresets.size(); ++i)
    if (kPresets[i].name == name) return i;
  return kPresets.size();
}

}  // namespace

void CostParams::validate() const {
  require_positive(hidden, "d");
  require_positive(time_dim, "d_t");
  require_positive(ff_dim, "d_f");
  require_positive(blocks, "L");
  require_positive(batch, "B");
  require_positive(volume, "S");
  require_positive(gpus, "N");
  if (gpus < 1.0) throw ParameterError("N must be at least 1");
}

std::span<const ModelPreset> model_presets() { return kPresets; }

const ModelPreset& find_preset(std::string_view name) {
  for (const auto& p : kPresets)
    if (p.name == name) return p;
  throw ParameterError("unknown model preset '" + std::string(name) + "'");
}

CostParams params_for(const ModelPreset& preset, double volume, double gpus, bool offload,
                      double batch) {
  CostParams p;
  p.hidden = preset.hidden;
  p.ff_dim = preset.ff_dim;
  p.time_dim = preset.time_dim;
  p.blocks = preset.blocks;
  p.batch = batch;
  p.volume = volume;
  p.gpus = gpus;
  p.offload = offload;
  return p;
}

double step_time(const CostParams& p) {
  p.validate();
  const double width = p.hidden / kReferenceHidden;
  const double volume = p.volume / kReferenceVolume;
  return width * volume * (9.0 + 14.0 * volume + 6.0 * width) * p.blocks * p.batch;
}

double gpu_memory(const CostParams& p) {
  p.validate();
  const double d = p.hidden;
  const double weights = 9.0 * p.time_dim * d + 8.0 * d * d + 2.0 * p.ff_dim * d;
  const double o = p.offload ? 0.0 : 1.0;
  const double sharded = p.blocks * weights / p.gpus;
  const double activations = 2.0 * p.volume * (p.blocks * d * o + 18.0 * d + 2.0 * p.ff_dim);
  return 12.0 * sharded + std::max(4.0 * sharded, activations);
}

Calibration::Calibration(double relative_at_reference, double measured) {
  require_positive(relative_at_reference, "reference cost");
  require_positive(measured, "measured reference");
  factor_ = measured / relative_at_reference;
}

Calibration Calibration::for_step_time(const CostParams& reference, double measured_seconds) {
  return Calibration(step_time(reference), measured_seconds);
}

Calibration Calibration::for_memory(const CostParams& reference, double measured_bytes) {
  return Calibration(gpu_memory(reference), measured_bytes);
}

std::vector<SweepRow> sweep(const SweepAxes& axes) {
  if (axes.presets.empty() || axes.volumes.empty() || axes.gpus.empty() || axes.offload.empty()) {
    throw ParameterError("sweep axes must be non-empty");
  }
  std::vector<SweepRow> rows;
  rows.reserve(axes.presets.size() * axes.volumes.size() * axes.gpus.size() * axes.offload.size());
  for (const auto& name : axes.presets) {
    const ModelPreset& preset = find_preset(name);
    for (double s : axes.volumes) {
      for (double n : axes.gpus) {
        for (bool off : axes.offload) {
          SweepRow row;
          row.preset = preset.name;
          row.params = params_for(preset, s, n, off, axes.batch);
          row.step_time = step_time(row.params);
          row.gpu_memory = gpu_memory(row.params);
          rows.push_back(std::move(row));
        }
      }
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    return std::make_tuple(preset_rank(a.preset), a.params.volume, a.params.gpus, a.params.offload) <
           std::make_tuple(preset_rank(b.preset), b.params.volume, b.params.gpus, b.params.offload);
  });
  return rows;
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
  out << kSweepCsvHeader << '\n';
  for (const auto& r : rows) {
    const auto& p = r.params;
    out << r.preset << ',' << g6(p.hidden) << ',' << g6(p.time_dim) << ',' << g6(p.ff_dim) << ','
        << g6(p.blocks) << ',' << g6(p.batch) << ',' << g6(p.volume) << ',' << g6(p.gpus) << ','
        << (p.offload ? 1 : 0) << ',' << g6(r.step_time) << ',' << g6(r.gpu_memory) << '\n';
  }
}

std::string sweep_to_json(std::span<const SweepRow> rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    const auto& p = r.params;
    arr.push_back({{"preset", r.preset}, {"d", p.hidden},        {"d_t", p.time_dim},
                   {"d_f", p.ff_dim},    {"L", p.blocks},        {"B", p.batch},
                   {"S", p.volume},      {"N", p.gpus},          {"offload", p.offload},
                   {"step_time", r.step_time}, {"gpu_memory", r.gpu_memory}});
  }
  return arr.dump(2);
}

}  // namespace nabla::cost
