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

#include "nabla/soup.hpp"

#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "nabla/errors.hpp"
#include "nabla/tensor_io.hpp"

namespace nabla::soup {

namespace {

constexpr double kWeightSumTolerance = 1e-9;

void require_aligned(const ParamSet& ref, const ParamSet& other) {
  if (ref.params.size() != other.params.size()) {
    throw AlignmentError("parameter sets differ in parameter count (" +
                         std::to_string(ref.params.size()) + " vs " +
                         std::to_string(other.params.size()) + ")");
  }
  for (const auto& [name, tensor] : ref.params) {
    const auto it = other.params.find(name);
    if (it == other.params.end()) throw AlignmentError("parameter '" + name + "' missing");
    if (it->second.shape() != tensor.shape()) {
      throw AlignmentError("parameter '" + name + "' shape " + shape_string(tensor.shape()) +
                           " vs " + shape_string(it->second.shape()));
    }
  }
}

}  // namespace

Scheme parse_scheme(std::string_view name) {
  if (name == "equal") return Scheme::kEqual;
  if (name == "proportional") return Scheme::kProportional;
  if (name == "sqrt") return Scheme::kSqrt;
  throw ParameterError("unknown soup scheme '" + std::string(name) + "'");
}

std::string_view to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::kEqual: return "equal";
    case Scheme::kProportional: return "proportional";
    case Scheme::kSqrt: return "sqrt";
  }
  return "equal";
}

std::vector<double> soup_weights(std::span<const std::uint64_t> sizes, Scheme scheme) {
  if (sizes.empty()) throw ParameterError("soup_weights: no dataset sizes");
  std::vector<double> w(sizes.size());
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (sizes[i] == 0) throw ParameterError("soup_weights: dataset size must be positive");
    const double size = static_cast<double>(sizes[i]);
    switch (scheme) {
      case Scheme::kEqual: w[i] = 1.0; break;
      case Scheme::kProportional: w[i] = size; break;
      case Scheme::kSqrt: w[i] = std::sqrt(size); break;
    }
  }
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (auto& x : w) x /= total;
  return w;
}

std::vector<double> soup_weights(std::span<const ParamSet> sets, Scheme scheme) {
  std::vector<std::uint64_t> sizes;
  sizes.reserve(sets.size());
  for (const auto& s : sets) sizes.push_back(s.dataset_size);
  return soup_weights(sizes, scheme);
}

ParamSet merge(std::span<const ParamSet> sets, std::span<const double> weights) {
  if (sets.empty()) throw ParameterError("merge: no parameter sets");
  if (sets.size() != weights.size()) throw ParameterError("merge: one weight per set required");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ParameterError("merge: weights must be >= 0");
    total += w;
  }
  if (std::fabs(total - 1.0) > kWeightSumTolerance) {
    throw ParameterError("merge: weights sum to " + std::to_string(total) + ", expected 1");
  }
  for (std::size_t i = 1; i < sets.size(); ++i) require_aligned(sets[0], sets[i]);

  ParamSet out;
  out.subdomain = sets[0].subdomain;
  for (std::size_t i = 1; i < sets.size(); ++i) out.subdomain += "+" + sets[i].subdomain;
  for (const auto& s : sets) out.dataset_size += s.dataset_size;

  std::vector<double> acc;
  for (const auto& [name, first] : sets[0].params) {
    acc.assign(first.size(), 0.0);
    for (std::size_t i = 0; i < sets.size(); ++i) {
      const auto src = sets[i].params.at(name).data();
      for (std::size_t e = 0; e < acc.size(); ++e) acc[e] += weights[i] * src[e];
    }
    Tensor merged(first.shape());
    auto dst = merged.data();
    for (std::size_t e = 0; e < acc.size(); ++e) dst[e] = static_cast<float>(acc[e]);
    out.params.emplace(name, std::move(merged));
  }
  return out;
}

void ema_update(ParamSet& state, const ParamSet& update, double decay) {
  if (!(decay >= 0.0 && decay <= 1.0)) throw ParameterError("EMA decay must lie in [0, 1]");
  require_aligned(state, update);
  for (auto& [name, tensor] : state.params) {
    const auto src = update.params.at(name).data();
    auto dst = tensor.data();
    for (std::size_t e = 0; e < dst.size(); ++e) {
      dst[e] = static_cast<float>(decay * dst[e] + (1.0 - decay) * src[e]);
    }
  }
}

ParamSet load_param_set(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw IoError("cannot open manifest " + manifest.string());
  ParamSet set;
  try {
    const auto j = nlohmann::json::parse(in);
    set.subdomain = j.value("subdomain", manifest.stem().string());
    set.dataset_size = j.at("dataset_size").get<std::uint64_t>();
    for (const auto& [name, file] : j.at("params").items()) {
      std::filesystem::path p = file.get<std::string>();
      if (p.is_relative()) p = manifest.parent_path() / p;
      set.params.emplace(name, load_tensor(p));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("manifest " + manifest.string() + ": " + e.what());
  }
  return set;
}

void save_param_set(const std::filesystem::path& manifest, const ParamSet& set) {
  const auto dir = manifest.parent_path();
  if (!dir.empty()) std::filesystem::create_directories(dir);
  nlohmann::json params = nlohmann::json::object();
  for (const auto& [name, tensor] : set.params) {
    std::string file = manifest.stem().string() + "." + name + ".bin";
    for (auto& ch : file)
      if (ch == '/' || ch == '\\') ch = '_';
    save_tensor(dir / file, tensor);
    params[name] = file;
  }
  std::ofstream out(manifest);
  if (!out) throw IoError("cannot write manifest " + manifest.string());
  out << nlohmann::json{{"subdomain", set.subdomain},
                        {"dataset_size", set.dataset_size},
                        {"params", params}}
             .dump(2)
      << '\n';
}

}  // namespace nabla::soup
