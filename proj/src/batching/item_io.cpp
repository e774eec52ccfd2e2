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

#include <istream>
#include <ostream>
#include <string>

#include <json.hpp>

#include "nabla/batch_scheduler.hpp"
#include "nabla/errors.hpp"

namespace nabla::batching {

using nlohmann::json;

LatentItem parse_item(std::string_view json_line) {
  try {
    const json j = json::parse(json_line);
    LatentItem item;
    item.id = j.at("id").get<std::string>();
    item.modality = parse_modality(j.at("modality").get<std::string>());
    item.aspect = j.at("aspect").get<std::string>();
    item.temporal_length = j.value("t", std::size_t{1});
    item.resolution = parse_resolution(j.value("resolution", std::string("low")));
    item.validate();
    return item;
  } catch (const json::exception& e) {
    throw FormatError(std::string("bad item record: ") + e.what());
  }
}

std::vector<LatentItem> read_items_jsonl(std::istream& in) {
  std::vector<LatentItem> items;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      items.push_back(parse_item(line));
    } catch (const FormatError& e) {
      throw FormatError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return items;
}

void write_items_jsonl(std::ostream& out, std::span<const LatentItem> items) {
  for (const auto& item : items) {
    json j = {{"id", item.id},
              {"modality", to_string(item.modality)},
              {"aspect", item.aspect},
              {"t", item.temporal_length},
              {"resolution", to_string(item.resolution)}};
    out << j.dump() << '\n';
  }
}

std::string plan_to_json(const BatchPlan& plan) {
  json batches = json::array();
  for (const auto& b : plan.batches) {
    batches.push_back({{"aspect", b.aspect},
                       {"kind", to_string(b.kind)},
                       {"total_t", b.total_t},
                       {"ids", b.ids}});
  }
  return json{{"t_max", plan.t_max}, {"batches", batches}}.dump(2);
}

std::string summary_to_json(const BatchPlan& plan, double target_fraction) {
  json queues = json::array();
  for (const auto& q : plan.queue_stats) {
    const double fill = q.batches == 0 || plan.t_max == 0
                            ? 0.0
                            : static_cast<double>(q.total_t) /
                                  static_cast<double>(q.batches * plan.t_max);
    queues.push_back({{"aspect", q.aspect},
                      {"kind", to_string(q.kind)},
                      {"batches", q.batches},
                      {"items", q.items},
                      {"mean_fill", fill}});
  }
  std::size_t items = 0;
  for (const auto& b : plan.batches) items += b.ids.size();
  return json{{"t_max", plan.t_max},
              {"batches", plan.batches.size()},
              {"items", items},
              {"image_batches", plan.image_batches()},
              {"image_fraction", plan.image_fraction()},
              {"target_image_fraction", target_fraction},
              {"queues", queues}}
      .dump(2);
}

std::string tar_plan_to_json(const TarPackPlan& plan) {
  json archives = json::array();
  for (const auto& a : plan.archives) {
    archives.push_back({{"resolution", to_string(a.resolution)},
                        {"modality", to_string(a.modality)},
                        {"capacity", tar_capacity(a.resolution, a.modality)},
                        {"ids", a.ids}});
  }
  return json{{"archives", archives}}.dump(2);
}

}  // namespace nabla::batching
