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

#include <algorithm>
#include <cmath>
#include <string>

#include "nabla/batch_scheduler.hpp"
#include "nabla/errors.hpp"
#include "nabla/rng.hpp"

namespace nabla::batching {

std::string_view to_string(Modality m) { return m == Modality::kImage ? "image" : "video"; }

std::string_view to_string(Resolution r) {
  switch (r) {
    case Resolution::kLow: return "low";
    case Resolution::kMedium: return "medium";
    case Resolution::kHigh: return "high";
  }
  return "low";
}

std::string_view to_string(BatchKind k) { return k == BatchKind::kImageOnly ? "image-only" : "video"; }

Modality parse_modality(std::string_view s) {
  if (s == "image") return Modality::kImage;
  if (s == "video") return Modality::kVideo;
  throw FormatError("unknown modality '" + std::string(s) + "'");
}

Resolution parse_resolution(std::string_view s) {
  if (s == "low") return Resolution::kLow;
  if (s == "medium") return Resolution::kMedium;
  if (s == "high") return Resolution::kHigh;
  throw FormatError("unknown resolution class '" + std::string(s) + "'");
}

void LatentItem::validate() const {
  if (temporal_length == 0) throw ParameterError("item '" + id + "' has zero temporal length");
  if (modality == Modality::kImage && temporal_length != 1) {
    throw ParameterError("image item '" + id + "' must have temporal length 1");
  }
}

LatentItem LatentQueue::pop() {
  LatentItem item = std::move(items_.front());
  items_.pop_front();
  total_t_ -= item.temporal_length;
  return item;
}

bool LatentQueue::ready(std::size_t t_max) const {
  std::size_t sum = 0;
  for (const auto& item : items_) {
    if (sum + item.temporal_length > t_max) return true;
    sum += item.temporal_length;
    if (sum == t_max) return true;
  }
  return false;
}

Batch next_batch(LatentQueue& queue, std::size_t t_max) {
  if (queue.empty()) throw ContractViolation("next_batch on an empty queue");
  const LatentItem& head = queue.front();
  if (head.temporal_length > t_max) {
    throw OversizeItemError("item '" + head.id + "' has temporal length " +
                            std::to_string(head.temporal_length) + " > t_max " +
                            std::to_string(t_max));
  }
  Batch batch;
  batch.aspect = head.aspect;
  batch.kind = head.modality == Modality::kImage ? BatchKind::kImageOnly : BatchKind::kVideo;
  while (!queue.empty() && batch.total_t + queue.front().temporal_length <= t_max) {
    LatentItem item = queue.pop();
    batch.total_t += item.temporal_length;
    batch.ids.push_back(std::move(item.id));
  }
  return batch;
}

AspectQueues::AspectQueues(std::vector<std::string> classes)
    : classes_(std::move(classes)), queues_(classes_.size()) {
  for (std::size_t i = 0; i < classes_.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (classes_[i] == classes_[j]) throw ParameterError("duplicate aspect class " + classes_[i]);
    }
  }
}

std::size_t AspectQueues::index_of(std::string_view aspect) const {
  for (std::size_t i = 0; i < classes_.size(); ++i)
    if (classes_[i] == aspect) return i;
  throw RoutingError("no queue for aspect class '" + std::string(aspect) + "'");
}

void AspectQueues::enqueue(LatentItem item) {
  queues_[index_of(item.aspect)].push(std::move(item));
}

LatentQueue& AspectQueues::queue(std::string_view aspect) { return queues_[index_of(aspect)]; }
const LatentQueue& AspectQueues::queue(std::string_view aspect) const {
  return queues_[index_of(aspect)];
}

std::size_t AspectQueues::total_items() const {
  std::size_t n = 0;
  for (const auto& q : queues_) n += q.size();
  return n;
}

void SchedulerConfig::validate() const {
  if (t_max == 0) throw ParameterError("t_max must be positive");
  if (!(image_fraction >= 0.0 && image_fraction <= 1.0)) {
    throw ParameterError("image fraction must lie in [0, 1]");
  }
  if (aspects.empty()) throw ParameterError("at least one aspect class is required");
  if (policy == QueuePolicy::kWeighted) {
    for (const auto& [aspect, w] : weights) {
      if (!(w >= 0.0) || !std::isfinite(w)) throw ParameterError("queue weights must be >= 0");
      if (std::find(aspects.begin(), aspects.end(), aspect) == aspects.end()) {
        throw ParameterError("weight given for unconfigured aspect '" + aspect + "'");
      }
    }
  }
}

namespace {

std::vector<QueueStats> make_stats(const std::vector<std::string>& aspects, BatchKind kind) {
  std::vector<QueueStats> stats;
  for (const auto& a : aspects) stats.push_back(QueueStats{a, kind, 0, 0, 0});
  return stats;
}

}  // namespace

BatchScheduler::BatchScheduler(SchedulerConfig config)
    : config_(std::move(config)),
      images_{AspectQueues(config_.aspects), 0, std::vector<double>(config_.aspects.size(), 0.0),
              make_stats(config_.aspects, BatchKind::kImageOnly), 0},
      videos_{AspectQueues(config_.aspects), 0, std::vector<double>(config_.aspects.size(), 0.0),
              make_stats(config_.aspects, BatchKind::kVideo), 0} {
  config_.validate();
  Rng rng(config_.seed);
  phase_ = rng.uniform();
}

BatchKind BatchScheduler::pending_kind() const {
  const double f = config_.image_fraction;
  const double n = static_cast<double>(sequence_);
  const bool image = std::floor((n + 1.0) * f + phase_) - std::floor(n * f + phase_) >= 1.0;
  return image ? BatchKind::kImageOnly : BatchKind::kVideo;
}

BatchScheduler::KindState& BatchScheduler::state(BatchKind kind) {
  return kind == BatchKind::kImageOnly ? images_ : videos_;
}

void BatchScheduler::push(LatentItem item) {
  item.validate();
  if (item.temporal_length > config_.t_max) {
    throw OversizeItemError("item '" + item.id + "' has temporal length " +
                            std::to_string(item.temporal_length) + " > t_max " +
                            std::to_string(config_.t_max));
  }
  const bool image = item.modality == Modality::kImage;
  if (image && config_.image_fraction == 0.0) {
    throw RoutingError("image item '" + item.id + "' but the image fraction is 0");
  }
  if (!image && config_.image_fraction == 1.0) {
    throw RoutingError("video item '" + item.id + "' but the image fraction is 1");
  }
  KindState& s = state(image ? BatchKind::kImageOnly : BatchKind::kVideo);
  s.queues.enqueue(std::move(item));
  ++s.pushed;
  if (++waiting_ > config_.patience) {
    throw StarvationError("no " + std::string(to_string(pending_kind())) + " batch could be formed in " +
                          std::to_string(config_.patience) + " items");
  }
}

std::optional<std::size_t> BatchScheduler::select_queue(KindState& s, bool require_ready) {
  const std::size_t n = config_.aspects.size();
  auto eligible = [&](std::size_t i) {
    const LatentQueue& q = s.queues.at(i);
    return require_ready ? q.ready(config_.t_max) : !q.empty();
  };
  if (config_.policy == QueuePolicy::kWeighted) {
    // Smooth weighted round-robin over eligible queues with positive weight.
    double total = 0.0;
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < n; ++i) {
      const auto it = config_.weights.find(config_.aspects[i]);
      const double w = it == config_.weights.end() ? 0.0 : it->second;
      if (w <= 0.0 || !eligible(i)) continue;
      s.current[i] += w;
      total += w;
      if (!best || s.current[i] > s.current[*best]) best = i;
    }
    if (best) {
      s.current[*best] -= total;
      return best;
    }
    // Only zero-weight queues hold items: fall through to round-robin.
  }
  for (std::size_t off = 0; off < n; ++off) {
    const std::size_t i = (s.cursor + off) % n;
    if (eligible(i)) {
      s.cursor = (i + 1) % n;
      return i;
    }
  }
  return std::nullopt;
}

Batch BatchScheduler::emit(KindState& s, std::size_t queue_index, BatchKind kind) {
  Batch b = next_batch(s.queues.at(queue_index), config_.t_max);
  b.kind = kind;
  QueueStats& st = s.stats[queue_index];
  ++st.batches;
  st.items += b.ids.size();
  st.total_t += b.total_t;
  ++emitted_;
  return b;
}

std::optional<Batch> BatchScheduler::poll() {
  const BatchKind kind = pending_kind();
  KindState& s = state(kind);
  const auto idx = select_queue(s, /*require_ready=*/true);
  if (!idx) return std::nullopt;
  Batch b = emit(s, *idx, kind);
  ++sequence_;
  waiting_ = 0;
  return b;
}

std::vector<Batch> BatchScheduler::finish() {
  std::vector<Batch> out;
  while (images_.queues.total_items() + videos_.queues.total_items() > 0) {
    const BatchKind kind = pending_kind();
    KindState& s = state(kind);
    if (s.queues.total_items() == 0) {
      if (s.pushed == 0) {
        throw StarvationError("image fraction " + std::to_string(config_.image_fraction) +
                              " requires " + std::string(to_string(kind)) +
                              " batches but the stream supplied none");
      }
      // Tail: this kind is exhausted, drain the other without advancing the
      // kind sequence.
      const BatchKind other = kind == BatchKind::kImageOnly ? BatchKind::kVideo : BatchKind::kImageOnly;
      KindState& o = state(other);
      auto idx = select_queue(o, true);
      if (!idx) idx = select_queue(o, false);
      out.push_back(emit(o, *idx, other));
      continue;
    }
    auto idx = select_queue(s, true);
    if (!idx) idx = select_queue(s, false);
    out.push_back(emit(s, *idx, kind));
    ++sequence_;
  }
  waiting_ = 0;
  return out;
}

std::vector<QueueStats> BatchScheduler::stats() const {
  std::vector<QueueStats> all = videos_.stats;
  all.insert(all.end(), images_.stats.begin(), images_.stats.end());
  return all;
}

std::size_t BatchPlan::image_batches() const {
  return static_cast<std::size_t>(std::count_if(batches.begin(), batches.end(), [](const Batch& b) {
    return b.kind == BatchKind::kImageOnly;
  }));
}

double BatchPlan::image_fraction() const {
  return batches.empty() ? 0.0
                         : static_cast<double>(image_batches()) / static_cast<double>(batches.size());
}

BatchPlan schedule(std::span<const LatentItem> items, const SchedulerConfig& config) {
  BatchScheduler scheduler(config);
  BatchPlan plan;
  plan.t_max = config.t_max;
  for (const auto& item : items) {
    scheduler.push(item);
    while (auto b = scheduler.poll()) plan.batches.push_back(std::move(*b));
  }
  for (auto& b : scheduler.finish()) plan.batches.push_back(std::move(b));
  plan.queue_stats = scheduler.stats();
  return plan;
}

std::vector<LatentItem> synthetic_stream(std::size_t count, double image_share,
                                         const std::vector<std::string>& aspects,
                                         std::size_t t_max, std::uint64_t seed) {
  if (aspects.empty()) throw ParameterError("synthetic stream needs aspect classes");
  if (t_max == 0) throw ParameterError("t_max must be positive");
  Rng rng(seed);
  std::vector<LatentItem> items;
  items.reserve(count);
  const std::size_t near_max = std::max<std::size_t>(1, t_max - t_max / 8);
  for (std::size_t i = 0; i < count; ++i) {
    LatentItem item;
    char id[32];
    std::snprintf(id, sizeof(id), "item-%07zu", i);
    item.id = id;
    item.aspect = aspects[rng.below(aspects.size())];
    item.resolution = static_cast<Resolution>(rng.below(3));
    if (rng.uniform() < image_share) {
      item.modality = Modality::kImage;
      item.temporal_length = 1;
    } else {
      item.modality = Modality::kVideo;
      // Most clips sit close to the maximum length, the rest spread below.
      item.temporal_length = rng.uniform() < 0.7 ? near_max + rng.below(t_max - near_max + 1)
                                                 : 1 + rng.below(t_max);
    }
    items.push_back(std::move(item));
  }
  return items;
}

double balanced_image_share(double image_fraction, std::size_t t_max) {
  if (!(image_fraction >= 0.0 && image_fraction <= 1.0)) {
    throw ParameterError("image fraction must lie in [0, 1]");
  }
  // Greedy packing of the synthetic length distribution averages about 1.05
  // clips per video batch; an image batch holds t_max single-frame latents.
  constexpr double kVideoItemsPerBatch = 1.05;
  const double images = image_fraction * static_cast<double>(t_max);
  const double videos = (1.0 - image_fraction) * kVideoItemsPerBatch;
  return images / (images + videos);
}

namespace {

const std::vector<TaskMix> kTaskMixes = {
    {"video-lite", 0.01, 0.79, 0.20},
    {"video-pro", 0.02, 0.77, 0.21},
};

const std::vector<ResolutionMix> kResolutionMixes = {
    {"image-lite-lr",
     {{"256x256", 0.224}, {"192x320", 0.11}, {"320x192", 0.332}, {"160x352", 0.005},
      {"352x160", 0.012}, {"224x288", 0.144}, {"288x224", 0.173}}},
    {"image-lite-mr", {{"512x512", 0.3152}, {"640x384", 0.5301}, {"384x640", 0.1547}}},
    {"hr",
     {{"1024x1024", 0.183}, {"1408x640", 0.017}, {"640x1408", 0.010}, {"1280x768", 0.315},
      {"768x1280", 0.115}, {"1152x896", 0.175}, {"896x1152", 0.185}}},
    {"video-lr", {{"256x256", 0.25}, {"256x384", 0.22}, {"384x256", 0.53}}},
    {"video-mr", {{"512x512", 0.28}, {"512x768", 0.25}, {"768x512", 0.47}}},
};

}  // namespace

std::span<const TaskMix> task_mixes() { return kTaskMixes; }

const TaskMix& find_task_mix(std::string_view name) {
  for (const auto& m : kTaskMixes)
    if (m.name == name) return m;
  throw ParameterError("unknown task mix '" + std::string(name) + "'");
}

std::span<const ResolutionMix> resolution_mixes() { return kResolutionMixes; }

const ResolutionMix& find_resolution_mix(std::string_view name) {
  for (const auto& m : kResolutionMixes)
    if (m.name == name) return m;
  throw ParameterError("unknown resolution mix '" + std::string(name) + "'");
}

}  // namespace nabla::batching
