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
#include <cstdint>
#include <deque>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace nabla::batching {

enum class Modality { kImage, kVideo };
enum class Resolution { kLow, kMedium, kHigh };
enum class BatchKind { kImageOnly, kVideo };

std::string_view to_string(Modality m);
std::string_view to_string(Resolution r);
std::string_view to_string(BatchKind k);
Modality parse_modality(std::string_view s);
Resolution parse_resolution(std::string_view s);

// Metadata of one pre-encoded latent. Images are videos of length 1.
struct LatentItem {
  std::string id;
  Modality modality = Modality::kVideo;
  std::string aspect;
  std::size_t temporal_length = 1;
  Resolution resolution = Resolution::kLow;

  void validate() const;
};

struct Batch {
  std::vector<std::string> ids;
  std::string aspect;
  BatchKind kind = BatchKind::kVideo;
  std::size_t total_t = 0;
};

// FIFO of latents sharing one aspect class and modality.
class LatentQueue {
 public:
  void push(LatentItem item) {
    total_t_ += item.temporal_length;
    items_.push_back(std::move(item));
  }
  const LatentItem& front() const { return items_.front(); }
  LatentItem pop();
  bool empty() const { return items_.empty(); }
  std::size_t size() const { return items_.size(); }
  std::size_t total_t() const { return total_t_; }

  // True when a greedy batch taken now could not grow any further with later
  // arrivals: the running sum hits t_max exactly or the next item overflows.
  bool ready(std::size_t t_max) const;

 private:
  std::deque<LatentItem> items_;
  std::size_t total_t_ = 0;
};

// Pops items FIFO while the running sum of temporal lengths stays within
// t_max. Returns at least one item. Throws OversizeItemError if the head item
// alone exceeds t_max and ContractViolation on an empty queue.
Batch next_batch(LatentQueue& queue, std::size_t t_max);

// One FIFO per configured aspect class.
class AspectQueues {
 public:
  explicit AspectQueues(std::vector<std::string> classes);

  // Throws RoutingError for an unconfigured aspect class.
  void enqueue(LatentItem item);

  const std::vector<std::string>& classes() const { return classes_; }
  LatentQueue& queue(std::string_view aspect);
  const LatentQueue& queue(std::string_view aspect) const;
  LatentQueue& at(std::size_t index) { return queues_[index]; }
  const LatentQueue& at(std::size_t index) const { return queues_[index]; }
  std::size_t total_items() const;

 private:
  std::size_t index_of(std::string_view aspect) const;

  std::vector<std::string> classes_;
  std::vector<LatentQueue> queues_;
};

enum class QueuePolicy { kRoundRobin, kWeighted };

struct SchedulerConfig {
  std::size_t t_max = 121;
  double image_fraction = 0.0;
  std::uint64_t seed = 0;
  std::vector<std::string> aspects;
  QueuePolicy policy = QueuePolicy::kRoundRobin;
  // Per-aspect weights for kWeighted; missing aspects weigh 0.
  std::map<std::string, double> weights;
  // Maximum number of items pushed while the pending batch kind cannot be
  // served before the stream is declared starved.
  std::size_t patience = 100000;

  void validate() const;
};

struct QueueStats {
  std::string aspect;
  BatchKind kind = BatchKind::kVideo;
  std::size_t batches = 0;
  std::size_t items = 0;
  std::size_t total_t = 0;
};

struct BatchPlan {
  std::vector<Batch> batches;
  std::vector<QueueStats> queue_stats;
  std::size_t t_max = 0;

  std::size_t image_batches() const;
  double image_fraction() const;
};

// Streaming scheduler. The kind of the n-th batch follows the deterministic
// low-discrepancy sequence floor((n + 1) f + phase) - floor(n f + phase),
// phase drawn from the seed, so any window of W batches holds W f +/- 1 image
// batches while both kinds are available.
class BatchScheduler {
 public:
  explicit BatchScheduler(SchedulerConfig config);

  // Routes an item to its modality's aspect queue. Rejects oversize items and
  // items of a modality the configured fraction never schedules (image with
  // f = 0, video with f = 1).
  void push(LatentItem item);

  // Next batch whose kind matches the sequence, if a full one is ready.
  std::optional<Batch> poll();

  // End of stream: drains every queue, partial batches included. When one
  // kind runs out the remaining batches are of the other kind.
  std::vector<Batch> finish();

  BatchKind pending_kind() const;
  std::size_t emitted() const { return emitted_; }
  std::vector<QueueStats> stats() const;

 private:
  struct KindState {
    AspectQueues queues;
    std::size_t cursor = 0;
    std::vector<double> current;  // smooth weighted round-robin state
    std::vector<QueueStats> stats;
    std::size_t pushed = 0;
  };

  KindState& state(BatchKind kind);
  std::optional<std::size_t> select_queue(KindState& s, bool require_ready);
  Batch emit(KindState& s, std::size_t queue_index, BatchKind kind);

  SchedulerConfig config_;
  double phase_ = 0.0;
  std::size_t sequence_ = 0;  // batches scheduled along the kind sequence
  std::size_t emitted_ = 0;
  std::size_t waiting_ = 0;
  KindState images_;
  KindState videos_;
};

// Feeds the stream through a BatchScheduler, polling after every item, then
// drains it.
BatchPlan schedule(std::span<const LatentItem> items, const SchedulerConfig& config);

// Task probabilities (text-to-image, text-to-video, image-to-video) used for
// mixed training. Text-to-image steps are the image-only batches.
struct TaskMix {
  std::string name;
  double text_to_image;
  double text_to_video;
  double image_to_video;

  double image_fraction() const { return text_to_image; }
};

std::span<const TaskMix> task_mixes();
const TaskMix& find_task_mix(std::string_view name);

// Resolution-bucket sampling probabilities, usable as kWeighted queue weights
// when aspect classes are named by resolution ("256x384", ...).
struct ResolutionMix {
  std::string name;
  std::map<std::string, double> weights;
};

std::span<const ResolutionMix> resolution_mixes();
const ResolutionMix& find_resolution_mix(std::string_view name);

// Synthetic stream: `image_share` of items are images, the rest videos whose
// lengths cluster near t_max with a tail of shorter clips.
std::vector<LatentItem> synthetic_stream(std::size_t count, double image_share,
                                         const std::vector<std::string>& aspects,
                                         std::size_t t_max, std::uint64_t seed);

// Image share for synthetic_stream that supplies image and video batches in
// the ratio image_fraction : 1 - image_fraction, so neither kind runs dry.
double balanced_image_share(double image_fraction, std::size_t t_max);

// Archive capacities: images 1024/256/64, videos 16/4/1 per low/medium/high.
std::size_t tar_capacity(Resolution resolution, Modality modality);

struct TarArchive {
  Resolution resolution = Resolution::kLow;
  Modality modality = Modality::kImage;
  std::vector<std::string> ids;
};

struct TarPackPlan {
  std::vector<TarArchive> archives;
};

// Greedy fill per (resolution, modality) group in input order; only the last
// archive of a group may be partial. Groups are emitted low..high, images
// before videos.
TarPackPlan plan_tar_packing(std::span<const LatentItem> items);

// JSON-lines item stream: one object per line with keys id, modality,
// aspect, t, resolution. Blank lines are skipped.
LatentItem parse_item(std::string_view json_line);
std::vector<LatentItem> read_items_jsonl(std::istream& in);
void write_items_jsonl(std::ostream& out, std::span<const LatentItem> items);

std::string plan_to_json(const BatchPlan& plan);
std::string summary_to_json(const BatchPlan& plan, double target_fraction);
std::string tar_plan_to_json(const TarPackPlan& plan);

}  // namespace nabla::batching
