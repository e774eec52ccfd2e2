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
#include <map>
#include <set>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "nabla/batch_scheduler.hpp"
#include "nabla/errors.hpp"

namespace nabla::batching {
namespace {

LatentItem video(std::string id, std::size_t t, std::string aspect = "1:1") {
  return {std::move(id), Modality::kVideo, std::move(aspect), t, Resolution::kLow};
}

LatentItem image(std::string id, std::string aspect = "1:1") {
  return {std::move(id), Modality::kImage, std::move(aspect), 1, Resolution::kLow};
}

TEST(NextBatch, GreedyFillStopsBeforeOverflow) {
  LatentQueue q;
  q.push(video("a", 31));
  q.push(video("b", 31));
  q.push(video("c", 61));
  const Batch first = next_batch(q, 121);
  EXPECT_EQ(first.ids, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(first.total_t, 62u);
  const Batch second = next_batch(q, 121);
  EXPECT_EQ(second.ids, (std::vector<std::string>{"c"}));
  EXPECT_TRUE(q.empty());
}

TEST(NextBatch, ExactFitAndImages) {
  LatentQueue q;
  q.push(video("a", 121));
  EXPECT_EQ(next_batch(q, 121).ids.size(), 1u);
  for (int i = 0; i < 130; ++i) q.push(image("i" + std::to_string(i)));
  EXPECT_EQ(next_batch(q, 64).ids.size(), 64u);
  EXPECT_EQ(q.size(), 66u);
}

TEST(NextBatch, ErrorsOnEmptyOrOversize) {
  LatentQueue q;
  EXPECT_THROW(next_batch(q, 121), ContractViolation);
  q.push(video("big", 200));
  EXPECT_THROW(next_batch(q, 121), OversizeItemError);
}

TEST(LatentQueue, ReadyWhenNoLaterItemCouldJoin) {
  LatentQueue q;
  q.push(video("a", 60));
  EXPECT_FALSE(q.ready(121));
  q.push(video("b", 61));
  EXPECT_TRUE(q.ready(121));
  LatentQueue r;
  r.push(video("a", 100));
  r.push(video("b", 30));
  EXPECT_TRUE(r.ready(121));
}

TEST(AspectQueues, RoutesByClassFifo) {
  AspectQueues qs({"1:1", "16:9", "9:16"});
  qs.enqueue(video("a", 3, "16:9"));
  qs.enqueue(video("b", 4, "16:9"));
  qs.enqueue(video("c", 5, "1:1"));
  qs.enqueue(video("d", 5, "9:16"));
  EXPECT_EQ(qs.queue("16:9").size(), 2u);
  EXPECT_EQ(qs.queue("16:9").front().id, "a");
  EXPECT_EQ(qs.queue("1:1").size(), 1u);
  EXPECT_EQ(qs.queue("9:16").size(), 1u);
  EXPECT_THROW(qs.enqueue(video("e", 5, "4:3")), RoutingError);
  EXPECT_THROW(AspectQueues({"1:1", "1:1"}), ParameterError);
}

TEST(Schedule, ZeroFractionHasNoImageBatches) {
  SchedulerConfig cfg;
  cfg.aspects = {"1:1", "16:9"};
  const auto items = synthetic_stream(2000, 0.0, cfg.aspects, cfg.t_max, 1);
  const BatchPlan plan = schedule(items, cfg);
  EXPECT_EQ(plan.image_batches(), 0u);
  EXPECT_FALSE(plan.batches.empty());
  std::vector<LatentItem> with_image = items;
  with_image.push_back(image("img"));
  EXPECT_THROW(schedule(with_image, cfg), RoutingError);
}

TEST(Schedule, HalfFractionAlternatesWithinOne) {
  SchedulerConfig cfg;
  cfg.aspects = {"1:1"};
  cfg.image_fraction = 0.5;
  cfg.seed = 3;
  std::vector<LatentItem> items;
  for (int i = 0; i < 300; ++i) {
    items.push_back(video("v" + std::to_string(i), 121));
    for (int j = 0; j < 121; ++j) items.push_back(image("i" + std::to_string(i * 121 + j)));
  }
  const BatchPlan plan = schedule(items, cfg);
  ASSERT_EQ(plan.batches.size(), 600u);
  for (std::size_t start = 0; start + 100 <= plan.batches.size(); ++start) {
    std::size_t images = 0;
    for (std::size_t i = start; i < start + 100; ++i) {
      images += plan.batches[i].kind == BatchKind::kImageOnly;
    }
    EXPECT_NEAR(double(images), 50.0, 1.0) << "window at " << start;
  }
}

TEST(Schedule, InvariantsOnRandomStream) {
  SchedulerConfig cfg;
  cfg.aspects = {"1:1", "16:9", "9:16", "4:3"};
  cfg.image_fraction = 0.2;
  cfg.seed = 11;
  const auto items = synthetic_stream(20000, balanced_image_share(0.2, cfg.t_max), cfg.aspects,
                                      cfg.t_max, 5);
  std::map<std::string, LatentItem> by_id;
  for (const auto& it : items) by_id[it.id] = it;
  const BatchPlan plan = schedule(items, cfg);
  std::multiset<std::string> seen;
  for (const auto& b : plan.batches) {
    ASSERT_FALSE(b.ids.empty());
    std::size_t sum = 0;
    for (const auto& id : b.ids) {
      const auto& it = by_id.at(id);
      sum += it.temporal_length;
      EXPECT_EQ(it.aspect, b.aspect);
      EXPECT_EQ(it.modality == Modality::kImage, b.kind == BatchKind::kImageOnly);
      seen.insert(id);
    }
    EXPECT_EQ(sum, b.total_t);
    EXPECT_LE(sum, cfg.t_max);
  }
  EXPECT_EQ(seen.size(), items.size());
  EXPECT_EQ(std::set<std::string>(seen.begin(), seen.end()).size(), items.size());
  EXPECT_NEAR(plan.image_fraction(), 0.2, 0.02);
}

TEST(Schedule, FifoWithinQueues) {
  SchedulerConfig cfg;
  cfg.aspects = {"1:1"};
  std::vector<LatentItem> items;
  for (int i = 0; i < 50; ++i) items.push_back(video("v" + std::to_string(100 + i), 10 + i % 40));
  const BatchPlan plan = schedule(items, cfg);
  std::vector<std::string> order;
  for (const auto& b : plan.batches) order.insert(order.end(), b.ids.begin(), b.ids.end());
  std::vector<std::string> expect;
  for (const auto& it : items) expect.push_back(it.id);
  EXPECT_EQ(order, expect);
}

TEST(Schedule, DeterministicForSeed) {
  SchedulerConfig cfg;
  cfg.aspects = {"1:1", "16:9"};
  cfg.image_fraction = 0.3;
  cfg.seed = 9;
  const auto items = synthetic_stream(5000, balanced_image_share(0.3, 121), cfg.aspects, 121, 2);
  EXPECT_EQ(plan_to_json(schedule(items, cfg)), plan_to_json(schedule(items, cfg)));
}

TEST(Schedule, EmptyStreamGivesEmptyPlan) {
  SchedulerConfig cfg;
  cfg.aspects = {"1:1"};
  EXPECT_TRUE(schedule({}, cfg).batches.empty());
}

TEST(Schedule, OversizeItemIsNamedError) {
  SchedulerConfig cfg;
  cfg.aspects = {"1:1"};
  const std::vector<LatentItem> items{video("ok", 10), video("huge", 122)};
  EXPECT_THROW(schedule(items, cfg), OversizeItemError);
}

TEST(Schedule, MissingKindIsStarvation) {
  SchedulerConfig cfg;
  cfg.aspects = {"1:1"};
  cfg.image_fraction = 0.5;
  std::vector<LatentItem> only_videos;
  for (int i = 0; i < 10; ++i) only_videos.push_back(video("v" + std::to_string(i), 121));
  EXPECT_THROW(schedule(only_videos, cfg), StarvationError);
  cfg.patience = 5;
  cfg.seed = 1;
  BatchScheduler s(cfg);
  // Whatever kind is pending first, a stream of the other kind starves it.
  const bool wants_image = s.pending_kind() == BatchKind::kImageOnly;
  EXPECT_THROW(
      {
        for (int i = 0; i < 10; ++i) {
          s.push(wants_image ? video("v" + std::to_string(i), 121) : image("i" + std::to_string(i)));
          while (s.poll()) {
          }
        }
      },
      StarvationError);
}

TEST(Schedule, WeightedPolicyFavoursHeavyQueues) {
  SchedulerConfig cfg;
  cfg.aspects = {"a", "b"};
  cfg.policy = QueuePolicy::kWeighted;
  cfg.weights = {{"a", 3.0}, {"b", 1.0}};
  BatchScheduler s(cfg);
  for (int i = 0; i < 400; ++i) {
    s.push(video("a" + std::to_string(i), 121, "a"));
    s.push(video("b" + std::to_string(i), 121, "b"));
  }
  // Both queues are ready throughout; the rotation serves a three times as often.
  std::map<std::string, int> served;
  for (int i = 0; i < 400; ++i) {
    auto b = s.poll();
    ASSERT_TRUE(b.has_value());
    ++served[b->aspect];
  }
  EXPECT_EQ(served["a"], 300);
  EXPECT_EQ(served["b"], 100);
}

TEST(Schedule, ConfigValidation) {
  SchedulerConfig cfg;
  EXPECT_THROW(BatchScheduler{cfg}, ParameterError);
  cfg.aspects = {"1:1"};
  cfg.image_fraction = 1.5;
  EXPECT_THROW(BatchScheduler{cfg}, ParameterError);
}

TEST(Presets, TaskAndResolutionMixes) {
  EXPECT_DOUBLE_EQ(find_task_mix("video-lite").image_fraction(), 0.01);
  EXPECT_DOUBLE_EQ(find_task_mix("video-pro").image_fraction(), 0.02);
  for (const auto& mix : task_mixes()) {
    EXPECT_NEAR(mix.text_to_image + mix.text_to_video + mix.image_to_video, 1.0, 1e-12);
  }
  for (const auto& mix : resolution_mixes()) {
    double sum = 0.0;
    for (const auto& [name, w] : mix.weights) sum += w;
    EXPECT_NEAR(sum, 1.0, 0.01) << mix.name;
  }
  EXPECT_THROW(find_task_mix("nope"), ParameterError);
}

TEST(TarPacking, CapacityExactArchives) {
  std::vector<LatentItem> items;
  for (int i = 0; i < 2048; ++i) items.push_back(image("i" + std::to_string(i)));
  for (int i = 0; i < 5; ++i) {
    LatentItem v = video("v" + std::to_string(i), 50);
    v.resolution = Resolution::kMedium;
    items.push_back(v);
  }
  const TarPackPlan plan = plan_tar_packing(items);
  ASSERT_EQ(plan.archives.size(), 4u);
  EXPECT_EQ(plan.archives[0].ids.size(), 1024u);
  EXPECT_EQ(plan.archives[1].ids.size(), 1024u);
  EXPECT_EQ(plan.archives[2].ids.size(), 4u);
  EXPECT_EQ(plan.archives[3].ids.size(), 1u);
  EXPECT_EQ(tar_capacity(Resolution::kHigh, Modality::kImage), 64u);
  EXPECT_EQ(tar_capacity(Resolution::kHigh, Modality::kVideo), 1u);
}

TEST(ItemIo, JsonLinesRoundTrip) {
  const std::vector<LatentItem> items{video("a", 17, "16:9"), image("b", "9:16")};
  std::stringstream buf;
  write_items_jsonl(buf, items);
  const auto back = read_items_jsonl(buf);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].id, "a");
  EXPECT_EQ(back[0].temporal_length, 17u);
  EXPECT_EQ(back[1].modality, Modality::kImage);
  EXPECT_EQ(back[1].aspect, "9:16");
}

TEST(ItemIo, MalformedLinesAreFormatErrors) {
  std::stringstream bad(R"({"id":"a","modality":"video","aspect":"1:1","t":3,"resolution":"low"}
{"id":"b","modality":"hologram","aspect":"1:1","t":3,"resolution":"low"}
)");
  EXPECT_THROW(read_items_jsonl(bad), FormatError);
  EXPECT_THROW(parse_item("{not json"), FormatError);
}

TEST(Summary, ReportsAchievedFraction) {
  SchedulerConfig cfg;
  cfg.aspects = {"1:1"};
  cfg.image_fraction = 0.5;
  std::vector<LatentItem> items;
  for (int i = 0; i < 4; ++i) items.push_back(video("v" + std::to_string(i), 121));
  for (int i = 0; i < 4 * 121; ++i) items.push_back(image("i" + std::to_string(i)));
  const auto j = nlohmann::json::parse(summary_to_json(schedule(items, cfg), 0.5));
  EXPECT_EQ(j["batches"], 8);
  EXPECT_DOUBLE_EQ(j["image_fraction"].get<double>(), 0.5);
}

}  // namespace
}  // namespace nabla::batching
