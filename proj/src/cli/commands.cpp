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

#include "nabla/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <ostream>
#include <string>

#include <json.hpp>

#include "nabla/batch_scheduler.hpp"
#include "nabla/cost_model.hpp"
#include "nabla/errors.hpp"
#include "nabla/rng.hpp"
#include "nabla/soup.hpp"
#include "nabla/sparse_attention.hpp"

namespace nabla::cli {

using nlohmann::json;

namespace {

std::string g6(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", x);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& path, bool binary) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, binary ? std::ios::binary : std::ios::out);
  if (!f) throw IoError("cannot write " + path.string());
  return f;
}

}  // namespace

Format parse_format(const std::string& name) {
  if (name == "csv") return Format::kCsv;
  if (name == "json") return Format::kJson;
  throw ParameterError("unknown format '" + name + "' (expected csv or json)");
}

int resolve_threads(std::optional<int> flag) {
  if (flag) {
    if (*flag < 1) throw ParameterError("--threads must be >= 1");
    return *flag;
  }
  if (const char* env = std::getenv("NABLA_ENGINE_THREADS"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1) throw ParameterError("NABLA_ENGINE_THREADS must be a positive integer");
    return static_cast<int>(v);
  }
  return 1;
}

QkKind parse_qk_kind(const std::string& name) {
  if (name == "local") return QkKind::kLocal;
  if (name == "gaussian") return QkKind::kGaussian;
  throw ParameterError("unknown q/k generator '" + name + "' (expected local or gaussian)");
}

std::pair<Tensor, Tensor> make_synthetic_qk(const VideoLayout& layout, std::size_t heads,
                                            std::size_t head_dim, QkKind kind,
                                            std::uint64_t seed) {
  layout.validate();
  if (heads == 0 || head_dim == 0) throw ParameterError("heads and head_dim must be positive");
  const std::size_t s = layout.sequence_length();
  Rng rng(seed);
  if (kind == QkKind::kGaussian) {
    Tensor q = random_normal({heads, s, head_dim}, rng);
    Tensor k = random_normal({heads, s, head_dim}, rng);
    return {std::move(q), std::move(k)};
  }

  // Sinusoidal features of (t, y, x) projected by a shared random matrix, so
  // q . k decays with the spatio-temporal distance between tokens.
  constexpr std::size_t kFreqs = 8;
  constexpr std::size_t kFeatures = 3 * 2 * kFreqs;
  Tensor q({heads, s, head_dim});
  Tensor k({heads, s, head_dim});
  std::vector<double> feat(kFeatures);
  std::vector<float> proj(kFeatures * head_dim);
  for (std::size_t h = 0; h < heads; ++h) {
    const double bandwidth = rng.uniform(0.2, 0.8);
    const double amplitude = rng.uniform(1.5, 2.5);
    const double noise = 0.3;
    for (auto& w : proj) w = static_cast<float>(rng.normal() / std::sqrt(double(kFeatures)));
    std::vector<double> omega(kFreqs);
    for (std::size_t f = 0; f < kFreqs; ++f) {
      omega[f] = bandwidth * std::numbers::pi * static_cast<double>(f + 1) / (2.0 * kFreqs);
    }
    for (std::size_t t = 0; t < layout.frames; ++t) {
      for (std::size_t y = 0; y < layout.height; ++y) {
        for (std::size_t x = 0; x < layout.width; ++x) {
          const std::size_t token = (t * layout.height + y) * layout.width + x;
          const double coord[3] = {double(t), double(y), double(x)};
          for (std::size_t a = 0; a < 3; ++a) {
            for (std::size_t f = 0; f < kFreqs; ++f) {
              feat[(a * kFreqs + f) * 2] = std::cos(omega[f] * coord[a]);
              feat[(a * kFreqs + f) * 2 + 1] = std::sin(omega[f] * coord[a]);
            }
          }
          for (std::size_t c = 0; c < head_dim; ++c) {
            double acc = 0.0;
            for (std::size_t e = 0; e < kFeatures; ++e) acc += feat[e] * proj[e * head_dim + c];
            q(h, token, c) = static_cast<float>(amplitude * acc + noise * rng.normal());
            k(h, token, c) = static_cast<float>(amplitude * acc + noise * rng.normal());
          }
        }
      }
    }
  }
  const ReorderPlan plan = build_reorder_plan(layout);
  return {apply_reorder(q, plan), apply_reorder(k, plan)};
}

void run_mask(const MaskOptions& opt, std::ostream& out) {
  const std::size_t block = opt.block_size ? opt.block_size : opt.layout.patch_tokens();
  auto [q, k] = make_synthetic_qk(opt.layout, opt.heads, opt.head_dim, opt.qk, opt.seed);
  const auto spec = AttentionSpec::for_head_dim(opt.heads, opt.head_dim);

  json rows = json::array();
  if (opt.format == Format::kCsv) out << "thr,head,kept_blocks,total_blocks,sparsity\n";
  for (double thr : opt.thresholds) {
    NablaConfig cfg{thr, block, opt.sta};
    const BlockMask mask = build_nabla_mask(q, k, opt.layout, cfg, spec, opt.threads);
    const std::size_t per_head = mask.query_blocks() * mask.key_blocks();
    json heads = json::array();
    for (std::size_t h = 0; h < mask.heads(); ++h) {
      if (opt.format == Format::kCsv) {
        out << g6(thr) << ',' << h << ',' << mask.count_true(h) << ',' << per_head << ','
            << g6(mask.sparsity(h)) << '\n';
      }
      heads.push_back({{"head", h},
                       {"kept_blocks", mask.count_true(h)},
                       {"total_blocks", per_head},
                       {"sparsity", mask.sparsity(h)}});
    }
    if (opt.format == Format::kCsv) {
      out << g6(thr) << ",all," << mask.count_true() << ',' << mask.total() << ','
          << g6(mask.sparsity()) << '\n';
    }
    rows.push_back({{"thr", thr}, {"sparsity", mask.sparsity()}, {"heads", heads}});

    const std::string tag = "thr" + g6(thr);
    if (opt.mask_dir) {
      auto f = open_out(*opt.mask_dir / ("mask_" + tag + ".bin"), true);
      write_block_mask(f, mask);
    }
    if (opt.pgm_dir) {
      for (std::size_t h = 0; h < mask.heads(); ++h) {
        auto f = open_out(*opt.pgm_dir / ("mask_" + tag + "_head" + std::to_string(h) + ".pgm"), true);
        write_mask_pgm(f, mask, h);
      }
    }
  }
  if (opt.format == Format::kJson) {
    json doc = {{"layout",
                 {{"frames", opt.layout.frames},
                  {"height", opt.layout.height},
                  {"width", opt.layout.width},
                  {"patch", opt.layout.patch}}},
                {"heads", opt.heads},
                {"head_dim", opt.head_dim},
                {"block_size", block},
                {"seed", opt.seed},
                {"masks", rows}};
    if (opt.sta) doc["sta_window"] = {opt.sta->t, opt.sta->h, opt.sta->w};
    out << doc.dump(2) << '\n';
  }
}

void run_bench(const BenchCommandOptions& opt, std::ostream& out) {
  BenchOptions bo;
  bo.block_size = opt.block_size;
  bo.repeats = opt.repeats;
  bo.threads = opt.threads;
  bo.check_error = opt.check_error;
  if (opt.format == Format::kCsv) out << SparseAttnReport::csv_header() << '\n';
  json arr = json::array();
  for (double target : opt.sparsities) {
    const auto report =
        bench_sparse_vs_dense(opt.seq, opt.head_dim, opt.heads, target, opt.seed, bo);
    if (opt.format == Format::kCsv) {
      out << report.to_csv_row() << '\n';
    } else {
      arr.push_back(json::parse(report.to_json()));
    }
  }
  if (opt.format == Format::kJson) out << arr.dump(2) << '\n';
}

void run_cost(const CostCommandOptions& opt, std::ostream& out) {
  cost::SweepAxes axes;
  axes.presets = opt.presets;
  if (axes.presets.empty()) {
    for (const auto& p : cost::model_presets()) axes.presets.push_back(p.name);
  }
  axes.volumes = opt.volumes.empty() ? std::vector<double>{cost::kReferenceVolume} : opt.volumes;
  axes.gpus = opt.gpus;
  axes.offload = opt.offload;
  axes.batch = opt.batch;
  const auto rows = cost::sweep(axes);
  if (opt.format == Format::kCsv) {
    cost::write_sweep_csv(out, rows);
  } else {
    out << cost::sweep_to_json(rows) << '\n';
  }
}

void run_batch_sim(const BatchSimOptions& opt, std::ostream& out) {
  using namespace batching;
  std::vector<LatentItem> items;
  std::vector<std::string> aspects = opt.aspects;
  if (opt.items) {
    std::ifstream in(*opt.items);
    if (!in) throw IoError("cannot open items file " + opt.items->string());
    items = read_items_jsonl(in);
  }
  if (aspects.empty()) {
    for (const auto& item : items) {
      if (std::find(aspects.begin(), aspects.end(), item.aspect) == aspects.end()) {
        aspects.push_back(item.aspect);
      }
    }
  }

  SchedulerConfig cfg;
  cfg.t_max = opt.t_max;
  cfg.seed = opt.seed;
  cfg.patience = opt.patience;
  cfg.aspects = aspects;
  if (opt.image_fraction) {
    cfg.image_fraction = *opt.image_fraction;
  } else if (opt.task_mix) {
    cfg.image_fraction = find_task_mix(*opt.task_mix).image_fraction();
  }
  if (opt.policy == "weighted") {
    if (!opt.resolution_mix) throw ParameterError("--policy weighted needs --resolution-mix");
    cfg.policy = QueuePolicy::kWeighted;
    // Queues are named by resolution; without explicit aspects, every bucket
    // of the mix gets a queue, otherwise only the configured ones keep weights.
    for (const auto& [aspect, w] : find_resolution_mix(*opt.resolution_mix).weights) {
      if (aspects.empty() && !opt.items) {
        cfg.aspects.push_back(aspect);
      } else if (std::find(cfg.aspects.begin(), cfg.aspects.end(), aspect) == cfg.aspects.end()) {
        continue;
      }
      cfg.weights[aspect] = w;
    }
  } else if (opt.policy != "round-robin") {
    throw ParameterError("unknown queue policy '" + opt.policy + "'");
  }

  if (!opt.items && opt.synthetic > 0) {
    if (cfg.aspects.empty()) cfg.aspects = {"1:1", "16:9", "9:16"};
    const double share =
        opt.synthetic_image_share.value_or(balanced_image_share(cfg.image_fraction, cfg.t_max));
    items = synthetic_stream(opt.synthetic, share, cfg.aspects, cfg.t_max, opt.seed);
  }

  BatchPlan plan;
  plan.t_max = cfg.t_max;
  if (!items.empty()) plan = schedule(items, cfg);

  if (opt.tar_plan) {
    auto f = open_out(*opt.tar_plan, false);
    f << tar_plan_to_json(plan_tar_packing(items)) << '\n';
  }
  out << (opt.summary ? summary_to_json(plan, cfg.image_fraction) : plan_to_json(plan)) << '\n';
}

void run_soup(const SoupCommandOptions& opt, std::ostream& out) {
  if (opt.manifests.empty()) throw ParameterError("soup needs at least one --manifest");
  if (opt.out.empty()) throw ParameterError("soup needs --out");
  std::vector<soup::ParamSet> sets;
  for (const auto& m : opt.manifests) sets.push_back(soup::load_param_set(m));
  const auto scheme = soup::parse_scheme(opt.scheme);
  const auto weights = soup::soup_weights(sets, scheme);
  const auto merged = soup::merge(sets, weights);
  soup::save_param_set(opt.out, merged);
  json inputs = json::array();
  for (std::size_t i = 0; i < sets.size(); ++i) {
    inputs.push_back({{"manifest", opt.manifests[i].generic_string()},
                      {"subdomain", sets[i].subdomain},
                      {"dataset_size", sets[i].dataset_size},
                      {"weight", weights[i]}});
  }
  out << json{{"scheme", soup::to_string(scheme)},
              {"inputs", inputs},
              {"parameters", merged.params.size()},
              {"out", opt.out.generic_string()}}
             .dump(2)
      << '\n';
}

void run_reorder(const ReorderCommandOptions& opt, std::ostream& out) {
  out << reorder_plan_to_json(build_reorder_plan(opt.layout)) << '\n';
}

std::string error_json(const std::string& kind, const std::string& message) {
  return json{{"error", kind}, {"message", message}}.dump();
}

}  // namespace nabla::cli
