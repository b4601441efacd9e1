// Copyright 2026 The maskfuse Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "maskfuse/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <thread>

#include "json.hpp"

#include "maskfuse/error.hpp"

namespace maskfuse
{

namespace
{

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Times one stage; the result lands in timings.seconds[stage].
template <typename Fn>
auto timed(StageTimings & timings, Stage stage, Fn && fn) -> decltype(fn())
{
  const auto start = Clock::now();
  struct Record
  {
    StageTimings & t;
    Stage s;
    Clock::time_point start;
    ~Record() { t.seconds[static_cast<std::size_t>(s)] = seconds_since(start); }
  } record{timings, stage, start};
  return fn();
}

ImageResult run_image(const Manifest & manifest, const ImageInputs & image,
  const PipelineConfig & config)
{
  ImageResult out;
  out.image_id = image.masks.image_id();
  out.timings.image_id = out.image_id;
  out.timings.seconds[static_cast<std::size_t>(Stage::kLoad)] = image.load_seconds;
  const auto start = Clock::now();
  const bool use_closed = config.mode != PipelineMode::kOpen;
  const bool use_open = config.mode != PipelineMode::kClosed;

  const MaskSet masks = timed(out.timings, Stage::kBudgetSelect, [&] {
    return select_mask_budget(image.masks, config.mask_budget);
  });
  out.timings.mask_count = masks.size();
  const auto & ms = masks.masks();

  std::vector<std::vector<ClosedSetVote>> votes(ms.size());
  if (use_closed) {
    votes = timed(out.timings, Stage::kClosedVote, [&] {
      std::vector<ClosedSetSource> sources;
      for (const auto & map : image.semantic_maps) {
        sources.push_back({&map, &manifest.taxonomy(map.taxonomy_id())});
      }
      return vote_all(masks, sources);
    });
  }

  std::vector<std::vector<CandidateLabel>> candidates(ms.size());
  if (use_open) {
    std::vector<std::vector<std::string>> phrases(ms.size());
    timed(out.timings, Stage::kCaptionParse, [&] {
      for (std::size_t i = 0; i < ms.size(); ++i) {
        const auto * caption = image.caption_for(ms[i].mask_id());
        if (caption == nullptr) {
          continue;
        }
        try {
          phrases[i] = extract_noun_phrases(*caption);
        } catch (const Error & e) {
          if (e.code() != ErrorCode::kEmptyCaption) {
            throw;
          }
          out.warnings.push_back(e.what());
        }
      }
    });

    timed(out.timings, Stage::kRank, [&] {
      const RankOptions options{
        config.top_k, config.strict_embeddings ? MissingEmbeddingPolicy::kStrict
                                               : MissingEmbeddingPolicy::kLenient};
      for (std::size_t i = 0; i < ms.size(); ++i) {
        const auto key = region_key(ms[i].mask_id());
        if (!image.embeddings || !image.embeddings->find(key)) {
          if (config.strict_embeddings) {
            throw Error(
              ErrorCode::kMissingRegionEmbedding,
              "mask '" + ms[i].mask_id() + "': no region embedding '" + key + "'");
          }
          out.warnings.push_back("mask '" + ms[i].mask_id() + "': no region embedding");
          continue;
        }
        std::vector<std::string> closed_names;
        for (const auto & v : votes[i]) {
          closed_names.push_back(v.label_text);
        }
        std::vector<std::string> skipped;
        try {
          candidates[i] = rank_candidates(
            key, phrases[i], closed_names, *image.embeddings, options, &skipped);
        } catch (const Error & e) {
          rethrow_with_context(e, "mask '" + ms[i].mask_id() + "'");
        }
        for (const auto & s : skipped) {
          out.warnings.push_back("mask '" + ms[i].mask_id() + "': no text embedding for '" + s + "'");
        }
      }
    });
  }

  const auto fusion = config.effective_fusion();
  out.labels = timed(out.timings, Stage::kFuse, [&] {
    std::vector<FusedLabel> labels;
    labels.reserve(ms.size());
    for (std::size_t i = 0; i < ms.size(); ++i) {
      labels.push_back(
        fuse_mask(ms[i].mask_id(), votes[i], candidates[i], manifest.taxonomies, fusion));
    }
    return labels;
  });

  auto rendered = timed(out.timings, Stage::kRender, [&] {
    return render_semantic_map(
      out.labels, masks, manifest.taxonomy(manifest.output_taxonomy), manifest.synonyms);
  });
  out.rendered = std::move(rendered.map);
  out.unresolved_labels = rendered.unresolved;

  if (image.ground_truth) {
    timed(out.timings, Stage::kEval, [&] {
      ConfusionMatrix cm(manifest.taxonomy(manifest.output_taxonomy));
      cm.accumulate(*image.ground_truth, out.rendered);
      out.confusion = std::move(cm);
    });
  }
  out.timings.total = seconds_since(start) + image.load_seconds;
  return out;
}

}  // namespace

std::string_view to_string(PipelineMode mode) noexcept
{
  switch (mode) {
    case PipelineMode::kClosed: return "closed";
    case PipelineMode::kOpen: return "open";
    case PipelineMode::kFull: return "full";
  }
  return "unknown";
}

PipelineMode parse_mode(std::string_view text)
{
  if (text == "closed") return PipelineMode::kClosed;
  if (text == "open") return PipelineMode::kOpen;
  if (text == "full") return PipelineMode::kFull;
  throw Error(ErrorCode::kInvalidArgument, "unknown mode '" + std::string(text) + "'");
}

std::string_view to_string(Stage stage) noexcept
{
  static constexpr std::string_view kNames[kNumStages] = {
    "load", "budget_select", "closed_vote", "caption_parse", "rank", "fuse", "render", "eval"};
  return kNames[static_cast<std::size_t>(stage)];
}

double StageTimings::stage_sum() const
{
  double sum = 0.0;
  for (const auto & s : seconds) {
    sum += s.value_or(0.0);
  }
  return sum;
}

FusionConfig PipelineConfig::effective_fusion() const
{
  FusionConfig f = fusion;
  if (mode == PipelineMode::kClosed) {
    f.open_branch_enabled = false;
  }
  return f;
}

void PipelineConfig::validate() const
{
  if (mask_budget == 0) {
    throw Error(ErrorCode::kInvalidArgument, "mask budget must be at least 1");
  }
  if (top_k == 0) {
    throw Error(ErrorCode::kInvalidArgument, "top-k must be at least 1");
  }
  if (workers == 0) {
    throw Error(ErrorCode::kInvalidArgument, "workers must be at least 1");
  }
  fusion.validate();
}

std::string config_to_json(const PipelineConfig & config)
{
  // Worker count is a scheduling knob that never changes results, so it is
  // left out to keep echoed configs identical across worker counts.
  nlohmann::json doc;
  doc["mode"] = std::string(to_string(config.mode));
  doc["mask_budget"] = config.mask_budget;
  doc["top_k"] = config.top_k;
  doc["tau_closed"] = config.fusion.tau_closed;
  doc["tau_open"] = config.fusion.tau_open;
  doc["delta_margin"] = config.fusion.delta_margin;
  doc["open_branch_enabled"] = config.effective_fusion().open_branch_enabled;
  doc["strict_embeddings"] = config.strict_embeddings;
  return doc.dump(2) + "\n";
}

PipelineConfig config_from_json(std::string_view json_text, PipelineConfig base)
{
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error & e) {
    throw Error(ErrorCode::kSchemaError, std::string("config: ") + e.what());
  }
  if (!doc.is_object()) {
    throw Error(ErrorCode::kSchemaError, "config: expected an object");
  }
  try {
    for (const auto & [key, value] : doc.items()) {
      if (key == "mode") {
        base.mode = parse_mode(value.get<std::string>());
      } else if (key == "mask_budget") {
        base.mask_budget = value.get<std::size_t>();
      } else if (key == "top_k") {
        base.top_k = value.get<std::size_t>();
      } else if (key == "tau_closed") {
        base.fusion.tau_closed = value.get<double>();
      } else if (key == "tau_open") {
        base.fusion.tau_open = value.get<double>();
      } else if (key == "delta_margin") {
        base.fusion.delta_margin = value.get<double>();
      } else if (key == "open_branch_enabled") {
        base.fusion.open_branch_enabled = value.get<bool>();
      } else if (key == "strict_embeddings") {
        base.strict_embeddings = value.get<bool>();
      } else if (key == "workers") {
        base.workers = value.get<unsigned>();
      } else {
        throw Error(ErrorCode::kSchemaError, "config: unknown field '" + key + "'");
      }
    }
  } catch (const nlohmann::json::type_error & e) {
    throw Error(ErrorCode::kSchemaError, std::string("config: ") + e.what());
  }
  return base;
}

PipelineResult run_pipeline(const Manifest & manifest, const PipelineConfig & config)
{
  config.validate();
  const auto n = manifest.images.size();
  PipelineResult result;
  result.images.resize(n);
  std::vector<std::exception_ptr> errors(n);

  auto work = [&](std::size_t i) {
    try {
      result.images[i] = run_image(manifest, manifest.images[i], config);
    } catch (const Error & e) {
      try {
        rethrow_with_context(e, "image '" + manifest.images[i].masks.image_id() + "'");
      } catch (...) {
        errors[i] = std::current_exception();
      }
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };

  const unsigned workers = std::min<std::size_t>(config.workers, std::max<std::size_t>(n, 1));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) {
      work(i);
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < workers; ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          work(i);
        }
      });
    }
  }
  for (const auto & e : errors) {
    if (e) {
      std::rethrow_exception(e);
    }
  }

  std::optional<ConfusionMatrix> merged;
  for (const auto & img : result.images) {
    if (!img.confusion) {
      continue;
    }
    if (!merged) {
      merged = *img.confusion;
    } else {
      merged->merge(*img.confusion);
    }
  }
  if (merged && merged->evaluated() > 0) {
    result.eval = finalize(*merged, manifest.taxonomy(manifest.output_taxonomy));
  }
  return result;
}

std::string labels_json(const PipelineResult & result)
{
  nlohmann::json doc;
  doc["images"] = nlohmann::json::array();
  for (const auto & img : result.images) {
    nlohmann::json entry;
    entry["image_id"] = img.image_id;
    entry["unresolved_labels"] = img.unresolved_labels;
    entry["labels"] = nlohmann::json::array();
    for (const auto & l : img.labels) {
      entry["labels"].push_back(
        {{"mask_id", l.mask_id},
         {"label", l.label_text},
         {"source", std::string(to_string(l.source))},
         {"confidence", l.confidence},
         {"rule", l.rule}});
    }
    doc["images"].push_back(std::move(entry));
  }
  return doc.dump(2) + "\n";
}

std::string timings_json(const PipelineResult & result)
{
  nlohmann::json doc = nlohmann::json::array();
  for (const auto & img : result.images) {
    nlohmann::json entry;
    entry["image_id"] = img.timings.image_id;
    entry["mask_count"] = img.timings.mask_count;
    entry["total_seconds"] = img.timings.total;
    nlohmann::json stages = nlohmann::json::object();
    for (std::size_t s = 0; s < kNumStages; ++s) {
      if (img.timings.seconds[s]) {
        stages[std::string(to_string(static_cast<Stage>(s)))] = *img.timings.seconds[s];
      }
    }
    entry["stages"] = std::move(stages);
    doc.push_back(std::move(entry));
  }
  return doc.dump(2) + "\n";
}

void write_outputs(
  const PipelineResult & result, const PipelineConfig & config,
  const std::filesystem::path & out_dir)
{
  std::filesystem::create_directories(out_dir);
  write_file_text(out_dir / "labels.json", labels_json(result));
  for (const auto & img : result.images) {
    write_label_grid(img.rendered, out_dir / (img.image_id + ".sfsl"));
  }
  if (result.eval) {
    write_file_text(out_dir / "eval.json", eval_report_json(*result.eval));
    write_file_text(out_dir / "eval.txt", eval_report_text(*result.eval));
  }
  write_file_text(out_dir / "timings.json", timings_json(result));
  write_file_text(out_dir / "config.json", config_to_json(config));
}

EvalReport run_eval(
  std::span<const std::filesystem::path> predictions,
  std::span<const std::filesystem::path> ground_truths, const Taxonomy & taxonomy)
{
  if (predictions.size() != ground_truths.size() || predictions.empty()) {
    throw Error(
      ErrorCode::kInvalidArgument, std::to_string(predictions.size()) + " predictions for " +
                                     std::to_string(ground_truths.size()) + " ground truths");
  }
  ConfusionMatrix cm(taxonomy);
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const auto pred = read_label_grid(predictions[i], taxonomy.id());
    const auto gt = read_label_grid(ground_truths[i], taxonomy.id());
    try {
      cm.accumulate(gt, pred);
    } catch (const Error & e) {
      rethrow_with_context(e, predictions[i].string() + " vs " + ground_truths[i].string());
    }
  }
  return finalize(cm, taxonomy);
}

double percentile(std::vector<double> values, double q)
{
  if (values.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "percentile of no samples");
  }
  std::sort(values.begin(), values.end());
  auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(values.size())));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  return values[rank - 1];
}

namespace
{

StageSummary summarize(std::vector<double> values)
{
  StageSummary s;
  s.samples = values.size();
  std::sort(values.begin(), values.end());
  const auto n = values.size();
  s.median = n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
  s.p95 = percentile(values, 0.95);
  return s;
}

}  // namespace

BenchReport run_bench(
  const std::filesystem::path & manifest_path, const PipelineConfig & config,
  std::size_t iterations)
{
  if (iterations < 3) {
    throw Error(ErrorCode::kInvalidArgument, "bench needs at least 3 iterations");
  }
  BenchReport report;
  report.mode = config.mode;
  report.iterations = iterations;

  std::array<std::vector<double>, kNumStages> per_stage;
  std::array<bool, kNumStages> seen{};
  std::vector<double> totals;
  std::vector<double> engine;
  for (std::size_t it = 0; it < iterations; ++it) {
    const auto start = Clock::now();
    const auto manifest = load_manifest(manifest_path);
    const auto result = run_pipeline(manifest, config);
    const double total = seconds_since(start);
    if (it == 0) {
      continue;  // warm-up
    }
    std::array<double, kNumStages> sums{};
    std::size_t masks = 0;
    double engine_sum = 0.0;
    for (const auto & img : result.images) {
      masks += img.timings.mask_count;
      engine_sum += img.timings.total - img.timings.get(Stage::kLoad).value_or(0.0);
      for (std::size_t s = 0; s < kNumStages; ++s) {
        if (img.timings.seconds[s]) {
          sums[s] += *img.timings.seconds[s];
          seen[s] = true;
        }
      }
    }
    for (std::size_t s = 0; s < kNumStages; ++s) {
      per_stage[s].push_back(sums[s]);
    }
    totals.push_back(total);
    engine.push_back(engine_sum);
    report.masks_per_run = masks;
  }
  report.measured_runs = totals.size();
  for (std::size_t s = 0; s < kNumStages; ++s) {
    if (seen[s]) {
      report.stages[s] = summarize(per_stage[s]);
    }
  }
  report.engine = summarize(engine);
  report.total = summarize(totals);
  return report;
}

std::string bench_json(const BenchReport & report)
{
  nlohmann::json doc;
  doc["mode"] = std::string(to_string(report.mode));
  doc["iterations"] = report.iterations;
  doc["measured_runs"] = report.measured_runs;
  doc["masks_per_run"] = report.masks_per_run;
  nlohmann::json stages = nlohmann::json::object();
  for (std::size_t s = 0; s < kNumStages; ++s) {
    if (const auto & st = report.stages[s]) {
      stages[std::string(to_string(static_cast<Stage>(s)))] = {
        {"median_seconds", st->median}, {"p95_seconds", st->p95}};
    }
  }
  doc["stages"] = std::move(stages);
  doc["engine"] = {{"median_seconds", report.engine.median}, {"p95_seconds", report.engine.p95}};
  doc["total"] = {{"median_seconds", report.total.median}, {"p95_seconds", report.total.p95}};
  return doc.dump(2) + "\n";
}

std::string bench_table(const BenchReport & report)
{
  std::string out;
  char line[160];
  std::snprintf(
    line, sizeof(line), "mode %s, %zu measured runs (1 warm-up discarded), %zu masks/run\n",
    std::string(to_string(report.mode)).c_str(), report.measured_runs, report.masks_per_run);
  out += line;
  std::snprintf(line, sizeof(line), "%-16s %12s %12s\n", "stage", "median ms", "p95 ms");
  out += line;
  for (std::size_t s = 0; s < kNumStages; ++s) {
    if (const auto & st = report.stages[s]) {
      std::snprintf(
        line, sizeof(line), "%-16s %12.3f %12.3f\n",
        std::string(to_string(static_cast<Stage>(s))).c_str(), st->median * 1e3, st->p95 * 1e3);
      out += line;
    }
  }
  std::snprintf(
    line, sizeof(line), "%-16s %12.3f %12.3f\n", "engine", report.engine.median * 1e3,
    report.engine.p95 * 1e3);
  out += line;
  std::snprintf(
    line, sizeof(line), "%-16s %12.3f %12.3f\n", "total", report.total.median * 1e3,
    report.total.p95 * 1e3);
  out += line;
  return out;
}

}  // namespace maskfuse
