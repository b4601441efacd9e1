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

#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "maskfuse/evaluation.hpp"
#include "maskfuse/fusion.hpp"
#include "maskfuse/io.hpp"
#include "maskfuse/openvocab.hpp"

namespace maskfuse
{

enum class PipelineMode {
  kClosed,  // closed-set votes only
  kOpen,    // caption ranking only
  kFull,    // both branches and fusion
};

std::string_view to_string(PipelineMode mode) noexcept;
PipelineMode parse_mode(std::string_view text);

struct PipelineConfig
{
  PipelineMode mode = PipelineMode::kFull;
  std::size_t mask_budget = 100;
  std::size_t top_k = 3;
  FusionConfig fusion;
  bool strict_embeddings = false;
  unsigned workers = 1;

  /// Fusion settings as the pipeline applies them: closed mode disables the
  /// open branch.
  FusionConfig effective_fusion() const;
  void validate() const;
};

/// JSON form used for the config file and the echoed effective config.
std::string config_to_json(const PipelineConfig & config);
/// Fields absent from `json_text` keep their value in `base`.
PipelineConfig config_from_json(std::string_view json_text, PipelineConfig base);

enum class Stage : std::size_t {
  kLoad,
  kBudgetSelect,
  kClosedVote,
  kCaptionParse,
  kRank,
  kFuse,
  kRender,
  kEval,
};
inline constexpr std::size_t kNumStages = 8;
std::string_view to_string(Stage stage) noexcept;

struct StageTimings
{
  std::string image_id;
  std::size_t mask_count = 0;
  /// Seconds per stage; empty for stages the mode skipped.
  std::array<std::optional<double>, kNumStages> seconds{};
  /// Whole per-image run, including overhead between stages.
  double total = 0.0;

  std::optional<double> get(Stage s) const { return seconds[static_cast<std::size_t>(s)]; }
  double stage_sum() const;
};

struct ImageResult
{
  std::string image_id;
  std::vector<FusedLabel> labels;
  SemanticMap rendered;
  std::size_t unresolved_labels = 0;
  std::optional<ConfusionMatrix> confusion;
  StageTimings timings;
  std::vector<std::string> warnings;
};

struct PipelineResult
{
  std::vector<ImageResult> images;
  /// Merged over every image with ground truth.
  std::optional<EvalReport> eval;
};

/// Budget selection, closed votes, caption ranking, fusion, rendering, and
/// (where ground truth exists) evaluation, for every image. Images run on
/// up to `config.workers` threads; results are in manifest order and do not
/// depend on scheduling. Errors carry image and mask context.
PipelineResult run_pipeline(const Manifest & manifest, const PipelineConfig & config);

/// Deterministic labels document for all images.
std::string labels_json(const PipelineResult & result);
std::string timings_json(const PipelineResult & result);

/// Writes labels.json, <image_id>.sfsl per image, eval.json / eval.txt when
/// evaluated, timings.json, and config.json.
void write_outputs(const PipelineResult & result, const PipelineConfig & config,
  const std::filesystem::path & out_dir);

/// Evaluates aligned prediction / ground-truth files.
EvalReport run_eval(std::span<const std::filesystem::path> predictions,
  std::span<const std::filesystem::path> ground_truths, const Taxonomy & taxonomy);

struct StageSummary
{
  double median = 0.0;
  double p95 = 0.0;
  std::size_t samples = 0;
};

struct BenchReport
{
  PipelineMode mode;
  std::size_t iterations = 0;
  /// Runs kept after the warm-up run is discarded.
  std::size_t measured_runs = 0;
  std::size_t masks_per_run = 0;
  /// Per stage, summed over images within a run. Absent if never run.
  std::array<std::optional<StageSummary>, kNumStages> stages{};
  /// Per-run pipeline time excluding fixture loading.
  StageSummary engine;
  /// Per-run wall time including fixture loading.
  StageSummary total;
};

/// Loads and runs the manifest `iterations` times (>= 3). The first run is
/// a warm-up and is discarded.
BenchReport run_bench(const std::filesystem::path & manifest_path, const PipelineConfig & config,
  std::size_t iterations);

/// Nearest-rank percentile of `values` (0 < q <= 1).
double percentile(std::vector<double> values, double q);

std::string bench_json(const BenchReport & report);
std::string bench_table(const BenchReport & report);

}  // namespace maskfuse
