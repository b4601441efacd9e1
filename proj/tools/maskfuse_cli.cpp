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

// Command-line front end: run, eval, bench, gen, validate.
// Exit codes: 0 ok, 1 input error, 2 internal error.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "maskfuse/error.hpp"
#include "maskfuse/evaluation.hpp"
#include "maskfuse/io.hpp"
#include "maskfuse/pipeline.hpp"

namespace fs = std::filesystem;
using namespace maskfuse;

namespace
{

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitInternal = 2;

// Options shared by run and bench. Each flag only overrides the config file
// when it was given on the command line.
struct PipelineFlags
{
  std::string config_file;
  std::string mode;
  std::size_t budget = 0;
  std::size_t top_k = 0;
  double tau_closed = 0;
  double tau_open = 0;
  double delta_margin = 0;
  bool strict = false;
  unsigned workers = 0;

  CLI::Option * o_mode = nullptr;
  CLI::Option * o_budget = nullptr;
  CLI::Option * o_top_k = nullptr;
  CLI::Option * o_tau_closed = nullptr;
  CLI::Option * o_tau_open = nullptr;
  CLI::Option * o_delta = nullptr;
  CLI::Option * o_strict = nullptr;
  CLI::Option * o_workers = nullptr;

  void attach(CLI::App * app)
  {
    app->add_option("--config", config_file, "JSON config file (flags override it)")
      ->check(CLI::ExistingFile);
    o_mode = app->add_option("--mode", mode, "closed | open | full")
               ->check(CLI::IsMember({"closed", "open", "full"}));
    o_budget = app->add_option("--budget", budget, "masks kept per image (default 100)");
    o_top_k = app->add_option("--top-k", top_k, "open-vocabulary labels kept per mask (default 3)");
    o_tau_closed = app->add_option("--tau-closed", tau_closed, "closed-set confidence threshold");
    o_tau_open = app->add_option("--tau-open", tau_open, "minimum cosine for open labels");
    o_delta = app->add_option("--delta-margin", delta_margin, "contradiction margin");
    o_strict = app->add_flag("--strict-embeddings", strict, "fail on missing text embeddings");
    o_workers = app->add_option("--workers", workers, "images processed concurrently");
  }

  PipelineConfig resolve() const
  {
    PipelineConfig config;
    if (!config_file.empty()) {
      config = config_from_json(read_file_text(config_file), config);
    }
    if (o_mode->count() > 0) config.mode = parse_mode(mode);
    if (o_budget->count() > 0) config.mask_budget = budget;
    if (o_top_k->count() > 0) config.top_k = top_k;
    if (o_tau_closed->count() > 0) config.fusion.tau_closed = tau_closed;
    if (o_tau_open->count() > 0) config.fusion.tau_open = tau_open;
    if (o_delta->count() > 0) config.fusion.delta_margin = delta_margin;
    if (o_strict->count() > 0) config.strict_embeddings = strict;
    if (o_workers->count() > 0) config.workers = workers;
    config.validate();
    return config;
  }
};

void print_warnings(const std::vector<std::string> & warnings)
{
  for (const auto & w : warnings) {
    std::cerr << "warning: " << w << "\n";
  }
}

int cmd_run(const std::string & manifest_path, const PipelineFlags & flags, const std::string & out)
{
  const auto config = flags.resolve();
  const auto manifest = load_manifest(manifest_path);
  print_warnings(manifest.warnings);
  const auto result = run_pipeline(manifest, config);
  for (const auto & img : result.images) {
    print_warnings(img.warnings);
  }
  write_outputs(result, config, out);
  std::size_t masks = 0;
  for (const auto & img : result.images) {
    masks += img.labels.size();
  }
  std::cout << "labeled " << masks << " masks in " << result.images.size() << " images -> "
            << out << "\n";
  if (result.eval) {
    std::cout << "mIoU " << result.eval->miou << "\n";
  }
  return kExitOk;
}

int cmd_eval(
  const std::string & manifest_path, const std::string & pred_dir,
  const std::vector<std::string> & preds, const std::vector<std::string> & gts,
  const std::string & taxonomy_path, const std::string & report_dir)
{
  EvalReport report;
  if (!manifest_path.empty()) {
    const auto manifest = load_manifest(manifest_path);
    const auto & taxonomy = manifest.taxonomy(manifest.output_taxonomy);
    ConfusionMatrix cm(taxonomy);
    for (const auto & img : manifest.images) {
      if (!img.ground_truth) {
        continue;
      }
      const auto pred =
        read_label_grid(fs::path(pred_dir) / (img.masks.image_id() + ".sfsl"), taxonomy.id());
      cm.accumulate(*img.ground_truth, pred);
    }
    report = finalize(cm, taxonomy);
  } else {
    if (taxonomy_path.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "eval without --manifest needs --taxonomy");
    }
    const auto taxonomy = read_taxonomy_file(fs::path(taxonomy_path).stem().string(), taxonomy_path);
    std::vector<fs::path> p(preds.begin(), preds.end());
    std::vector<fs::path> g(gts.begin(), gts.end());
    report = run_eval(p, g, taxonomy);
  }
  const auto text = eval_report_text(report);
  if (!report_dir.empty()) {
    fs::create_directories(report_dir);
    write_file_text(fs::path(report_dir) / "eval.json", eval_report_json(report));
    write_file_text(fs::path(report_dir) / "eval.txt", text);
  }
  std::cout << text;
  return kExitOk;
}

int cmd_bench(
  const std::string & manifest_path, const PipelineFlags & flags, std::size_t iterations,
  const std::string & out)
{
  const auto config = flags.resolve();
  const auto report = run_bench(manifest_path, config, iterations);
  if (!out.empty()) {
    fs::create_directories(out);
    write_file_text(fs::path(out) / "bench.json", bench_json(report));
    write_file_text(fs::path(out) / "config.json", config_to_json(config));
  }
  std::cout << bench_table(report);
  return kExitOk;
}

int cmd_validate(const std::string & manifest_path)
{
  const auto manifest = load_manifest(manifest_path);
  print_warnings(manifest.warnings);
  std::size_t masks = 0;
  for (const auto & img : manifest.images) {
    masks += img.masks.size();
  }
  std::cout << manifest_path << ": ok (" << manifest.images.size() << " images, " << masks
            << " masks, " << manifest.warnings.size() << " warnings)\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"maskfuse: fuse class-agnostic masks with closed-set and open-vocabulary labels"};
  app.require_subcommand(1);

  std::string manifest;
  std::string out;
  std::uint64_t seed = 42;
  std::size_t iterations = 5;

  auto * run = app.add_subcommand("run", "label every mask and render semantic maps");
  PipelineFlags run_flags;
  run->add_option("--manifest", manifest, "fixture manifest")->required();
  run->add_option("--out", out, "output directory")->required();
  run_flags.attach(run);

  auto * bench = app.add_subcommand("bench", "time pipeline stages over repeated runs");
  PipelineFlags bench_flags;
  bench->add_option("--manifest", manifest, "fixture manifest")->required();
  bench->add_option("--iterations", iterations, "runs including one warm-up (>= 3)");
  bench->add_option("--out", out, "directory for bench.json");
  bench_flags.attach(bench);

  auto * eval = app.add_subcommand("eval", "compute mIoU of rendered maps against ground truth");
  std::string pred_dir;
  std::vector<std::string> preds;
  std::vector<std::string> gts;
  std::string taxonomy;
  std::string report_dir;
  eval->add_option("--manifest", manifest, "manifest with ground-truth references");
  eval->add_option("--pred-dir", pred_dir, "directory holding <image_id>.sfsl predictions");
  eval->add_option("--pred", preds, "prediction label grid (repeatable)");
  eval->add_option("--gt", gts, "ground-truth label grid (repeatable)");
  eval->add_option("--taxonomy", taxonomy, "taxonomy file for --pred/--gt");
  eval->add_option("--out", report_dir, "directory for eval.json and eval.txt");

  auto * gen = app.add_subcommand("gen", "write a synthetic fixture");
  SceneSpec spec;
  gen->add_option("--seed", seed, "generator seed");
  gen->add_option("--out", out, "output directory")->required();
  gen->add_option("--width", spec.width, "image width");
  gen->add_option("--height", spec.height, "image height");
  gen->add_option("--images", spec.num_images, "number of images");
  gen->add_option("--regions", spec.num_regions, "labeled regions per image");
  gen->add_option("--distractors", spec.num_distractors, "extra low-confidence masks per image");
  gen->add_option("--classes", spec.num_classes, "taxonomy size");
  gen->add_option("--maps", spec.num_maps, "closed-set maps per image");
  gen->add_option("--dim", spec.embedding_dim, "embedding dimension");
  gen->add_option("--corruption", spec.closed_corruption_rate, "closed-map pixel corruption rate");
  gen->add_option("--wrong-captions", spec.wrong_caption_rate, "wrong caption rate");
  gen->add_option("--gap", spec.similarity_gap, "minimum cosine gap between labels");

  auto * validate = app.add_subcommand("validate", "check a manifest and everything it references");
  validate->add_option("--manifest", manifest, "fixture manifest")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError & e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitInput;
  }

  try {
    if (run->parsed()) {
      return cmd_run(manifest, run_flags, out);
    }
    if (bench->parsed()) {
      return cmd_bench(manifest, bench_flags, iterations, out);
    }
    if (eval->parsed()) {
      if (manifest.empty() == preds.empty()) {
        throw Error(ErrorCode::kInvalidArgument, "eval needs either --manifest or --pred/--gt");
      }
      if (!manifest.empty() && pred_dir.empty()) {
        throw Error(ErrorCode::kInvalidArgument, "eval --manifest needs --pred-dir");
      }
      return cmd_eval(manifest, pred_dir, preds, gts, taxonomy, report_dir);
    }
    if (gen->parsed()) {
      const auto path = generate_synthetic_scene(seed, spec, out);
      std::cout << path.string() << "\n";
      return kExitOk;
    }
    if (validate->parsed()) {
      return cmd_validate(manifest);
    }
  } catch (const Error & e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception & e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}
