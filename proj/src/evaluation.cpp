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

#include "maskfuse/evaluation.hpp"

#include <cstdio>

#include "json.hpp"

#include "maskfuse/error.hpp"

namespace maskfuse
{

ConfusionMatrix::ConfusionMatrix(const Taxonomy & taxonomy)
: taxonomy_id_(taxonomy.id()),
  classes_(taxonomy.size()),
  counts_(classes_ * (classes_ + 1), 0)
{
}

void ConfusionMatrix::accumulate(const SemanticMap & gt, const SemanticMap & pred)
{
  if (gt.width() != pred.width() || gt.height() != pred.height()) {
    throw Error(
      ErrorCode::kDimensionMismatch, "ground truth " + std::to_string(gt.width()) + "x" +
                                       std::to_string(gt.height()) + " vs prediction " +
                                       std::to_string(pred.width()) + "x" +
                                       std::to_string(pred.height()));
  }
  if (gt.taxonomy_id() != taxonomy_id_ || pred.taxonomy_id() != taxonomy_id_) {
    throw Error(
      ErrorCode::kTaxonomyMismatch, "ground truth '" + gt.taxonomy_id() + "' and prediction '" +
                                      pred.taxonomy_id() + "' evaluated in '" + taxonomy_id_ +
                                      "'");
  }
  const auto g = gt.labels().data();
  const auto p = pred.labels().data();
  // Validate before touching the counts so a bad pair leaves the matrix intact.
  for (std::size_t i = 0; i < g.size(); ++i) {
    if ((g[i] != kVoidId && g[i] >= classes_) || (p[i] != kVoidId && p[i] >= classes_)) {
      throw Error(
        ErrorCode::kInvalidLabel,
        "pixel " + std::to_string(i) + " holds a class id outside '" + taxonomy_id_ + "'");
    }
  }
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (g[i] == kVoidId) {
      ++ignored_;
      continue;
    }
    const std::size_t col = p[i] == kVoidId ? classes_ : p[i];
    ++counts_[g[i] * (classes_ + 1) + col];
    ++evaluated_;
  }
}

void ConfusionMatrix::merge(const ConfusionMatrix & other)
{
  if (other.taxonomy_id_ != taxonomy_id_ || other.classes_ != classes_) {
    throw Error(
      ErrorCode::kTaxonomyMismatch,
      "cannot merge '" + other.taxonomy_id_ + "' into '" + taxonomy_id_ + "'");
  }
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    counts_[i] += other.counts_[i];
  }
  evaluated_ += other.evaluated_;
  ignored_ += other.ignored_;
}

EvalReport finalize(const ConfusionMatrix & cm, const Taxonomy & taxonomy)
{
  if (cm.taxonomy_id() != taxonomy.id() || cm.num_classes() != taxonomy.size()) {
    throw Error(
      ErrorCode::kTaxonomyMismatch,
      "matrix for '" + cm.taxonomy_id() + "' finalized with '" + taxonomy.id() + "'");
  }
  if (cm.evaluated() == 0) {
    throw Error(ErrorCode::kEmptyMatrix, "no pixel was evaluated");
  }
  const std::size_t n = cm.num_classes();
  EvalReport report;
  report.taxonomy_id = cm.taxonomy_id();
  report.evaluated_pixels = cm.evaluated();
  report.ignored_pixels = cm.ignored();

  double sum = 0.0;
  std::size_t present = 0;
  for (std::size_t c = 0; c < n; ++c) {
    const std::uint64_t tp = cm.at(c, c);
    std::uint64_t fn = 0;
    for (std::size_t col = 0; col <= n; ++col) {
      if (col != c) {
        fn += cm.at(c, col);
      }
    }
    std::uint64_t fp = 0;
    for (std::size_t row = 0; row < n; ++row) {
      if (row != c) {
        fp += cm.at(row, c);
      }
    }
    ClassIou entry{taxonomy.name(static_cast<ClassId>(c)), std::nullopt};
    const std::uint64_t denom = tp + fp + fn;
    if (denom > 0) {
      entry.iou = static_cast<double>(tp) / static_cast<double>(denom);
      sum += *entry.iou;
      ++present;
    }
    report.per_class.push_back(std::move(entry));
  }
  report.miou = sum / static_cast<double>(present);
  return report;
}

std::string eval_report_json(const EvalReport & report)
{
  nlohmann::json doc;
  doc["taxonomy_id"] = report.taxonomy_id;
  doc["miou"] = report.miou;
  doc["evaluated_pixels"] = report.evaluated_pixels;
  doc["ignored_pixels"] = report.ignored_pixels;
  auto & classes = doc["per_class_iou"];
  classes = nlohmann::json::array();
  for (const auto & c : report.per_class) {
    nlohmann::json entry;
    entry["class"] = c.name;
    entry["iou"] = c.iou ? nlohmann::json(*c.iou) : nlohmann::json(nullptr);
    classes.push_back(std::move(entry));
  }
  return doc.dump(2) + "\n";
}

std::string eval_report_text(const EvalReport & report)
{
  std::string out;
  char line[256];
  std::snprintf(line, sizeof(line), "taxonomy: %s\n", report.taxonomy_id.c_str());
  out += line;
  std::snprintf(
    line, sizeof(line), "pixels: %llu evaluated, %llu ignored\n",
    static_cast<unsigned long long>(report.evaluated_pixels),
    static_cast<unsigned long long>(report.ignored_pixels));
  out += line;
  for (const auto & c : report.per_class) {
    if (c.iou) {
      std::snprintf(line, sizeof(line), "  %-32s %8.4f\n", c.name.c_str(), *c.iou * 100.0);
    } else {
      std::snprintf(line, sizeof(line), "  %-32s %8s\n", c.name.c_str(), "-");
    }
    out += line;
  }
  std::snprintf(line, sizeof(line), "mIoU: %.4f\n", report.miou * 100.0);
  out += line;
  return out;
}

}  // namespace maskfuse
