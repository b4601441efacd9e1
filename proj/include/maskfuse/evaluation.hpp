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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "maskfuse/taxonomy.hpp"

namespace maskfuse
{

/// Rows are ground-truth classes, columns predicted classes plus one trailing
/// column for void predictions. Pixels whose ground truth is void are counted
/// as ignored and never enter the matrix.
class ConfusionMatrix
{
public:
  explicit ConfusionMatrix(const Taxonomy & taxonomy);

  const std::string & taxonomy_id() const noexcept { return taxonomy_id_; }
  std::size_t num_classes() const noexcept { return classes_; }

  /// Column index of void predictions.
  std::size_t void_column() const noexcept { return classes_; }
  std::uint64_t at(std::size_t gt, std::size_t pred) const
  {
    return counts_[gt * (classes_ + 1) + pred];
  }

  std::uint64_t evaluated() const noexcept { return evaluated_; }
  std::uint64_t ignored() const noexcept { return ignored_; }

  /// Adds one image pair. Throws DimensionMismatch or TaxonomyMismatch, and
  /// InvalidLabel for ids outside the taxonomy.
  void accumulate(const SemanticMap & gt, const SemanticMap & pred);

  /// Elementwise sum; both matrices must share a taxonomy.
  void merge(const ConfusionMatrix & other);

  bool operator==(const ConfusionMatrix &) const = default;

private:
  std::string taxonomy_id_;
  std::size_t classes_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t evaluated_ = 0;
  std::uint64_t ignored_ = 0;
};

struct ClassIou
{
  std::string name;
  /// Absent when the class occurs in neither ground truth nor prediction.
  std::optional<double> iou;
};

struct EvalReport
{
  std::string taxonomy_id;
  std::vector<ClassIou> per_class;
  double miou = 0.0;
  std::uint64_t evaluated_pixels = 0;
  std::uint64_t ignored_pixels = 0;
};

/// IoU_c = TP / (TP + FP + FN); mIoU is the unweighted mean over classes that
/// occur. Void predictions count as false negatives. Throws EmptyMatrix when
/// no pixel was evaluated.
EvalReport finalize(const ConfusionMatrix & cm, const Taxonomy & taxonomy);

/// Key-sorted JSON document; doubles are written at round-trip precision.
std::string eval_report_json(const EvalReport & report);

/// Fixed-width human table, classes in id order.
std::string eval_report_text(const EvalReport & report);

}  // namespace maskfuse
