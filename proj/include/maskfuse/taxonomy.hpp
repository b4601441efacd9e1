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
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "maskfuse/grid.hpp"
#include "maskfuse/masks.hpp"

namespace maskfuse
{

using ClassId = std::uint16_t;

/// Reserved ignore label, excluded from voting and evaluation.
inline constexpr ClassId kVoidId = 255;
inline constexpr std::size_t kMaxClasses = 255;

/// Lowercase (ASCII) and trim surrounding whitespace. Used for every name
/// comparison in the engine.
std::string normalize_name(std::string_view name);

class Taxonomy
{
public:
  Taxonomy(std::string taxonomy_id, std::vector<std::string> class_names);

  const std::string & id() const noexcept { return id_; }
  const std::vector<std::string> & class_names() const noexcept { return names_; }
  std::size_t size() const noexcept { return names_.size(); }
  const std::string & name(ClassId id) const;

  /// Exact match after normalization.
  std::optional<ClassId> find(std::string_view name) const;
  bool contains(std::string_view name) const { return find(name).has_value(); }

private:
  std::string id_;
  std::vector<std::string> names_;
  std::unordered_map<std::string, ClassId> index_;
};

/// Dense per-pixel class ids in the label space of one taxonomy.
class SemanticMap
{
public:
  SemanticMap() = default;
  SemanticMap(std::string taxonomy_id, Grid<ClassId> labels)
  : taxonomy_id_(std::move(taxonomy_id)), labels_(std::move(labels))
  {
  }

  const std::string & taxonomy_id() const noexcept { return taxonomy_id_; }
  std::uint32_t width() const noexcept { return labels_.width(); }
  std::uint32_t height() const noexcept { return labels_.height(); }
  const Grid<ClassId> & labels() const noexcept { return labels_; }
  Grid<ClassId> & labels() noexcept { return labels_; }

  /// Throws TaxonomyMismatch or InvalidLabel when the map does not belong to
  /// `taxonomy`.
  void validate(const Taxonomy & taxonomy) const;

  bool operator==(const SemanticMap &) const = default;

private:
  std::string taxonomy_id_;
  Grid<ClassId> labels_;
};

struct ClosedSetVote
{
  ClassId label_id;
  std::string label_text;
  /// Winning-vote fraction over the mask's non-void pixels; always > 0.
  double confidence;
  std::string source_taxonomy;

  bool operator==(const ClosedSetVote &) const = default;
};

/// A semantic map paired with the taxonomy its ids refer to.
struct ClosedSetSource
{
  const SemanticMap * map;
  const Taxonomy * taxonomy;
};

/// Most frequent non-void class under the mask's foreground; ties go to the
/// smaller class id. Throws DimensionMismatch, or AllVoid when every covered
/// pixel is void.
ClosedSetVote majority_vote(const BinaryMask & mask, const SemanticMap & map,
  const Taxonomy & taxonomy);

/// Same as majority_vote, but returns nullopt instead of throwing AllVoid.
std::optional<ClosedSetVote> try_majority_vote(const BinaryMask & mask, const SemanticMap & map,
  const Taxonomy & taxonomy);

/// One vote per (mask, source), in source order; AllVoid votes are omitted.
std::vector<std::vector<ClosedSetVote>> vote_all(const MaskSet & masks,
  std::span<const ClosedSetSource> sources);

}  // namespace maskfuse
