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

#include "maskfuse/taxonomy.hpp"

#include <algorithm>
#include <cctype>

#include "maskfuse/error.hpp"

namespace maskfuse
{

std::string normalize_name(std::string_view name)
{
  auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  std::size_t b = 0;
  std::size_t e = name.size();
  while (b < e && is_space(static_cast<unsigned char>(name[b]))) {
    ++b;
  }
  while (e > b && is_space(static_cast<unsigned char>(name[e - 1]))) {
    --e;
  }
  std::string out(name.substr(b, e - b));
  for (auto & c : out) {
    if (static_cast<unsigned char>(c) < 0x80) {
      c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
  }
  return out;
}

Taxonomy::Taxonomy(std::string taxonomy_id, std::vector<std::string> class_names)
: id_(std::move(taxonomy_id)), names_(std::move(class_names))
{
  if (id_.empty()) {
    throw Error(ErrorCode::kInvalidTaxonomy, "taxonomy id must not be empty");
  }
  if (names_.empty() || names_.size() > kMaxClasses) {
    throw Error(
      ErrorCode::kInvalidTaxonomy, "taxonomy '" + id_ + "' has " + std::to_string(names_.size()) +
                                     " classes; expected 1.." + std::to_string(kMaxClasses));
  }
  for (std::size_t i = 0; i < names_.size(); ++i) {
    auto key = normalize_name(names_[i]);
    if (key.empty()) {
      throw Error(
        ErrorCode::kInvalidTaxonomy,
        "taxonomy '" + id_ + "' class " + std::to_string(i) + " has an empty name");
    }
    if (key == "unidentified") {
      throw Error(
        ErrorCode::kInvalidTaxonomy,
        "taxonomy '" + id_ + "' uses the reserved name 'unidentified'");
    }
    if (!index_.emplace(key, static_cast<ClassId>(i)).second) {
      throw Error(
        ErrorCode::kInvalidTaxonomy, "taxonomy '" + id_ + "' repeats class name '" + key + "'");
    }
  }
}

const std::string & Taxonomy::name(ClassId id) const
{
  if (id >= names_.size()) {
    throw Error(
      ErrorCode::kInvalidLabel,
      "class id " + std::to_string(id) + " not in taxonomy '" + id_ + "'");
  }
  return names_[id];
}

std::optional<ClassId> Taxonomy::find(std::string_view name) const
{
  auto it = index_.find(normalize_name(name));
  if (it == index_.end()) {
    return std::nullopt;
  }
  return it->second;
}

void SemanticMap::validate(const Taxonomy & taxonomy) const
{
  if (taxonomy_id_ != taxonomy.id()) {
    throw Error(
      ErrorCode::kTaxonomyMismatch,
      "map in taxonomy '" + taxonomy_id_ + "' checked against '" + taxonomy.id() + "'");
  }
  const auto n = taxonomy.size();
  const auto data = labels_.data();
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data[i] != kVoidId && data[i] >= n) {
      throw Error(
        ErrorCode::kInvalidLabel, "pixel " + std::to_string(i) + " has class id " +
                                    std::to_string(data[i]) + " outside taxonomy '" +
                                    taxonomy.id() + "'");
    }
  }
}

std::optional<ClosedSetVote> try_majority_vote(
  const BinaryMask & mask, const SemanticMap & map, const Taxonomy & taxonomy)
{
  if (mask.width() != map.width() || mask.height() != map.height()) {
    throw Error(
      ErrorCode::kDimensionMismatch, "mask '" + mask.mask_id() + "' is " +
                                       std::to_string(mask.width()) + "x" +
                                       std::to_string(mask.height()) + ", map is " +
                                       std::to_string(map.width()) + "x" +
                                       std::to_string(map.height()));
  }
  const std::size_t classes = taxonomy.size();
  std::vector<std::uint64_t> histogram(classes, 0);
  const auto labels = map.labels().data();
  const std::uint32_t w = map.width();
  const std::uint32_t h = map.height();
  bool bad_label = false;

  mask.for_each_foreground_run([&](std::uint64_t start, std::uint64_t len) {
    auto x = static_cast<std::uint32_t>(start / h);
    auto y = static_cast<std::uint32_t>(start % h);
    for (std::uint64_t k = 0; k < len; ++k) {
      const ClassId id = labels[static_cast<std::size_t>(y) * w + x];
      if (id < classes) {
        ++histogram[id];
      } else if (id != kVoidId) {
        bad_label = true;
      }
      if (++y == h) {
        y = 0;
        ++x;
      }
    }
  });
  if (bad_label) {
    throw Error(
      ErrorCode::kInvalidLabel,
      "map holds class ids outside taxonomy '" + taxonomy.id() + "'");
  }

  std::uint64_t total = 0;
  std::size_t best = 0;
  for (std::size_t c = 0; c < classes; ++c) {
    total += histogram[c];
    if (histogram[c] > histogram[best]) {
      best = c;
    }
  }
  if (total == 0) {
    return std::nullopt;
  }
  const auto id = static_cast<ClassId>(best);
  return ClosedSetVote{
    id, taxonomy.name(id),
    static_cast<double>(histogram[best]) / static_cast<double>(total), taxonomy.id()};
}

ClosedSetVote majority_vote(
  const BinaryMask & mask, const SemanticMap & map, const Taxonomy & taxonomy)
{
  auto vote = try_majority_vote(mask, map, taxonomy);
  if (!vote) {
    throw Error(
      ErrorCode::kAllVoid, "mask '" + mask.mask_id() + "' covers only void pixels in map '" +
                             map.taxonomy_id() + "'");
  }
  return *std::move(vote);
}

std::vector<std::vector<ClosedSetVote>> vote_all(
  const MaskSet & masks, std::span<const ClosedSetSource> sources)
{
  for (const auto & src : sources) {
    if (src.map->width() != masks.width() || src.map->height() != masks.height()) {
      throw Error(
        ErrorCode::kDimensionMismatch, "map '" + src.map->taxonomy_id() + "' does not match image '" +
                                         masks.image_id() + "'");
    }
  }
  std::vector<std::vector<ClosedSetVote>> votes(masks.size());
  for (std::size_t i = 0; i < masks.size(); ++i) {
    votes[i].reserve(sources.size());
    for (const auto & src : sources) {
      if (auto vote = try_majority_vote(masks.masks()[i], *src.map, *src.taxonomy)) {
        votes[i].push_back(*std::move(vote));
      }
    }
  }
  return votes;
}

}  // namespace maskfuse
