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

#include "maskfuse/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include "maskfuse/error.hpp"

namespace maskfuse
{

std::string_view to_string(LabelSource source) noexcept
{
  switch (source) {
    case LabelSource::kClosed: return "closed";
    case LabelSource::kOpen: return "open";
    case LabelSource::kUnidentified: return "unidentified";
  }
  return "unknown";
}

void FusionConfig::validate() const
{
  auto in = [](double v, double lo, double hi) { return v >= lo && v <= hi; };
  if (!in(tau_closed, 0.0, 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "tau_closed must lie in [0, 1]");
  }
  if (!in(tau_open, -1.0, 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "tau_open must lie in [-1, 1]");
  }
  if (!(delta_margin >= 0.0) || !std::isfinite(delta_margin)) {
    throw Error(ErrorCode::kInvalidArgument, "delta_margin must be finite and >= 0");
  }
}

namespace
{

FusedLabel closed_label(std::string_view mask_id, const ClosedSetVote & vote, int rule)
{
  return {std::string(mask_id), vote.label_text, LabelSource::kClosed, vote.confidence, rule};
}

FusedLabel open_label(std::string_view mask_id, const CandidateLabel & cand, int rule)
{
  return {
    std::string(mask_id), cand.text, LabelSource::kOpen,
    std::clamp((cand.similarity + 1.0) / 2.0, 0.0, 1.0), rule};
}

FusedLabel unidentified(std::string_view mask_id, int rule)
{
  return {std::string(mask_id), std::string(kUnidentified), LabelSource::kUnidentified, 0.0, rule};
}

}  // namespace

FusedLabel fuse_mask(
  std::string_view mask_id, std::span<const ClosedSetVote> votes,
  std::span<const CandidateLabel> candidates, std::span<const Taxonomy> taxonomies,
  const FusionConfig & config)
{
  const ClosedSetVote * best = nullptr;
  for (const auto & v : votes) {
    if (best == nullptr || v.confidence > best->confidence) {
      best = &v;
    }
  }
  const CandidateLabel * top = candidates.empty() ? nullptr : &candidates.front();

  if (best == nullptr && top == nullptr) {
    return unidentified(mask_id, 1);
  }
  if (!config.open_branch_enabled) {
    return best != nullptr ? closed_label(mask_id, *best, 2) : unidentified(mask_id, 2);
  }

  const bool confident = best != nullptr && best->confidence >= config.tau_closed;
  if (confident) {
    std::optional<double> closed_cos;
    const auto key = normalize_name(best->label_text);
    for (const auto & c : candidates) {
      if (normalize_name(c.text) == key) {
        closed_cos = c.similarity;
        break;
      }
    }
    if (!closed_cos || top->similarity - *closed_cos <= config.delta_margin) {
      return closed_label(mask_id, *best, 3);
    }
  }

  if (top != nullptr && top->similarity >= config.tau_open) {
    const bool outside = std::none_of(
      taxonomies.begin(), taxonomies.end(),
      [&](const Taxonomy & t) { return t.contains(top->text); });
    if (outside) {
      return open_label(mask_id, *top, 4);
    }
  }
  if (confident) {
    return closed_label(mask_id, *best, 5);
  }
  if (top != nullptr && top->similarity >= config.tau_open) {
    return open_label(mask_id, *top, 6);
  }
  if (best != nullptr) {
    return closed_label(mask_id, *best, 7);
  }
  return unidentified(mask_id, 8);
}

SynonymMap SynonymMap::parse(std::string_view text)
{
  SynonymMap map;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    ++line_no;
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) {
      end = text.size();
    }
    auto line = text.substr(pos, end - pos);
    pos = end + 1;
    if (auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    if (normalize_name(line).empty()) {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(
        ErrorCode::kSchemaError, "synonym line " + std::to_string(line_no) + " lacks '='");
    }
    const auto alias = normalize_name(line.substr(0, eq));
    const auto canonical = normalize_name(line.substr(eq + 1));
    if (alias.empty() || canonical.empty()) {
      throw Error(
        ErrorCode::kSchemaError,
        "synonym line " + std::to_string(line_no) + " has an empty side");
    }
    map.add(alias, canonical);
  }
  return map;
}

void SynonymMap::add(std::string_view alias, std::string_view canonical)
{
  entries_.insert_or_assign(normalize_name(alias), normalize_name(canonical));
}

const std::string * SynonymMap::find(std::string_view alias) const
{
  auto it = entries_.find(normalize_name(alias));
  return it == entries_.end() ? nullptr : &it->second;
}

RenderResult render_semantic_map(
  std::span<const FusedLabel> labels, const MaskSet & masks, const Taxonomy & output_taxonomy,
  const SynonymMap & synonyms)
{
  const auto & ms = masks.masks();
  if (labels.size() != ms.size()) {
    throw Error(
      ErrorCode::kInvalidArgument, std::to_string(labels.size()) + " labels for " +
                                     std::to_string(ms.size()) + " masks in image '" +
                                     masks.image_id() + "'");
  }

  RenderResult result;
  std::vector<std::optional<ClassId>> resolved(ms.size());
  for (std::size_t i = 0; i < ms.size(); ++i) {
    if (labels[i].mask_id != ms[i].mask_id()) {
      throw Error(
        ErrorCode::kInvalidArgument,
        "label for '" + labels[i].mask_id + "' paired with mask '" + ms[i].mask_id() + "'");
    }
    if (labels[i].source == LabelSource::kUnidentified) {
      continue;
    }
    auto id = output_taxonomy.find(labels[i].label_text);
    if (!id) {
      if (const auto * canonical = synonyms.find(labels[i].label_text)) {
        id = output_taxonomy.find(*canonical);
      }
    }
    if (!id) {
      ++result.unresolved;
    }
    resolved[i] = id;
  }

  std::vector<std::size_t> order(ms.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
    return ms[l].area() > ms[r].area();
  });

  Grid<ClassId> grid(masks.width(), masks.height(), kVoidId);
  auto pixels = grid.data();
  const std::uint32_t w = masks.width();
  const std::uint32_t h = masks.height();
  for (auto idx : order) {
    if (!resolved[idx]) {
      continue;
    }
    const ClassId id = *resolved[idx];
    ms[idx].for_each_foreground_run([&](std::uint64_t start, std::uint64_t len) {
      auto x = static_cast<std::uint32_t>(start / h);
      auto y = static_cast<std::uint32_t>(start % h);
      for (std::uint64_t k = 0; k < len; ++k) {
        pixels[static_cast<std::size_t>(y) * w + x] = id;
        if (++y == h) {
          y = 0;
          ++x;
        }
      }
    });
  }
  result.map = SemanticMap(output_taxonomy.id(), std::move(grid));
  return result;
}

}  // namespace maskfuse
