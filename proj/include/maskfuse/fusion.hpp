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
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "maskfuse/masks.hpp"
#include "maskfuse/openvocab.hpp"
#include "maskfuse/taxonomy.hpp"

namespace maskfuse
{

inline constexpr std::string_view kUnidentified = "unidentified";

enum class LabelSource { kClosed, kOpen, kUnidentified };

std::string_view to_string(LabelSource source) noexcept;

struct FusedLabel
{
  std::string mask_id;
  /// "unidentified" iff source == kUnidentified.
  std::string label_text;
  LabelSource source;
  /// Vote fraction for closed labels, (cos + 1) / 2 for open labels, 0 for
  /// unidentified.
  double confidence;
  /// 1-based row of the decision table that produced this label.
  int rule;

  bool operator==(const FusedLabel &) const = default;
};

/// Thresholds of the fusion decision table. The defaults are engine choices
/// and have not been calibrated against any benchmark.
struct FusionConfig
{
  /// Minimum vote fraction for a closed-set label to be trusted.
  double tau_closed = 0.5;
  /// Minimum cosine for an open-vocabulary label to be assigned.
  double tau_open = 0.25;
  /// How far the top candidate may lead the closed label's own cosine before
  /// the closed label counts as contradicted.
  double delta_margin = 0.05;
  bool open_branch_enabled = true;

  /// Throws InvalidArgument when a threshold is out of range.
  void validate() const;
};

/// Per-mask decision. `votes` come from the closed-set maps (in map order),
/// `candidates` from rank_candidates (descending similarity), and
/// `taxonomies` decide whether a candidate lies outside the closed label
/// space. Rules, first match wins:
///   1. no votes and no candidates          -> unidentified
///   2. open branch disabled                -> best vote, else unidentified
///   3. confident vote, not contradicted    -> closed
///   4. top candidate outside every taxonomy
///      with similarity >= tau_open         -> open
///   5. confident vote                      -> closed
///   6. top candidate >= tau_open           -> open
///   7. any vote                            -> closed
///   8.                                     -> unidentified
/// The best vote is the most confident one; ties keep the earlier map.
FusedLabel fuse_mask(std::string_view mask_id, std::span<const ClosedSetVote> votes,
  std::span<const CandidateLabel> candidates, std::span<const Taxonomy> taxonomies,
  const FusionConfig & config);

/// alias -> canonical class name, both normalized.
class SynonymMap
{
public:
  SynonymMap() = default;

  /// Lines of the form "alias = canonical"; blank lines and `#` comments are
  /// skipped. Throws SchemaError naming the offending line.
  static SynonymMap parse(std::string_view text);

  void add(std::string_view alias, std::string_view canonical);
  const std::string * find(std::string_view alias) const;
  std::size_t size() const noexcept { return entries_.size(); }

private:
  std::unordered_map<std::string, std::string> entries_;
};

struct RenderResult
{
  SemanticMap map;
  /// Labels that were neither unidentified nor resolvable to a class.
  std::size_t unresolved = 0;
};

/// Paints labeled masks onto an all-void grid, largest first so that finer
/// masks overwrite coarser ones (equal areas keep mask order). Labels resolve
/// by exact normalized name, then through `synonyms`. `labels[i]` must
/// belong to `masks.masks()[i]`.
RenderResult render_semantic_map(std::span<const FusedLabel> labels, const MaskSet & masks,
  const Taxonomy & output_taxonomy, const SynonymMap & synonyms);

}  // namespace maskfuse
