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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace maskfuse
{

struct Caption
{
  Caption(std::string mask_id, std::string text);

  std::string mask_id;
  std::string text;
};

/// Function words dropped before phrase extraction. Parsed from a text file
/// with one lowercase token per line and `#` comments.
class StopwordLexicon
{
public:
  StopwordLexicon() = default;
  explicit StopwordLexicon(std::unordered_set<std::string> words) : words_(std::move(words)) {}

  static StopwordLexicon parse(std::string_view text);
  /// The lexicon shipped in data/stopwords.txt, compiled into the library.
  static const StopwordLexicon & builtin();

  bool contains(std::string_view token) const { return words_.count(std::string(token)) != 0; }
  std::size_t size() const noexcept { return words_.size(); }

private:
  std::unordered_set<std::string> words_;
};

/// Lowercased tokens of `text`, split on whitespace and ASCII punctuation.
/// Bytes >= 0x80 are kept as word characters so UTF-8 survives intact.
std::vector<std::string> tokenize(std::string_view text);

/// Candidate label phrases from a caption: stopwords are removed, each
/// maximal run of surviving tokens becomes a phrase (runs longer than
/// kMaxPhraseTokens are cut into chunks anchored at the run's end, where
/// the head noun sits), and every surviving token is also a candidate on its
/// own. Duplicates keep their first position. Throws EmptyCaption when no
/// token survives.
inline constexpr std::size_t kMaxPhraseTokens = 3;
std::vector<std::string> extract_noun_phrases(const Caption & caption,
  const StopwordLexicon & lexicon = StopwordLexicon::builtin());

/// Named unit vectors; region embeddings and label text embeddings share one
/// table. Vectors are L2-normalized on insertion.
class EmbeddingTable
{
public:
  explicit EmbeddingTable(std::size_t dim);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return names_.size(); }
  const std::vector<std::string> & names() const noexcept { return names_; }

  /// Throws DimensionMismatch, ZeroVector, or InvalidArgument on a duplicate
  /// (normalized) name.
  void add(std::string name, std::span<const double> vector);
  void add(std::string name, std::span<const float> vector);

  std::optional<std::span<const double>> find(std::string_view name) const;
  std::span<const double> row(std::size_t index) const;

private:
  std::size_t dim_;
  std::vector<std::string> names_;
  std::vector<double> values_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Key under which a mask's region embedding is stored.
std::string region_key(std::string_view mask_id);

/// dot(a, b) / (|a| |b|), clamped to [-1, 1].
double cosine(std::span<const double> a, std::span<const double> b);

enum class CandidateOrigin { kCaptionPhrase, kClosedSetName };

struct CandidateLabel
{
  std::string text;
  double similarity;
  CandidateOrigin origin;

  bool operator==(const CandidateLabel &) const = default;
};

enum class MissingEmbeddingPolicy { kLenient, kStrict };

struct RankOptions
{
  std::size_t top_k = 3;
  MissingEmbeddingPolicy missing = MissingEmbeddingPolicy::kLenient;
};

/// Similarities that round to the same multiple of this value rank as ties.
inline constexpr double kSimilarityTieResolution = 0x1p-30;

/// Ranks caption phrases and closed-set names by cosine similarity to the
/// region vector. Returns at most `top_k` labels, most similar first, ties
/// (see kSimilarityTieResolution) in lexicographic order. Texts are compared after normalization; the first
/// occurrence wins. Texts absent from the table are appended to `skipped`
/// in lenient mode and raise MissingTextEmbedding in strict mode.
std::vector<CandidateLabel> rank_candidates(std::span<const double> region,
  std::span<const std::string> phrases, std::span<const std::string> closed_names,
  const EmbeddingTable & table, const RankOptions & options,
  std::vector<std::string> * skipped = nullptr);

/// Looks up `key` in the table first; throws MissingRegionEmbedding if absent.
std::vector<CandidateLabel> rank_candidates(std::string_view key,
  std::span<const std::string> phrases, std::span<const std::string> closed_names,
  const EmbeddingTable & table, const RankOptions & options,
  std::vector<std::string> * skipped = nullptr);

}  // namespace maskfuse
