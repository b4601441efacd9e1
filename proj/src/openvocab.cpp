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

#include "maskfuse/openvocab.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "maskfuse/error.hpp"
#include "maskfuse/taxonomy.hpp"
#include "stopwords_data.hpp"

namespace maskfuse
{

Caption::Caption(std::string mask_id_, std::string text_)
: mask_id(std::move(mask_id_)), text(std::move(text_))
{
  if (normalize_name(text).empty()) {
    throw Error(ErrorCode::kEmptyCaption, "caption for mask '" + mask_id + "' is blank");
  }
}

StopwordLexicon StopwordLexicon::parse(std::string_view text)
{
  std::unordered_set<std::string> words;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) {
      end = text.size();
    }
    auto line = text.substr(pos, end - pos);
    if (auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    if (auto word = normalize_name(line); !word.empty()) {
      words.insert(std::move(word));
    }
    pos = end + 1;
  }
  return StopwordLexicon(std::move(words));
}

const StopwordLexicon & StopwordLexicon::builtin()
{
  static const StopwordLexicon lexicon = parse(detail::kBuiltinStopwords);
  return lexicon;
}

std::vector<std::string> tokenize(std::string_view text)
{
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (c >= 0x80 || std::isalnum(c)) {
      current.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : ch);
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) {
    tokens.push_back(std::move(current));
  }
  return tokens;
}

std::vector<std::string> extract_noun_phrases(
  const Caption & caption, const StopwordLexicon & lexicon)
{
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  auto emit = [&](std::string phrase) {
    if (seen.insert(phrase).second) {
      out.push_back(std::move(phrase));
    }
  };
  auto emit_run = [&](std::span<const std::string> run) {
    // Chunks are anchored at the end of the run; the first chunk takes the
    // remainder.
    std::size_t first = run.size() % kMaxPhraseTokens;
    if (first == 0) {
      first = std::min(kMaxPhraseTokens, run.size());
    }
    std::size_t begin = 0;
    std::size_t len = first;
    while (begin < run.size()) {
      std::string phrase;
      for (std::size_t i = begin; i < begin + len; ++i) {
        if (!phrase.empty()) {
          phrase.push_back(' ');
        }
        phrase += run[i];
      }
      emit(std::move(phrase));
      for (std::size_t i = begin; i < begin + len; ++i) {
        emit(run[i]);
      }
      begin += len;
      len = kMaxPhraseTokens;
    }
  };

  std::vector<std::string> run;
  for (auto & token : tokenize(caption.text)) {
    if (lexicon.contains(token)) {
      if (!run.empty()) {
        emit_run(run);
        run.clear();
      }
    } else {
      run.push_back(std::move(token));
    }
  }
  if (!run.empty()) {
    emit_run(run);
  }
  if (out.empty()) {
    throw Error(
      ErrorCode::kEmptyCaption,
      "caption for mask '" + caption.mask_id + "' has no content words: \"" + caption.text + "\"");
  }
  return out;
}

EmbeddingTable::EmbeddingTable(std::size_t dim) : dim_(dim)
{
  if (dim_ == 0) {
    throw Error(ErrorCode::kInvalidArgument, "embedding dimension must be positive");
  }
}

void EmbeddingTable::add(std::string name, std::span<const double> vector)
{
  if (vector.size() != dim_) {
    throw Error(
      ErrorCode::kDimensionMismatch, "embedding '" + name + "' has " +
                                       std::to_string(vector.size()) + " components, table has " +
                                       std::to_string(dim_));
  }
  double sq = 0.0;
  for (double v : vector) {
    sq += v * v;
  }
  const double norm = std::sqrt(sq);
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw Error(ErrorCode::kZeroVector, "embedding '" + name + "' cannot be normalized");
  }
  auto key = normalize_name(name);
  if (index_.count(key) != 0) {
    throw Error(ErrorCode::kInvalidArgument, "duplicate embedding name '" + key + "'");
  }
  index_.emplace(std::move(key), names_.size());
  names_.push_back(std::move(name));
  for (double v : vector) {
    values_.push_back(v / norm);
  }
}

void EmbeddingTable::add(std::string name, std::span<const float> vector)
{
  std::vector<double> widened(vector.begin(), vector.end());
  add(std::move(name), std::span<const double>(widened));
}

std::optional<std::span<const double>> EmbeddingTable::find(std::string_view name) const
{
  auto it = index_.find(normalize_name(name));
  if (it == index_.end()) {
    return std::nullopt;
  }
  return row(it->second);
}

std::span<const double> EmbeddingTable::row(std::size_t index) const
{
  return std::span<const double>(values_).subspan(index * dim_, dim_);
}

std::string region_key(std::string_view mask_id) { return "region/" + std::string(mask_id); }

double cosine(std::span<const double> a, std::span<const double> b)
{
  if (a.size() != b.size()) {
    throw Error(
      ErrorCode::kDimensionMismatch, "cosine of vectors with " + std::to_string(a.size()) +
                                       " and " + std::to_string(b.size()) + " components");
  }
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) {
    throw Error(ErrorCode::kZeroVector, "cosine of a zero vector");
  }
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

std::vector<CandidateLabel> rank_candidates(
  std::span<const double> region, std::span<const std::string> phrases,
  std::span<const std::string> closed_names, const EmbeddingTable & table,
  const RankOptions & options, std::vector<std::string> * skipped)
{
  if (options.top_k == 0) {
    throw Error(ErrorCode::kInvalidArgument, "top_k must be at least 1");
  }
  // Ordering uses the similarity rounded to kSimilarityTieResolution, so
  // rounding noise (e.g. from rescaling the region vector) cannot reorder
  // near-identical vectors; those fall back to the text order.
  struct Ranked
  {
    CandidateLabel label;
    long long bucket;
  };
  std::vector<Ranked> ranked;
  std::unordered_set<std::string> seen;
  auto consider = [&](const std::string & raw, CandidateOrigin origin) {
    auto text = normalize_name(raw);
    // "unidentified" is the fusion fallback label and never a real candidate.
    if (text.empty() || text == "unidentified" || !seen.insert(text).second) {
      return;
    }
    auto vec = table.find(text);
    if (!vec) {
      if (options.missing == MissingEmbeddingPolicy::kStrict) {
        throw Error(ErrorCode::kMissingTextEmbedding, "no text embedding for '" + text + "'");
      }
      if (skipped != nullptr) {
        skipped->push_back(text);
      }
      return;
    }
    const double sim = cosine(region, *vec);
    ranked.push_back({{std::move(text), sim, origin}, std::llround(sim / kSimilarityTieResolution)});
  };
  for (const auto & p : phrases) {
    consider(p, CandidateOrigin::kCaptionPhrase);
  }
  for (const auto & n : closed_names) {
    consider(n, CandidateOrigin::kClosedSetName);
  }

  const auto keep = std::min(options.top_k, ranked.size());
  std::partial_sort(
    ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(keep), ranked.end(),
    [](const Ranked & l, const Ranked & r) {
      if (l.bucket != r.bucket) {
        return l.bucket > r.bucket;
      }
      return l.label.text < r.label.text;
    });
  std::vector<CandidateLabel> out;
  out.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) {
    out.push_back(std::move(ranked[i].label));
  }
  return out;
}

std::vector<CandidateLabel> rank_candidates(
  std::string_view key, std::span<const std::string> phrases,
  std::span<const std::string> closed_names, const EmbeddingTable & table,
  const RankOptions & options, std::vector<std::string> * skipped)
{
  auto region = table.find(key);
  if (!region) {
    throw Error(
      ErrorCode::kMissingRegionEmbedding, "no region embedding for '" + std::string(key) + "'");
  }
  return rank_candidates(*region, phrases, closed_names, table, options, skipped);
}

}  // namespace maskfuse
