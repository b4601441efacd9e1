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
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "maskfuse/fusion.hpp"
#include "maskfuse/masks.hpp"
#include "maskfuse/openvocab.hpp"
#include "maskfuse/taxonomy.hpp"

namespace maskfuse
{

using Bytes = std::vector<std::uint8_t>;

Bytes read_file_bytes(const std::filesystem::path & path);
std::string read_file_text(const std::filesystem::path & path);
void write_file_bytes(const std::filesystem::path & path, std::span<const std::uint8_t> bytes);
void write_file_text(const std::filesystem::path & path, std::string_view text);

// Label grid file ("SFSL"):
//   magic "SFSL" | u8 version | u32le width | u32le height |
//   width*height u16le class ids, row-major.
inline constexpr std::uint8_t kLabelGridVersion = 1;
inline constexpr std::size_t kLabelGridHeaderSize = 13;

Bytes encode_label_grid(const SemanticMap & map);
/// Throws SchemaError on bad magic, version, or length.
SemanticMap decode_label_grid(std::span<const std::uint8_t> bytes, std::string taxonomy_id);
void write_label_grid(const SemanticMap & map, const std::filesystem::path & path);
SemanticMap read_label_grid(const std::filesystem::path & path, std::string taxonomy_id);

// Embedding file ("SFSE"):
//   magic "SFSE" | u8 version | u32le dim | u32le count |
//   count x (u16le name length | UTF-8 name | dim f32le).
inline constexpr std::uint8_t kEmbeddingVersion = 1;
inline constexpr std::size_t kEmbeddingHeaderSize = 13;

struct EmbeddingRecord
{
  std::string name;
  std::vector<float> values;
};

Bytes encode_embeddings(std::size_t dim, std::span<const EmbeddingRecord> records);
/// Vectors are normalized on load. Throws SchemaError naming the entry
/// index on truncation, duplicate names, or zero vectors.
EmbeddingTable decode_embeddings(std::span<const std::uint8_t> bytes);
EmbeddingTable read_embeddings(const std::filesystem::path & path);

/// One class name per line; line index is the class id.
Taxonomy parse_taxonomy(std::string taxonomy_id, std::string_view text);
Taxonomy read_taxonomy_file(std::string taxonomy_id, const std::filesystem::path & path);
std::string format_taxonomy(const Taxonomy & taxonomy);

StopwordLexicon read_stopword_file(const std::filesystem::path & path);
SynonymMap read_synonym_file(const std::filesystem::path & path);

/// Everything the pipeline needs for one image.
struct ImageInputs
{
  MaskSet masks;
  /// mask_id -> caption
  std::map<std::string, Caption> captions;
  std::vector<SemanticMap> semantic_maps;
  std::optional<EmbeddingTable> embeddings;
  std::optional<SemanticMap> ground_truth;
  /// Wall-clock seconds spent reading and validating this image's entry.
  double load_seconds = 0.0;

  const Caption * caption_for(const std::string & mask_id) const;
};

inline constexpr int kManifestSchemaVersion = 1;

struct Manifest
{
  std::filesystem::path path;
  std::vector<Taxonomy> taxonomies;
  std::string output_taxonomy;
  SynonymMap synonyms;
  std::vector<ImageInputs> images;
  /// Non-fatal findings, such as unknown keys.
  std::vector<std::string> warnings;

  const Taxonomy & taxonomy(std::string_view id) const;
};

/// Parses and validates a manifest and every file it references. Relative
/// paths resolve against the manifest's directory. Errors carry the file and
/// field that failed (SchemaError, CorruptRle, DanglingReference, ...).
Manifest load_manifest(const std::filesystem::path & path);

/// Parameters of a synthetic scene: rectangular, non-overlapping regions with
/// known labels, plus optional noise.
struct SceneSpec
{
  std::uint32_t width = 256;
  std::uint32_t height = 256;
  std::size_t num_images = 1;
  std::size_t num_regions = 16;
  std::size_t num_distractors = 0;
  std::size_t num_classes = 12;
  std::size_t num_maps = 2;
  std::size_t embedding_dim = 32;
  /// Per-pixel probability that a closed-set map reports a wrong class.
  double closed_corruption_rate = 0.0;
  /// Per-mask probability that the caption names a wrong class.
  double wrong_caption_rate = 0.0;
  /// cosine(region, any other label) < 1 - similarity_gap.
  double similarity_gap = 0.2;

  void validate() const;
};

/// Writes manifest.json and its referenced files into `out_dir` and returns
/// the manifest path. Output is a pure function of (seed, spec). Throws
/// SpecError when the regions cannot be packed.
std::filesystem::path generate_synthetic_scene(std::uint64_t seed, const SceneSpec & spec,
  const std::filesystem::path & out_dir);

/// Class names used by the generator, in id order.
std::vector<std::string> synthetic_class_names(std::size_t count);

}  // namespace maskfuse
