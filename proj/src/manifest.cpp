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

#include <chrono>
#include <set>

#include "json.hpp"

#include "maskfuse/error.hpp"
#include "maskfuse/io.hpp"

namespace maskfuse
{

namespace
{

using nlohmann::json;

// Tracks the JSON path of the value being read so every error names it.
class Reader
{
public:
  Reader(std::string file, std::filesystem::path base) : file_(std::move(file)), base_(std::move(base)) {}

  [[noreturn]] void fail(ErrorCode code, const std::string & field, const std::string & msg) const
  {
    throw Error(code, file_ + ": " + field + ": " + msg);
  }

  const json & member(const json & obj, const std::string & field, const std::string & key) const
  {
    if (!obj.is_object()) {
      fail(ErrorCode::kSchemaError, field, "expected an object");
    }
    auto it = obj.find(key);
    if (it == obj.end()) {
      fail(ErrorCode::kSchemaError, join(field, key), "missing required field");
    }
    return *it;
  }

  const json * optional_member(const json & obj, const std::string & key) const
  {
    auto it = obj.find(key);
    return it == obj.end() || it->is_null() ? nullptr : &*it;
  }

  std::string string(const json & v, const std::string & field) const
  {
    if (!v.is_string()) {
      fail(ErrorCode::kSchemaError, field, "expected a string");
    }
    return v.get<std::string>();
  }

  std::uint64_t unsigned_int(const json & v, const std::string & field) const
  {
    if (!v.is_number_unsigned()) {
      fail(ErrorCode::kSchemaError, field, "expected a non-negative integer");
    }
    return v.get<std::uint64_t>();
  }

  std::uint32_t dimension(const json & v, const std::string & field) const
  {
    const auto d = unsigned_int(v, field);
    if (d == 0 || d > 0xFFFFFFFFu) {
      fail(ErrorCode::kSchemaError, field, "dimension out of range");
    }
    return static_cast<std::uint32_t>(d);
  }

  double number(const json & v, const std::string & field) const
  {
    if (!v.is_number()) {
      fail(ErrorCode::kSchemaError, field, "expected a number");
    }
    return v.get<double>();
  }

  const json & array(const json & v, const std::string & field) const
  {
    if (!v.is_array()) {
      fail(ErrorCode::kSchemaError, field, "expected an array");
    }
    return v;
  }

  std::filesystem::path file_ref(const json & v, const std::string & field) const
  {
    std::filesystem::path p = string(v, field);
    if (p.is_relative()) {
      p = base_ / p;
    }
    if (!std::filesystem::is_regular_file(p)) {
      fail(ErrorCode::kDanglingReference, field, "referenced file '" + p.string() + "' not found");
    }
    return p;
  }

  void check_keys(const json & obj, const std::string & field, std::initializer_list<const char *> known,
    std::vector<std::string> & warnings) const
  {
    for (const auto & [key, _] : obj.items()) {
      bool ok = false;
      for (const char * k : known) {
        ok = ok || key == k;
      }
      if (!ok) {
        warnings.push_back(file_ + ": " + join(field, key) + ": unknown field ignored");
      }
    }
  }

  static std::string join(const std::string & field, const std::string & key)
  {
    return field.empty() ? key : field + "." + key;
  }

  static std::string index(const std::string & field, std::size_t i)
  {
    return field + "[" + std::to_string(i) + "]";
  }

  // Runs fn and prefixes any engine error with the field it concerns.
  template <typename Fn>
  auto at(const std::string & field, Fn && fn) const -> decltype(fn())
  {
    try {
      return fn();
    } catch (const Error & e) {
      rethrow_with_context(e, file_ + ": " + field);
    }
  }

private:
  std::string file_;
  std::filesystem::path base_;
};

ImageInputs load_image(
  const Reader & rd, const json & entry, const std::string & field, const Manifest & manifest,
  std::vector<std::string> & warnings)
{
  rd.check_keys(
    entry, field,
    {"image_id", "width", "height", "masks", "captions", "semantic_maps", "embeddings",
     "ground_truth", "provenance"},
    warnings);
  const auto image_id = rd.string(rd.member(entry, field, "image_id"), field + ".image_id");
  const auto width = rd.dimension(rd.member(entry, field, "width"), field + ".width");
  const auto height = rd.dimension(rd.member(entry, field, "height"), field + ".height");

  std::vector<BinaryMask> masks;
  const auto masks_field = field + ".masks";
  const auto & mask_list = rd.array(rd.member(entry, field, "masks"), masks_field);
  for (std::size_t i = 0; i < mask_list.size(); ++i) {
    const auto mf = Reader::index(masks_field, i);
    const auto & m = mask_list[i];
    rd.check_keys(m, mf, {"mask_id", "counts", "confidence"}, warnings);
    auto mask_id = rd.string(rd.member(m, mf, "mask_id"), mf + ".mask_id");
    RunCounts counts;
    const auto & cl = rd.array(rd.member(m, mf, "counts"), mf + ".counts");
    counts.reserve(cl.size());
    for (std::size_t k = 0; k < cl.size(); ++k) {
      const auto c = rd.unsigned_int(cl[k], Reader::index(mf + ".counts", k));
      if (c > 0xFFFFFFFFu) {
        rd.fail(ErrorCode::kCorruptRle, Reader::index(mf + ".counts", k), "run too long");
      }
      counts.push_back(static_cast<std::uint32_t>(c));
    }
    const double confidence = rd.number(rd.member(m, mf, "confidence"), mf + ".confidence");
    masks.push_back(rd.at(mf, [&] {
      return BinaryMask(std::move(mask_id), width, height, std::move(counts), confidence);
    }));
  }
  ImageInputs image{
    rd.at(masks_field, [&] { return MaskSet(image_id, width, height, std::move(masks)); }),
    {}, {}, std::nullopt, std::nullopt, 0.0};

  std::set<std::string> mask_ids;
  for (const auto & m : image.masks.masks()) {
    mask_ids.insert(m.mask_id());
  }
  if (const auto * caps = rd.optional_member(entry, "captions")) {
    const auto cf = field + ".captions";
    rd.array(*caps, cf);
    for (std::size_t i = 0; i < caps->size(); ++i) {
      const auto f = Reader::index(cf, i);
      const auto & c = (*caps)[i];
      rd.check_keys(c, f, {"mask_id", "text"}, warnings);
      auto mask_id = rd.string(rd.member(c, f, "mask_id"), f + ".mask_id");
      auto text = rd.string(rd.member(c, f, "text"), f + ".text");
      if (mask_ids.count(mask_id) == 0) {
        rd.fail(ErrorCode::kDanglingReference, f + ".mask_id", "unknown mask_id '" + mask_id + "'");
      }
      if (image.captions.count(mask_id) != 0) {
        rd.fail(ErrorCode::kSchemaError, f + ".mask_id", "second caption for '" + mask_id + "'");
      }
      auto caption = rd.at(f + ".text", [&] { return Caption(mask_id, std::move(text)); });
      image.captions.emplace(mask_id, std::move(caption));
    }
  }

  if (const auto * maps = rd.optional_member(entry, "semantic_maps")) {
    const auto mf = field + ".semantic_maps";
    rd.array(*maps, mf);
    for (std::size_t i = 0; i < maps->size(); ++i) {
      const auto f = Reader::index(mf, i);
      const auto & ref = (*maps)[i];
      rd.check_keys(ref, f, {"taxonomy", "path"}, warnings);
      const auto tax_id = rd.string(rd.member(ref, f, "taxonomy"), f + ".taxonomy");
      const auto path = rd.file_ref(rd.member(ref, f, "path"), f + ".path");
      const Taxonomy * tax = nullptr;
      for (const auto & t : manifest.taxonomies) {
        tax = t.id() == tax_id ? &t : tax;
      }
      if (tax == nullptr) {
        rd.fail(ErrorCode::kDanglingReference, f + ".taxonomy", "unknown taxonomy '" + tax_id + "'");
      }
      auto map = rd.at(f + ".path", [&] { return read_label_grid(path, tax_id); });
      if (map.width() != width || map.height() != height) {
        rd.fail(
          ErrorCode::kDimensionMismatch, f + ".path",
          "map is " + std::to_string(map.width()) + "x" + std::to_string(map.height()) +
            ", image is " + std::to_string(width) + "x" + std::to_string(height));
      }
      rd.at(f + ".path", [&] { map.validate(*tax); });
      image.semantic_maps.push_back(std::move(map));
    }
  }

  if (const auto * emb = rd.optional_member(entry, "embeddings")) {
    const auto path = rd.file_ref(*emb, field + ".embeddings");
    image.embeddings = rd.at(field + ".embeddings", [&] { return read_embeddings(path); });
  }

  if (const auto * gt = rd.optional_member(entry, "ground_truth")) {
    const auto f = field + ".ground_truth";
    rd.check_keys(*gt, f, {"taxonomy", "path"}, warnings);
    const auto tax_id = rd.string(rd.member(*gt, f, "taxonomy"), f + ".taxonomy");
    if (tax_id != manifest.output_taxonomy) {
      rd.fail(
        ErrorCode::kTaxonomyMismatch, f + ".taxonomy",
        "ground truth must use the output taxonomy '" + manifest.output_taxonomy + "'");
    }
    const auto path = rd.file_ref(rd.member(*gt, f, "path"), f + ".path");
    auto map = rd.at(f + ".path", [&] { return read_label_grid(path, tax_id); });
    if (map.width() != width || map.height() != height) {
      rd.fail(ErrorCode::kDimensionMismatch, f + ".path", "ground truth size differs from image");
    }
    rd.at(f + ".path", [&] { map.validate(manifest.taxonomy(tax_id)); });
    image.ground_truth = std::move(map);
  }
  return image;
}

}  // namespace

const Caption * ImageInputs::caption_for(const std::string & mask_id) const
{
  auto it = captions.find(mask_id);
  return it == captions.end() ? nullptr : &it->second;
}

const Taxonomy & Manifest::taxonomy(std::string_view id) const
{
  for (const auto & t : taxonomies) {
    if (t.id() == id) {
      return t;
    }
  }
  throw Error(ErrorCode::kDanglingReference, "unknown taxonomy '" + std::string(id) + "'");
}

Manifest load_manifest(const std::filesystem::path & path)
{
  const auto file = path.string();
  Reader rd(file, path.parent_path());

  json doc;
  try {
    doc = json::parse(read_file_text(path));
  } catch (const json::parse_error & e) {
    throw Error(ErrorCode::kSchemaError, file + ": " + e.what());
  }

  Manifest manifest;
  manifest.path = path;
  rd.check_keys(
    doc, "", {"schema_version", "taxonomies", "output_taxonomy", "synonyms", "images", "provenance"},
    manifest.warnings);
  const auto version = rd.unsigned_int(rd.member(doc, "", "schema_version"), "schema_version");
  if (version != kManifestSchemaVersion) {
    rd.fail(
      ErrorCode::kSchemaError, "schema_version",
      "unsupported version " + std::to_string(version));
  }

  const auto & taxes = rd.array(rd.member(doc, "", "taxonomies"), "taxonomies");
  for (std::size_t i = 0; i < taxes.size(); ++i) {
    const auto f = Reader::index("taxonomies", i);
    rd.check_keys(taxes[i], f, {"id", "path"}, manifest.warnings);
    auto id = rd.string(rd.member(taxes[i], f, "id"), f + ".id");
    const auto tpath = rd.file_ref(rd.member(taxes[i], f, "path"), f + ".path");
    for (const auto & t : manifest.taxonomies) {
      if (t.id() == id) {
        rd.fail(ErrorCode::kSchemaError, f + ".id", "duplicate taxonomy '" + id + "'");
      }
    }
    manifest.taxonomies.push_back(rd.at(f, [&] { return read_taxonomy_file(id, tpath); }));
  }

  manifest.output_taxonomy =
    rd.string(rd.member(doc, "", "output_taxonomy"), "output_taxonomy");
  rd.at("output_taxonomy", [&] { (void)manifest.taxonomy(manifest.output_taxonomy); });

  if (const auto * syn = rd.optional_member(doc, "synonyms")) {
    const auto spath = rd.file_ref(*syn, "synonyms");
    manifest.synonyms = rd.at("synonyms", [&] { return read_synonym_file(spath); });
  }

  const auto & images = rd.array(rd.member(doc, "", "images"), "images");
  std::set<std::string> image_ids;
  for (std::size_t i = 0; i < images.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    const auto f = Reader::index("images", i);
    auto image = load_image(rd, images[i], f, manifest, manifest.warnings);
    if (!image_ids.insert(image.masks.image_id()).second) {
      rd.fail(ErrorCode::kSchemaError, f + ".image_id", "duplicate image_id");
    }
    image.load_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    manifest.images.push_back(std::move(image));
  }
  return manifest;
}

}  // namespace maskfuse
