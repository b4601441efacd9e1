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

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "maskfuse/error.hpp"
#include "maskfuse/io.hpp"

namespace maskfuse
{

namespace
{

constexpr char kLabelGridMagic[4] = {'S', 'F', 'S', 'L'};
constexpr char kEmbeddingMagic[4] = {'S', 'F', 'S', 'E'};

void put_u16(Bytes & out, std::uint16_t v)
{
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(Bytes & out, std::uint32_t v)
{
  for (int s = 0; s < 32; s += 8) {
    out.push_back(static_cast<std::uint8_t>((v >> s) & 0xFF));
  }
}

std::uint16_t get_u16(std::span<const std::uint8_t> in, std::size_t at)
{
  return static_cast<std::uint16_t>(in[at] | (in[at + 1] << 8));
}

std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t at)
{
  return static_cast<std::uint32_t>(in[at]) | (static_cast<std::uint32_t>(in[at + 1]) << 8) |
         (static_cast<std::uint32_t>(in[at + 2]) << 16) |
         (static_cast<std::uint32_t>(in[at + 3]) << 24);
}

void check_magic(std::span<const std::uint8_t> in, const char (&magic)[4], std::string_view what)
{
  if (std::memcmp(in.data(), magic, 4) != 0) {
    throw Error(
      ErrorCode::kSchemaError,
      std::string(what) + ": bad magic, expected '" + std::string(magic, 4) + "'");
  }
}

}  // namespace

Bytes read_file_bytes(const std::filesystem::path & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIoError, "cannot open '" + path.string() + "'");
  }
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

std::string read_file_text(const std::filesystem::path & path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIoError, "cannot open '" + path.string() + "'");
  }
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file_bytes(const std::filesystem::path & path, std::span<const std::uint8_t> bytes)
{
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::kIoError, "cannot write '" + path.string() + "'");
  }
  out.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw Error(ErrorCode::kIoError, "short write to '" + path.string() + "'");
  }
}

void write_file_text(const std::filesystem::path & path, std::string_view text)
{
  write_file_bytes(
    path, std::span(reinterpret_cast<const std::uint8_t *>(text.data()), text.size()));
}

Bytes encode_label_grid(const SemanticMap & map)
{
  Bytes out;
  out.reserve(kLabelGridHeaderSize + 2 * map.labels().size());
  out.insert(out.end(), std::begin(kLabelGridMagic), std::end(kLabelGridMagic));
  out.push_back(kLabelGridVersion);
  put_u32(out, map.width());
  put_u32(out, map.height());
  for (ClassId id : map.labels().data()) {
    put_u16(out, id);
  }
  return out;
}

SemanticMap decode_label_grid(std::span<const std::uint8_t> bytes, std::string taxonomy_id)
{
  if (bytes.size() < kLabelGridHeaderSize) {
    throw Error(
      ErrorCode::kSchemaError,
      "label grid: " + std::to_string(bytes.size()) + " bytes is shorter than the header");
  }
  check_magic(bytes, kLabelGridMagic, "label grid");
  if (bytes[4] != kLabelGridVersion) {
    throw Error(
      ErrorCode::kSchemaError, "label grid: unsupported version " + std::to_string(bytes[4]));
  }
  const std::uint32_t width = get_u32(bytes, 5);
  const std::uint32_t height = get_u32(bytes, 9);
  if (width == 0 || height == 0) {
    throw Error(ErrorCode::kSchemaError, "label grid: zero dimension");
  }
  const std::uint64_t expected =
    kLabelGridHeaderSize + 2 * static_cast<std::uint64_t>(width) * height;
  if (bytes.size() != expected) {
    throw Error(
      ErrorCode::kSchemaError, "label grid: " + std::to_string(bytes.size()) +
                                 " bytes, expected " + std::to_string(expected) + " for " +
                                 std::to_string(width) + "x" + std::to_string(height));
  }
  Grid<ClassId> grid(width, height);
  auto data = grid.data();
  for (std::size_t i = 0; i < data.size(); ++i) {
    data[i] = get_u16(bytes, kLabelGridHeaderSize + 2 * i);
  }
  return SemanticMap(std::move(taxonomy_id), std::move(grid));
}

void write_label_grid(const SemanticMap & map, const std::filesystem::path & path)
{
  write_file_bytes(path, encode_label_grid(map));
}

SemanticMap read_label_grid(const std::filesystem::path & path, std::string taxonomy_id)
{
  try {
    return decode_label_grid(read_file_bytes(path), std::move(taxonomy_id));
  } catch (const Error & e) {
    rethrow_with_context(e, path.string());
  }
}

Bytes encode_embeddings(std::size_t dim, std::span<const EmbeddingRecord> records)
{
  Bytes out;
  out.insert(out.end(), std::begin(kEmbeddingMagic), std::end(kEmbeddingMagic));
  out.push_back(kEmbeddingVersion);
  put_u32(out, static_cast<std::uint32_t>(dim));
  put_u32(out, static_cast<std::uint32_t>(records.size()));
  for (const auto & r : records) {
    if (r.values.size() != dim) {
      throw Error(
        ErrorCode::kDimensionMismatch, "embedding '" + r.name + "' has " +
                                         std::to_string(r.values.size()) + " values, expected " +
                                         std::to_string(dim));
    }
    if (r.name.size() > 0xFFFF) {
      throw Error(ErrorCode::kInvalidArgument, "embedding name longer than 65535 bytes");
    }
    put_u16(out, static_cast<std::uint16_t>(r.name.size()));
    out.insert(out.end(), r.name.begin(), r.name.end());
    for (float v : r.values) {
      put_u32(out, std::bit_cast<std::uint32_t>(v));
    }
  }
  return out;
}

EmbeddingTable decode_embeddings(std::span<const std::uint8_t> bytes)
{
  if (bytes.size() < kEmbeddingHeaderSize) {
    throw Error(
      ErrorCode::kSchemaError,
      "embeddings: " + std::to_string(bytes.size()) + " bytes is shorter than the header");
  }
  check_magic(bytes, kEmbeddingMagic, "embeddings");
  if (bytes[4] != kEmbeddingVersion) {
    throw Error(
      ErrorCode::kSchemaError, "embeddings: unsupported version " + std::to_string(bytes[4]));
  }
  const std::uint32_t dim = get_u32(bytes, 5);
  const std::uint32_t count = get_u32(bytes, 9);
  if (dim == 0) {
    throw Error(ErrorCode::kSchemaError, "embeddings: zero dimension");
  }

  EmbeddingTable table(dim);
  std::vector<float> values(dim);
  std::size_t at = kEmbeddingHeaderSize;
  for (std::uint32_t i = 0; i < count; ++i) {
    auto truncated = [&] {
      return Error(
        ErrorCode::kSchemaError, "embeddings: truncated at entry " + std::to_string(i) + " of " +
                                   std::to_string(count));
    };
    if (bytes.size() - at < 2) {
      throw truncated();
    }
    const std::size_t name_len = get_u16(bytes, at);
    at += 2;
    if (bytes.size() - at < name_len + 4 * static_cast<std::size_t>(dim)) {
      throw truncated();
    }
    std::string name(reinterpret_cast<const char *>(bytes.data() + at), name_len);
    at += name_len;
    for (std::uint32_t k = 0; k < dim; ++k) {
      values[k] = std::bit_cast<float>(get_u32(bytes, at));
      at += 4;
    }
    try {
      table.add(std::move(name), std::span<const float>(values));
    } catch (const Error & e) {
      throw Error(
        ErrorCode::kSchemaError, "embeddings: entry " + std::to_string(i) + ": " + e.what());
    }
  }
  if (at != bytes.size()) {
    throw Error(
      ErrorCode::kSchemaError,
      "embeddings: " + std::to_string(bytes.size() - at) + " trailing bytes after " +
        std::to_string(count) + " entries");
  }
  return table;
}

EmbeddingTable read_embeddings(const std::filesystem::path & path)
{
  try {
    return decode_embeddings(read_file_bytes(path));
  } catch (const Error & e) {
    rethrow_with_context(e, path.string());
  }
}

Taxonomy parse_taxonomy(std::string taxonomy_id, std::string_view text)
{
  std::vector<std::string> names;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) {
      end = text.size();
    }
    auto line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') {
      line.remove_suffix(1);
    }
    names.emplace_back(line);
    pos = end + 1;
  }
  for (auto & n : names) {
    // Trim only; original case is kept for display.
    const auto b = n.find_first_not_of(" \t");
    const auto e = n.find_last_not_of(" \t");
    n = b == std::string::npos ? std::string() : n.substr(b, e - b + 1);
  }
  return Taxonomy(std::move(taxonomy_id), std::move(names));
}

Taxonomy read_taxonomy_file(std::string taxonomy_id, const std::filesystem::path & path)
{
  try {
    return parse_taxonomy(std::move(taxonomy_id), read_file_text(path));
  } catch (const Error & e) {
    rethrow_with_context(e, path.string());
  }
}

std::string format_taxonomy(const Taxonomy & taxonomy)
{
  std::string out;
  for (const auto & n : taxonomy.class_names()) {
    out += n;
    out += '\n';
  }
  return out;
}

StopwordLexicon read_stopword_file(const std::filesystem::path & path)
{
  return StopwordLexicon::parse(read_file_text(path));
}

SynonymMap read_synonym_file(const std::filesystem::path & path)
{
  try {
    return SynonymMap::parse(read_file_text(path));
  } catch (const Error & e) {
    rethrow_with_context(e, path.string());
  }
}

}  // namespace maskfuse
