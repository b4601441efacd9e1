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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "json.hpp"

#include "maskfuse/error.hpp"
#include "maskfuse/io.hpp"

namespace maskfuse
{

namespace
{

// mt19937_64 output is fixed by the standard; the standard distributions are
// not, so sampling goes through these helpers to keep files identical across
// toolchains.
class Rng
{
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n)
  {
    __extension__ using Wide = unsigned __int128;
    return static_cast<std::uint64_t>((static_cast<Wide>(engine_()) * n) >> 64);
  }

  double range(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  std::uint64_t next() { return engine_(); }

private:
  std::mt19937_64 engine_;
};

struct Rect
{
  std::uint32_t x0, y0, x1, y1;  // half-open

  std::uint64_t area() const { return static_cast<std::uint64_t>(x1 - x0) * (y1 - y0); }
};

RunCounts rect_counts(std::uint32_t height, std::uint32_t width, const Rect & r)
{
  // Column-major: each column inside the rectangle contributes one
  // foreground run of (y1 - y0) pixels.
  RunCounts counts;
  const std::uint32_t run = r.y1 - r.y0;
  const std::uint32_t gap = height - run;
  counts.push_back(r.x0 * height + r.y0);
  for (std::uint32_t x = r.x0; x < r.x1; ++x) {
    if (x > r.x0) {
      if (gap == 0) {
        counts.back() += run;
        continue;
      }
      counts.push_back(gap);
    }
    counts.push_back(run);
  }
  counts.push_back((width - r.x1) * height + (height - r.y1));
  if (counts.back() == 0) {
    counts.pop_back();
  }
  return counts;
}

std::vector<float> random_unit(Rng & rng, std::size_t dim)
{
  std::vector<double> v(dim);
  double sq = 0.0;
  do {
    sq = 0.0;
    for (auto & c : v) {
      c = rng.range(-1.0, 1.0);
      sq += c * c;
    }
  } while (sq < 1e-6);
  const double norm = std::sqrt(sq);
  std::vector<float> out(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    out[i] = static_cast<float>(v[i] / norm);
  }
  return out;
}

double cos_f(const std::vector<float> & a, const std::vector<float> & b)
{
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  return dot / std::sqrt(na * nb);
}

std::string numbered(const char * prefix, std::size_t i)
{
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%03zu", prefix, i);
  return buf;
}

}  // namespace

std::vector<std::string> synthetic_class_names(std::size_t count)
{
  static const char * const kNames[] = {
    "road",     "sidewalk", "building", "wall",     "fence",    "pole",    "sky",
    "tree",     "grass",    "person",   "rider",    "car",      "truck",   "bus",
    "train",    "motorcycle", "bicycle", "dog",     "cat",      "horse",   "bench",
    "bird",     "boat",     "bridge",   "chair",    "table",    "lamp",    "window",
    "door",     "floor",    "ceiling",  "mountain", "river",    "sand",    "snow",
    "water",    "rock",     "flower",   "bottle",   "cup",
  };
  constexpr std::size_t kKnown = std::size(kNames);
  std::vector<std::string> names;
  names.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    names.push_back(i < kKnown ? std::string(kNames[i]) : numbered("class", i));
  }
  return names;
}

void SceneSpec::validate() const
{
  auto fail = [](const std::string & msg) { throw Error(ErrorCode::kSpecError, msg); };
  if (width == 0 || height == 0) {
    fail("image size must be positive");
  }
  if (num_images == 0 || num_regions == 0) {
    fail("need at least one image and one region");
  }
  if (num_classes == 0 || num_classes > kMaxClasses) {
    fail("num_classes must lie in 1.." + std::to_string(kMaxClasses));
  }
  if (num_maps == 0) {
    fail("need at least one closed-set map");
  }
  if (embedding_dim < 2) {
    fail("embedding_dim must be at least 2");
  }
  auto rate = [](double r) { return r >= 0.0 && r <= 1.0; };
  if (!rate(closed_corruption_rate) || !rate(wrong_caption_rate)) {
    fail("noise rates must lie in [0, 1]");
  }
  if ((closed_corruption_rate > 0.0 || wrong_caption_rate > 0.0) && num_classes < 2) {
    fail("noise needs at least two classes");
  }
  if (!(similarity_gap > 0.0 && similarity_gap < 1.0)) {
    fail("similarity_gap must lie in (0, 1)");
  }
}

std::filesystem::path generate_synthetic_scene(
  std::uint64_t seed, const SceneSpec & spec, const std::filesystem::path & out_dir)
{
  spec.validate();
  const std::uint32_t cols =
    static_cast<std::uint32_t>(std::ceil(std::sqrt(static_cast<double>(spec.num_regions))));
  const std::uint32_t rows = static_cast<std::uint32_t>((spec.num_regions + cols - 1) / cols);
  if (spec.width < cols || spec.height < rows) {
    throw Error(
      ErrorCode::kSpecError, "cannot pack " + std::to_string(spec.num_regions) + " regions into " +
                               std::to_string(spec.width) + "x" + std::to_string(spec.height));
  }
  const std::uint32_t cell_w = spec.width / cols;
  const std::uint32_t cell_h = spec.height / rows;

  Rng rng(seed);
  const auto names = synthetic_class_names(spec.num_classes);
  const Taxonomy taxonomy("synth", names);

  // Text vectors, pairwise separated by the requested gap.
  std::vector<std::vector<float>> text_vectors;
  for (std::size_t c = 0; c < spec.num_classes; ++c) {
    bool placed = false;
    for (int attempt = 0; attempt < 10000 && !placed; ++attempt) {
      auto v = random_unit(rng, spec.embedding_dim);
      placed = std::all_of(text_vectors.begin(), text_vectors.end(), [&](const auto & other) {
        return cos_f(v, other) < 1.0 - spec.similarity_gap;
      });
      if (placed) {
        text_vectors.push_back(std::move(v));
      }
    }
    if (!placed) {
      throw Error(
        ErrorCode::kSpecError, "cannot separate " + std::to_string(spec.num_classes) +
                                 " label vectors by gap " + std::to_string(spec.similarity_gap) +
                                 " in dimension " + std::to_string(spec.embedding_dim));
    }
  }

  std::filesystem::create_directories(out_dir);
  write_file_text(out_dir / "synth.txt", format_taxonomy(taxonomy));

  nlohmann::json manifest;
  manifest["schema_version"] = kManifestSchemaVersion;
  manifest["taxonomies"] = nlohmann::json::array({{{"id", "synth"}, {"path", "synth.txt"}}});
  manifest["output_taxonomy"] = "synth";
  manifest["images"] = nlohmann::json::array();

  auto other_class = [&](std::size_t c) {
    const auto k = rng.below(spec.num_classes - 1);
    return static_cast<ClassId>(k >= c ? k + 1 : k);
  };

  for (std::size_t img = 0; img < spec.num_images; ++img) {
    const auto image_id = numbered("img", img);
    std::vector<Rect> regions;
    std::vector<ClassId> region_class;
    for (std::size_t r = 0; r < spec.num_regions; ++r) {
      const std::uint32_t cx = static_cast<std::uint32_t>(r % cols) * cell_w;
      const std::uint32_t cy = static_cast<std::uint32_t>(r / cols) * cell_h;
      const auto ml = static_cast<std::uint32_t>(rng.below(cell_w / 4 + 1));
      const auto mr = static_cast<std::uint32_t>(rng.below(cell_w / 4 + 1));
      const auto mt = static_cast<std::uint32_t>(rng.below(cell_h / 4 + 1));
      const auto mb = static_cast<std::uint32_t>(rng.below(cell_h / 4 + 1));
      Rect rect{cx + ml, cy + mt, cx + cell_w - mr, cy + cell_h - mb};
      if (rect.x1 <= rect.x0 || rect.y1 <= rect.y0) {
        rect = {cx, cy, cx + cell_w, cy + cell_h};
      }
      regions.push_back(rect);
      region_class.push_back(static_cast<ClassId>(rng.below(spec.num_classes)));
    }

    Grid<ClassId> gt(spec.width, spec.height, kVoidId);
    for (std::size_t r = 0; r < regions.size(); ++r) {
      for (auto y = regions[r].y0; y < regions[r].y1; ++y) {
        for (auto x = regions[r].x0; x < regions[r].x1; ++x) {
          gt.at(x, y) = region_class[r];
        }
      }
    }

    nlohmann::json entry;
    entry["image_id"] = image_id;
    entry["width"] = spec.width;
    entry["height"] = spec.height;
    entry["masks"] = nlohmann::json::array();
    entry["captions"] = nlohmann::json::array();
    std::vector<EmbeddingRecord> records;
    for (std::size_t c = 0; c < spec.num_classes; ++c) {
      records.push_back({names[c], text_vectors[c]});
    }

    auto add_mask = [&](const std::string & mask_id, const Rect & rect, ClassId cls,
                        double confidence) {
      nlohmann::json m;
      m["mask_id"] = mask_id;
      m["counts"] = rect_counts(spec.height, spec.width, rect);
      m["confidence"] = confidence;
      entry["masks"].push_back(std::move(m));
      const ClassId said = rng.uniform() < spec.wrong_caption_rate ? other_class(cls) : cls;
      entry["captions"].push_back({{"mask_id", mask_id}, {"text", "a " + names[said]}});
      records.push_back({region_key(mask_id), text_vectors[cls]});
    };

    // Region confidences sit in [0.5, 1), distractors below 0.5, so any mask
    // budget drops distractors first.
    for (std::size_t r = 0; r < regions.size(); ++r) {
      const double conf = std::round(rng.range(0.5, 1.0) * 1e6) / 1e6;
      add_mask(numbered("r", r), regions[r], region_class[r], std::min(conf, 0.999999));
    }
    for (std::size_t d = 0; d < spec.num_distractors; ++d) {
      const auto r = rng.below(regions.size());
      const Rect & outer = regions[r];
      const std::uint32_t w = std::max<std::uint32_t>(1, (outer.x1 - outer.x0) / 2);
      const std::uint32_t h = std::max<std::uint32_t>(1, (outer.y1 - outer.y0) / 2);
      const auto x0 = outer.x0 + static_cast<std::uint32_t>(rng.below(outer.x1 - outer.x0 - w + 1));
      const auto y0 = outer.y0 + static_cast<std::uint32_t>(rng.below(outer.y1 - outer.y0 - h + 1));
      const double conf = std::round(rng.range(0.05, 0.45) * 1e6) / 1e6;
      add_mask(numbered("d", d), Rect{x0, y0, x0 + w, y0 + h}, region_class[r], conf);
    }

    nlohmann::json maps = nlohmann::json::array();
    for (std::size_t k = 0; k < spec.num_maps; ++k) {
      Grid<ClassId> noisy = gt;
      if (spec.closed_corruption_rate > 0.0) {
        for (auto & id : noisy.data()) {
          if (id != kVoidId && rng.uniform() < spec.closed_corruption_rate) {
            id = other_class(id);
          }
        }
      }
      const auto file = image_id + "_map" + std::to_string(k) + ".sfsl";
      write_label_grid(SemanticMap("synth", std::move(noisy)), out_dir / file);
      maps.push_back({{"taxonomy", "synth"}, {"path", file}});
    }
    entry["semantic_maps"] = std::move(maps);

    const auto emb_file = image_id + ".sfse";
    write_file_bytes(out_dir / emb_file, encode_embeddings(spec.embedding_dim, records));
    entry["embeddings"] = emb_file;

    const auto gt_file = image_id + "_gt.sfsl";
    write_label_grid(SemanticMap("synth", std::move(gt)), out_dir / gt_file);
    entry["ground_truth"] = {{"taxonomy", "synth"}, {"path", gt_file}};

    manifest["images"].push_back(std::move(entry));
  }

  const auto path = out_dir / "manifest.json";
  write_file_text(path, manifest.dump(2) + "\n");
  return path;
}

}  // namespace maskfuse
