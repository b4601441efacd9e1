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
// Brute-force reference implementations shared by the unit tests and the
// acceptance runner. They work pixel by pixel on plain containers and do not
// call into the engine, so they can disagree with it.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <unistd.h>
#include <vector>

#include "maskfuse/masks.hpp"
#include "maskfuse/taxonomy.hpp"

namespace oracle
{

using maskfuse::ClassId;

// Row-major 0/1 pixels.
struct Pixels
{
  std::uint32_t w = 0;
  std::uint32_t h = 0;
  std::vector<std::uint8_t> v;

  std::uint8_t get(std::uint32_t x, std::uint32_t y) const { return v[y * w + x]; }
  void set(std::uint32_t x, std::uint32_t y, std::uint8_t b) { v[y * w + x] = b; }
};

// Walks the counts one pixel at a time. Returns nullopt for an encoding that
// does not cover the grid exactly.
inline std::optional<Pixels> decode(std::uint32_t w, std::uint32_t h,
  const std::vector<std::uint32_t> & counts)
{
  Pixels p{w, h, std::vector<std::uint8_t>(std::size_t(w) * h, 0)};
  std::uint64_t k = 0;
  const std::uint64_t n = std::uint64_t(w) * h;
  for (std::size_t r = 0; r < counts.size(); ++r) {
    for (std::uint32_t i = 0; i < counts[r]; ++i, ++k) {
      if (k >= n) {
        return std::nullopt;
      }
      // k-th pixel in column-major order
      p.set(std::uint32_t(k / h), std::uint32_t(k % h), r % 2);
    }
  }
  if (k != n) {
    return std::nullopt;
  }
  return p;
}

inline std::vector<std::uint32_t> encode(const Pixels & p)
{
  std::vector<std::uint32_t> out{0};
  std::uint8_t cur = 0;
  for (std::uint32_t x = 0; x < p.w; ++x) {
    for (std::uint32_t y = 0; y < p.h; ++y) {
      const std::uint8_t b = p.get(x, y) ? 1 : 0;
      if (b != cur) {
        out.push_back(0);
        cur = b;
      }
      ++out.back();
    }
  }
  return out;
}

inline maskfuse::Bitmap to_bitmap(const Pixels & p)
{
  maskfuse::Bitmap b(p.w, p.h);
  for (std::uint32_t y = 0; y < p.h; ++y) {
    for (std::uint32_t x = 0; x < p.w; ++x) {
      b.at(x, y) = p.get(x, y);
    }
  }
  return b;
}

inline Pixels from_bitmap(const maskfuse::Bitmap & b)
{
  Pixels p{b.width(), b.height(), std::vector<std::uint8_t>(b.size(), 0)};
  for (std::uint32_t y = 0; y < b.height(); ++y) {
    for (std::uint32_t x = 0; x < b.width(); ++x) {
      p.set(x, y, b.at(x, y) ? 1 : 0);
    }
  }
  return p;
}

inline std::uint64_t popcount(const Pixels & p)
{
  return std::uint64_t(std::count(p.v.begin(), p.v.end(), std::uint8_t{1}));
}

// Mix of sparse noise and solid rectangles so that both short and long runs
// show up.
inline Pixels random_pixels(std::mt19937_64 & rng, std::uint32_t w, std::uint32_t h)
{
  Pixels p{w, h, std::vector<std::uint8_t>(std::size_t(w) * h, 0)};
  std::uniform_int_distribution<int> style(0, 2);
  const int s = style(rng);
  if (s == 0) {
    std::bernoulli_distribution bit(std::uniform_real_distribution<double>(0.0, 1.0)(rng));
    for (auto & b : p.v) {
      b = bit(rng) ? 1 : 0;
    }
  } else {
    std::uniform_int_distribution<std::uint32_t> rx(0, w - 1);
    std::uniform_int_distribution<std::uint32_t> ry(0, h - 1);
    const int rects = s == 1 ? 1 : 5;
    for (int r = 0; r < rects; ++r) {
      std::uint32_t x0 = rx(rng), x1 = rx(rng), y0 = ry(rng), y1 = ry(rng);
      if (x0 > x1) std::swap(x0, x1);
      if (y0 > y1) std::swap(y0, y1);
      for (std::uint32_t y = y0; y <= y1; ++y) {
        for (std::uint32_t x = x0; x <= x1; ++x) {
          p.set(x, y, 1);
        }
      }
    }
  }
  return p;
}

// Random pixels with at least one foreground pixel.
inline Pixels random_nonempty(std::mt19937_64 & rng, std::uint32_t w, std::uint32_t h)
{
  Pixels p = random_pixels(rng, w, h);
  if (popcount(p) == 0) {
    p.v[std::uniform_int_distribution<std::size_t>(0, p.v.size() - 1)(rng)] = 1;
  }
  return p;
}

inline maskfuse::BinaryMask make_mask(const std::string & id, const Pixels & p, double conf = 1.0)
{
  return maskfuse::BinaryMask(id, p.w, p.h, encode(p), conf);
}

inline double iou(const Pixels & a, const Pixels & b)
{
  std::set<std::size_t> sa, sb;
  for (std::size_t i = 0; i < a.v.size(); ++i) {
    if (a.v[i]) sa.insert(i);
    if (b.v[i]) sb.insert(i);
  }
  std::vector<std::size_t> inter, uni;
  std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(inter));
  std::set_union(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(uni));
  return uni.empty() ? 0.0 : double(inter.size()) / double(uni.size());
}

struct Vote
{
  ClassId id;
  double confidence;
};

// Histogram of non-void ids under the mask; first maximum in id order.
inline std::optional<Vote> vote(const Pixels & mask, const maskfuse::Grid<ClassId> & map)
{
  std::map<ClassId, std::uint64_t> hist;
  std::uint64_t total = 0;
  for (std::uint32_t y = 0; y < mask.h; ++y) {
    for (std::uint32_t x = 0; x < mask.w; ++x) {
      if (!mask.get(x, y)) continue;
      const ClassId c = map.at(x, y);
      if (c == maskfuse::kVoidId) continue;
      ++hist[c];
      ++total;
    }
  }
  if (total == 0) {
    return std::nullopt;
  }
  ClassId best = 0;
  std::uint64_t best_n = 0;
  for (const auto & [c, n] : hist) {
    if (n > best_n) {
      best = c;
      best_n = n;
    }
  }
  return Vote{best, double(best_n) / double(total)};
}

struct Miou
{
  std::vector<std::optional<double>> per_class;
  std::optional<double> miou;
};

// Per class: IoU of the pixel-index sets {gt == c} and {pred == c}, both
// restricted to pixels whose ground truth is not void.
inline Miou miou(const std::vector<std::pair<maskfuse::Grid<ClassId>, maskfuse::Grid<ClassId>>> & pairs,
  std::size_t classes)
{
  Miou out;
  double sum = 0.0;
  std::size_t present = 0;
  for (std::size_t c = 0; c < classes; ++c) {
    std::set<std::pair<std::size_t, std::size_t>> g, p;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      const auto gd = pairs[k].first.data();
      const auto pd = pairs[k].second.data();
      for (std::size_t i = 0; i < gd.size(); ++i) {
        if (gd[i] == maskfuse::kVoidId) continue;
        if (gd[i] == c) g.insert({k, i});
        if (pd[i] == c) p.insert({k, i});
      }
    }
    std::vector<std::pair<std::size_t, std::size_t>> inter, uni;
    std::set_intersection(g.begin(), g.end(), p.begin(), p.end(), std::back_inserter(inter));
    std::set_union(g.begin(), g.end(), p.begin(), p.end(), std::back_inserter(uni));
    if (uni.empty()) {
      out.per_class.push_back(std::nullopt);
      continue;
    }
    const double v = double(inter.size()) / double(uni.size());
    out.per_class.push_back(v);
    sum += v;
    ++present;
  }
  if (present > 0) {
    out.miou = sum / double(present);
  }
  return out;
}

inline double cosine(const std::vector<double> & a, const std::vector<double> & b)
{
  long double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += (long double)a[i] * b[i];
    na += (long double)a[i] * a[i];
    nb += (long double)b[i] * b[i];
  }
  return double(dot / (std::sqrt(na) * std::sqrt(nb)));
}

inline std::uint64_t fnv1a(const std::vector<std::uint8_t> & bytes)
{
  std::uint64_t h = 1469598103934665603ULL;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::vector<std::uint8_t> slurp(const std::filesystem::path & path)
{
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir
{
public:
  explicit TempDir(const std::string & tag)
  {
    static int serial = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("maskfuse_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(serial++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::error_code ec; std::filesystem::remove_all(path_, ec); }
  TempDir(const TempDir &) = delete;
  TempDir & operator=(const TempDir &) = delete;

  const std::filesystem::path & path() const { return path_; }
  std::filesystem::path operator/(const std::string & name) const { return path_ / name; }

private:
  std::filesystem::path path_;
};

}  // namespace oracle
