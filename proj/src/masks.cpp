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

#include "maskfuse/masks.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "maskfuse/error.hpp"

namespace maskfuse
{

namespace
{

std::uint64_t sum_counts(std::span<const std::uint32_t> counts)
{
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

}  // namespace

BinaryMask::BinaryMask(
  std::string mask_id, std::uint32_t width, std::uint32_t height, RunCounts counts,
  double confidence)
: mask_id_(std::move(mask_id)),
  width_(width),
  height_(height),
  counts_(std::move(counts)),
  confidence_(confidence),
  area_(0)
{
  if (mask_id_.empty()) {
    throw Error(ErrorCode::kInvalidMask, "mask_id must not be empty");
  }
  if (width_ == 0 || height_ == 0) {
    throw Error(ErrorCode::kInvalidMask, "mask '" + mask_id_ + "' has a zero dimension");
  }
  if (!(confidence_ >= 0.0 && confidence_ <= 1.0)) {
    throw Error(ErrorCode::kInvalidMask, "mask '" + mask_id_ + "' confidence outside [0,1]");
  }
  const std::uint64_t total = static_cast<std::uint64_t>(width_) * height_;
  if (sum_counts(counts_) != total) {
    throw Error(
      ErrorCode::kCorruptRle, "mask '" + mask_id_ + "' counts sum to " +
                                std::to_string(sum_counts(counts_)) + ", expected " +
                                std::to_string(total));
  }
  // The first run may be empty (mask starts with foreground); no other may be.
  for (std::size_t i = 1; i < counts_.size(); ++i) {
    if (counts_[i] == 0) {
      throw Error(
        ErrorCode::kCorruptRle,
        "mask '" + mask_id_ + "' has an empty run at index " + std::to_string(i));
    }
  }
  for (std::size_t i = 1; i < counts_.size(); i += 2) {
    area_ += counts_[i];
  }
  if (area_ == 0) {
    throw Error(ErrorCode::kInvalidMask, "mask '" + mask_id_ + "' has no foreground pixels");
  }
}

MaskSet::MaskSet(
  std::string image_id, std::uint32_t width, std::uint32_t height, std::vector<BinaryMask> masks)
: image_id_(std::move(image_id)), width_(width), height_(height), masks_(std::move(masks))
{
  std::unordered_set<std::string> seen;
  for (const auto & m : masks_) {
    if (m.width() != width_ || m.height() != height_) {
      throw Error(
        ErrorCode::kDimensionMismatch, "mask '" + m.mask_id() + "' is " +
                                         std::to_string(m.width()) + "x" +
                                         std::to_string(m.height()) + " in a " +
                                         std::to_string(width_) + "x" + std::to_string(height_) +
                                         " image");
    }
    if (!seen.insert(m.mask_id()).second) {
      throw Error(ErrorCode::kInvalidMask, "duplicate mask_id '" + m.mask_id() + "'");
    }
  }
}

RunCounts rle_encode(const Bitmap & bitmap)
{
  RunCounts counts;
  bool current = false;
  std::uint32_t run = 0;
  for (std::uint32_t x = 0; x < bitmap.width(); ++x) {
    for (std::uint32_t y = 0; y < bitmap.height(); ++y) {
      const bool value = bitmap.at(x, y) != 0;
      if (value != current) {
        counts.push_back(run);
        run = 0;
        current = value;
      }
      ++run;
    }
  }
  counts.push_back(run);
  return counts;
}

Bitmap rle_decode(std::uint32_t width, std::uint32_t height, std::span<const std::uint32_t> counts)
{
  const std::uint64_t total = static_cast<std::uint64_t>(width) * height;
  if (total == 0) {
    throw Error(ErrorCode::kCorruptRle, "cannot decode into an empty grid");
  }
  if (sum_counts(counts) != total) {
    throw Error(
      ErrorCode::kCorruptRle, "counts sum to " + std::to_string(sum_counts(counts)) +
                                ", expected " + std::to_string(total));
  }
  Bitmap bitmap(width, height, 0);
  std::uint64_t pos = 0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (i % 2 == 1) {
      for (std::uint64_t p = pos; p < pos + counts[i]; ++p) {
        const auto x = static_cast<std::uint32_t>(p / height);
        const auto y = static_cast<std::uint32_t>(p % height);
        bitmap.at(x, y) = 1;
      }
    }
    pos += counts[i];
  }
  return bitmap;
}

Bitmap rle_decode(const BinaryMask & mask)
{
  return rle_decode(mask.width(), mask.height(), mask.counts());
}

std::uint64_t mask_area(const BinaryMask & mask) noexcept { return mask.area(); }

double mask_iou(const BinaryMask & a, const BinaryMask & b)
{
  if (a.width() != b.width() || a.height() != b.height()) {
    throw Error(
      ErrorCode::kDimensionMismatch,
      "mask_iou on '" + a.mask_id() + "' and '" + b.mask_id() + "' of different sizes");
  }
  struct Interval
  {
    std::uint64_t begin;
    std::uint64_t end;
  };
  auto intervals = [](const BinaryMask & m) {
    std::vector<Interval> out;
    out.reserve(m.counts().size() / 2);
    m.for_each_foreground_run(
      [&](std::uint64_t start, std::uint64_t len) { out.push_back({start, start + len}); });
    return out;
  };
  const auto ia = intervals(a);
  const auto ib = intervals(b);

  std::uint64_t inter = 0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < ia.size() && j < ib.size()) {
    const auto lo = std::max(ia[i].begin, ib[j].begin);
    const auto hi = std::min(ia[i].end, ib[j].end);
    if (hi > lo) {
      inter += hi - lo;
    }
    if (ia[i].end < ib[j].end) {
      ++i;
    } else {
      ++j;
    }
  }
  const std::uint64_t uni = a.area() + b.area() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

MaskSet select_mask_budget(const MaskSet & set, std::size_t budget)
{
  if (budget == 0) {
    throw Error(ErrorCode::kInvalidArgument, "mask budget must be at least 1");
  }
  const auto & masks = set.masks();
  if (budget >= masks.size()) {
    return set;
  }
  std::vector<std::size_t> order(masks.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::partial_sort(
    order.begin(), order.begin() + static_cast<std::ptrdiff_t>(budget), order.end(),
    [&](std::size_t l, std::size_t r) {
      if (masks[l].confidence() != masks[r].confidence()) {
        return masks[l].confidence() > masks[r].confidence();
      }
      if (masks[l].area() != masks[r].area()) {
        return masks[l].area() > masks[r].area();
      }
      return l < r;
    });
  order.resize(budget);
  std::sort(order.begin(), order.end());

  std::vector<BinaryMask> kept;
  kept.reserve(budget);
  for (auto idx : order) {
    kept.push_back(masks[idx]);
  }
  return MaskSet(set.image_id(), set.width(), set.height(), std::move(kept));
}

}  // namespace maskfuse
