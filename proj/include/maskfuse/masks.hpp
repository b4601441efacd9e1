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
#include <span>
#include <string>
#include <vector>

#include "maskfuse/grid.hpp"

namespace maskfuse
{

using RunCounts = std::vector<std::uint32_t>;

/// One class-agnostic region, stored as COCO-convention RLE: alternating
/// background/foreground runs in column-major order (x outer, y inner),
/// first run background.
///
/// Construction validates the encoding: the counts must cover exactly
/// width*height pixels, every run except the first must be non-empty, and the
/// mask must contain at least one foreground pixel.
class BinaryMask
{
public:
  BinaryMask(
    std::string mask_id, std::uint32_t width, std::uint32_t height, RunCounts counts,
    double confidence);

  const std::string & mask_id() const noexcept { return mask_id_; }
  std::uint32_t width() const noexcept { return width_; }
  std::uint32_t height() const noexcept { return height_; }
  const RunCounts & counts() const noexcept { return counts_; }
  double confidence() const noexcept { return confidence_; }
  std::uint64_t area() const noexcept { return area_; }

  /// Calls fn(start, length) for each foreground run; `start` is the
  /// column-major linear pixel index (x * height + y).
  template <typename Fn>
  void for_each_foreground_run(Fn && fn) const
  {
    std::uint64_t pos = 0;
    for (std::size_t i = 0; i < counts_.size(); ++i) {
      if (i % 2 == 1) {
        fn(pos, static_cast<std::uint64_t>(counts_[i]));
      }
      pos += counts_[i];
    }
  }

  bool operator==(const BinaryMask &) const = default;

private:
  std::string mask_id_;
  std::uint32_t width_;
  std::uint32_t height_;
  RunCounts counts_;
  double confidence_;
  std::uint64_t area_;
};

/// Masks of one image, in fixture order.
class MaskSet
{
public:
  MaskSet(std::string image_id, std::uint32_t width, std::uint32_t height,
    std::vector<BinaryMask> masks);

  const std::string & image_id() const noexcept { return image_id_; }
  std::uint32_t width() const noexcept { return width_; }
  std::uint32_t height() const noexcept { return height_; }
  const std::vector<BinaryMask> & masks() const noexcept { return masks_; }
  std::size_t size() const noexcept { return masks_.size(); }

  bool operator==(const MaskSet &) const = default;

private:
  std::string image_id_;
  std::uint32_t width_;
  std::uint32_t height_;
  std::vector<BinaryMask> masks_;
};

/// Column-major RLE of a bitmap (non-zero = foreground). The grid must be
/// non-empty.
RunCounts rle_encode(const Bitmap & bitmap);

/// Expands raw counts; throws CorruptRle when they do not cover the grid.
Bitmap rle_decode(std::uint32_t width, std::uint32_t height, std::span<const std::uint32_t> counts);
Bitmap rle_decode(const BinaryMask & mask);

std::uint64_t mask_area(const BinaryMask & mask) noexcept;

/// |A ∩ B| / |A ∪ B|, computed directly on the run lists.
double mask_iou(const BinaryMask & a, const BinaryMask & b);

/// Keeps the `budget` most confident masks. Ties go to the larger mask, then
/// to the earlier one. Survivors keep their original relative order.
MaskSet select_mask_budget(const MaskSet & set, std::size_t budget);

}  // namespace maskfuse
