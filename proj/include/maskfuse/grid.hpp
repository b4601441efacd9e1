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
#include <vector>

namespace maskfuse
{

/// Dense row-major 2D grid. Index (x, y) with x the column and y the row.
template <typename T>
class Grid
{
public:
  Grid() = default;
  Grid(std::uint32_t width, std::uint32_t height, T fill = T{})
  : width_(width), height_(height), data_(static_cast<std::size_t>(width) * height, fill)
  {
  }

  std::uint32_t width() const noexcept { return width_; }
  std::uint32_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T & at(std::uint32_t x, std::uint32_t y) { return data_[index(x, y)]; }
  const T & at(std::uint32_t x, std::uint32_t y) const { return data_[index(x, y)]; }

  std::size_t index(std::uint32_t x, std::uint32_t y) const noexcept
  {
    return static_cast<std::size_t>(y) * width_ + x;
  }

  std::span<T> data() noexcept { return data_; }
  std::span<const T> data() const noexcept { return data_; }

  bool operator==(const Grid &) const = default;

private:
  std::uint32_t width_ = 0;
  std::uint32_t height_ = 0;
  std::vector<T> data_;
};

using Bitmap = Grid<std::uint8_t>;

}  // namespace maskfuse
