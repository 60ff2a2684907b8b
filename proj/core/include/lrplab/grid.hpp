// Copyright 2026 The lrplab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "lrplab/error.hpp"

namespace lrplab {

// Dense row-major 2-D array.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int rows, int cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(checked_size(rows, cols), fill) {}

  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(int r, int c) { return data_[index(r, c)]; }
  const T& operator()(int r, int c) const { return data_[index(r, c)]; }

  T* data() noexcept { return data_.data(); }
  const T* data() const noexcept { return data_.data(); }
  const std::vector<T>& storage() const noexcept { return data_; }

  bool same_shape(const Grid& other) const noexcept {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  static std::size_t checked_size(int rows, int cols) {
    if (rows < 0 || cols < 0) throw ShapeError("negative grid dimension");
    return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
  }

  std::size_t index(int r, int c) const noexcept {
    return static_cast<std::size_t>(r) * static_cast<std::size_t>(cols_) +
           static_cast<std::size_t>(c);
  }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<T> data_;
};

using Field = Grid<double>;

// Validity mask; nonzero marks a valid cell.
using Mask = Grid<std::uint8_t>;

struct Cell {
  int row = 0;
  int col = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

// Inclusive rectangular region of a grid.
struct RegionSpec {
  int row_begin = 0;
  int row_end = 0;
  int col_begin = 0;
  int col_end = 0;

  int height() const noexcept { return row_end - row_begin + 1; }
  int width() const noexcept { return col_end - col_begin + 1; }
  int cell_count() const noexcept { return height() * width(); }
  bool empty() const noexcept {
    return row_end < row_begin || col_end < col_begin;
  }
  bool contains(int r, int c) const noexcept {
    return r >= row_begin && r <= row_end && c >= col_begin && c <= col_end;
  }
  bool contains(const RegionSpec& other) const noexcept {
    return contains(other.row_begin, other.col_begin) &&
           contains(other.row_end, other.col_end);
  }
  bool intersects(const RegionSpec& other) const noexcept {
    return row_begin <= other.row_end && other.row_begin <= row_end &&
           col_begin <= other.col_end && other.col_begin <= col_end;
  }
  bool fits(int rows, int cols) const noexcept {
    return row_begin >= 0 && col_begin >= 0 && row_end < rows &&
           col_end < cols;
  }

  friend bool operator==(const RegionSpec&, const RegionSpec&) = default;
};

int count_valid(const Mask& mask) noexcept;

// Row-major list of valid cells.
std::vector<Cell> valid_cells(const Mask& mask);

}  // namespace lrplab
