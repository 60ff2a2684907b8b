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

#include "lrplab/grid.hpp"

namespace lrplab {

int count_valid(const Mask& mask) noexcept {
  int n = 0;
  for (std::uint8_t v : mask.storage()) n += v != 0 ? 1 : 0;
  return n;
}

std::vector<Cell> valid_cells(const Mask& mask) {
  std::vector<Cell> cells;
  cells.reserve(static_cast<std::size_t>(count_valid(mask)));
  for (int r = 0; r < mask.rows(); ++r) {
    for (int c = 0; c < mask.cols(); ++c) {
      if (mask(r, c)) cells.push_back({r, c});
    }
  }
  return cells;
}

}  // namespace lrplab
