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

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lrplab/grid.hpp"

namespace lrplab::csv {

using Row = std::vector<std::optional<double>>;

// Parses a comma-separated numeric file. Empty fields and "nan" become
// nullopt. Throws LoadError on missing files or unparsable numerals.
std::vector<Row> read_numeric(const std::filesystem::path& path);

// Shortest representation that parses back to the same double.
std::string format(double value);

std::optional<double> parse_field(std::string_view field);

enum class InvalidCells { kEmpty, kNan };

// Row-major grid dump. Cells where `mask` is zero are written per `style`.
void write_field(const std::filesystem::path& path, const Field& field,
                 const Mask* mask = nullptr,
                 InvalidCells style = InvalidCells::kEmpty);

void write_mask(const std::filesystem::path& path, const Mask& mask);

// Binary 8-bit PGM, min-max normalized over valid cells, invalid cells 0.
void write_pgm(const std::filesystem::path& path, const Field& field,
               const Mask& mask);

void write_table(const std::filesystem::path& path,
                 const std::vector<std::string>& header,
                 const std::vector<std::vector<double>>& rows);

}  // namespace lrplab::csv
