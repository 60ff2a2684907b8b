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

#include "lrplab/csv_io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "lrplab/error.hpp"

namespace lrplab::csv {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::ofstream open_out(const std::filesystem::path& path,
                       std::ios::openmode mode = std::ios::out) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, mode);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  return out;
}

}  // namespace

std::optional<double> parse_field(std::string_view field) {
  field = trim(field);
  if (field.empty() || field == "nan" || field == "NaN" || field == "NAN") {
    return std::nullopt;
  }
  if (field.front() == '+') field.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    throw LoadError(LoadErrorKind::kParse,
                    "unparsable numeral '" + std::string(field) + "'");
  }
  return value;
}

std::vector<Row> read_numeric(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw LoadError(LoadErrorKind::kMissingFile,
                    "cannot open '" + path.string() + "'");
  }
  std::vector<Row> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = trim(line);
    if (view.empty()) continue;
    Row row;
    std::size_t start = 0;
    while (true) {
      std::size_t comma = view.find(',', start);
      std::string_view field = view.substr(
          start, comma == std::string_view::npos ? std::string_view::npos
                                                 : comma - start);
      try {
        row.push_back(parse_field(field));
      } catch (const LoadError& e) {
        throw LoadError(LoadErrorKind::kParse, path.string() + ":" +
                                                   std::to_string(line_no) +
                                                   ": " + e.what());
      }
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format(double value) {
  if (std::isnan(value)) return "nan";
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), ptr);
}

void write_field(const std::filesystem::path& path, const Field& field,
                 const Mask* mask, InvalidCells style) {
  if (mask != nullptr &&
      (mask->rows() != field.rows() || mask->cols() != field.cols())) {
    throw ShapeError("mask and field dimensions differ");
  }
  auto out = open_out(path);
  for (int r = 0; r < field.rows(); ++r) {
    for (int c = 0; c < field.cols(); ++c) {
      if (c > 0) out << ',';
      bool valid = mask == nullptr || (*mask)(r, c) != 0;
      if (valid) {
        out << format(field(r, c));
      } else if (style == InvalidCells::kNan) {
        out << "nan";
      }
    }
    out << '\n';
  }
}

void write_mask(const std::filesystem::path& path, const Mask& mask) {
  auto out = open_out(path);
  for (int r = 0; r < mask.rows(); ++r) {
    for (int c = 0; c < mask.cols(); ++c) {
      if (c > 0) out << ',';
      out << (mask(r, c) ? '1' : '0');
    }
    out << '\n';
  }
}

void write_pgm(const std::filesystem::path& path, const Field& field,
               const Mask& mask) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (int r = 0; r < field.rows(); ++r) {
    for (int c = 0; c < field.cols(); ++c) {
      if (!mask(r, c) || !std::isfinite(field(r, c))) continue;
      lo = std::min(lo, field(r, c));
      hi = std::max(hi, field(r, c));
    }
  }
  const double span = hi > lo ? hi - lo : 1.0;
  auto out = open_out(path, std::ios::out | std::ios::binary);
  out << "P5\n" << field.cols() << ' ' << field.rows() << "\n255\n";
  for (int r = 0; r < field.rows(); ++r) {
    for (int c = 0; c < field.cols(); ++c) {
      unsigned char px = 0;
      if (mask(r, c) && std::isfinite(field(r, c)) && hi >= lo) {
        px = static_cast<unsigned char>(
            std::lround(255.0 * (field(r, c) - lo) / span));
      }
      out.put(static_cast<char>(px));
    }
  }
}

void write_table(const std::filesystem::path& path,
                 const std::vector<std::string>& header,
                 const std::vector<std::vector<double>>& rows) {
  auto out = open_out(path);
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i > 0) out << ',';
    out << header[i];
  }
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i > 0) out << ',';
      out << format(row[i]);
    }
    out << '\n';
  }
}

}  // namespace lrplab::csv
