// csv_util.cc

// Copyright 2026  The uttdiar Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "csv_util.h"

#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

namespace uttdiar::internal {

namespace {

std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

}  // namespace

Matrix<double> ParseCsvMatrix(std::string_view text) {
  std::vector<double> values;
  std::size_t cols = 0, rows = 0, line_no = 0;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    std::string_view line = Trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty()) continue;
    std::size_t width = 0;
    while (true) {
      const std::size_t comma = line.find(',');
      std::string_view field = Trim(line.substr(0, comma));
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
      if (ec != std::errc() || ptr != field.data() + field.size())
        throw ParseError("bad number '" + std::string(field) + "'", line_no);
      values.push_back(v);
      ++width;
      if (comma == std::string_view::npos) break;
      line.remove_prefix(comma + 1);
    }
    if (rows == 0) {
      cols = width;
    } else if (width != cols) {
      throw ParseError("expected " + std::to_string(cols) + " columns, got " +
                           std::to_string(width),
                       line_no);
    }
    ++rows;
  }
  Matrix<double> m(rows, cols);
  m.data() = std::move(values);
  return m;
}

void AppendDouble(std::string &out, double value, int digits) {
  char buf[32];
  auto [ptr, ec] =
      digits > 0
          ? std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, digits)
          : std::to_chars(buf, buf + sizeof(buf), value);
  out.append(buf, ptr);
}

std::string FormatCsvMatrix(const Matrix<double> &m) {
  std::string out;
  out.reserve(m.rows() * m.cols() * 12);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (c) out.push_back(',');
      AppendDouble(out, m(r, c));
    }
    out.push_back('\n');
  }
  return out;
}

std::string ReadFile(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const std::string &path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
}

}  // namespace uttdiar::internal
