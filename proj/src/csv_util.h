// csv_util.h

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

// Internal helpers shared by the CSV readers/writers.

#ifndef UTTDIAR_SRC_CSV_UTIL_H_
#define UTTDIAR_SRC_CSV_UTIL_H_

#include <string>
#include <string_view>

#include "uttdiar/common.h"

namespace uttdiar::internal {

// Parses a headerless numeric CSV. All rows must have the same width.
Matrix<double> ParseCsvMatrix(std::string_view text);

// Shortest round-trip decimal form, or `digits` significant digits.
void AppendDouble(std::string &out, double value, int digits = 0);

std::string FormatCsvMatrix(const Matrix<double> &m);

std::string ReadFile(const std::string &path);
void WriteFile(const std::string &path, std::string_view contents);

}  // namespace uttdiar::internal

#endif  // UTTDIAR_SRC_CSV_UTIL_H_
