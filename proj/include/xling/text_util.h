// Copyright 2026 The xling Authors.
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

// Line-oriented parsing helpers shared by the TSV/CSV readers.

#ifndef XLING_TEXT_UTIL_H_
#define XLING_TEXT_UTIL_H_

#include <string>
#include <string_view>
#include <vector>

namespace xling {

std::vector<std::string> split(std::string_view line, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);
std::string trim(std::string_view s);
void strip_cr(std::string& line);

// Strict numeric parsing; throws ValidationError naming `what` on garbage.
double parse_double(std::string_view s, std::string_view what);
long long parse_int(std::string_view s, std::string_view what);

// Fixed-point decimal with `digits` fractional digits, locale-independent.
std::string format_fixed(double v, int digits);
// Shortest fixed-point text that parses back to v, padded to min_digits
// fractional digits.
std::string format_round_trip(double v, int min_digits);

}  // namespace xling

#endif  // XLING_TEXT_UTIL_H_
