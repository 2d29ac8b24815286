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

// Minimal UTF-8 helpers. All character counts in this project are in
// Unicode scalar values.

#ifndef XLING_UTF8_H_
#define XLING_UTF8_H_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace xling::utf8 {

// Returns the byte offset of the first invalid sequence, or nullopt when
// `bytes` is well-formed UTF-8 (no overlongs, no surrogates, <= U+10FFFF).
std::optional<std::size_t> find_invalid(std::string_view bytes);

std::u32string decode(std::string_view bytes);
std::string encode(std::u32string_view text);
std::string encode(char32_t c);

// Number of scalar values; assumes valid input.
std::size_t length(std::string_view bytes);

// Unicode White_Space property (the subset that matters for word splitting).
bool is_space(char32_t c);

}  // namespace xling::utf8

#endif  // XLING_UTF8_H_
