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

#ifndef XLING_LANGUAGE_H_
#define XLING_LANGUAGE_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace xling {

struct LanguageMeta {
  std::string code;
  std::string family;
  std::string script;
  // WALS feature id (e.g. "81A") -> categorical value (e.g. "SOV").
  std::map<std::string, std::string> wals;

  void validate() const;
  bool operator==(const LanguageMeta&) const = default;
};

using MetaTable = std::map<std::string, LanguageMeta>;

// A fixed-budget run of consecutive sentences for one language.
struct LanguagePartition {
  static constexpr std::size_t kDefaultBudget = 10'000'000;

  LanguageMeta meta;
  std::vector<std::string> sentences;
  std::size_t char_count = 0;
  std::size_t target_budget = kDefaultBudget;
  std::uint64_t sample_seed = 0;

  bool underfull() const { return char_count < target_budget; }
  // One sentence per line.
  std::string text() const;
};

// langs.tsv: `code<TAB>family<TAB>script`, optional header line starting
// with "code".
MetaTable read_language_table(const std::filesystem::path& path);

// wals.csv: `language_code,feature_id,value`, optional header. Features for
// codes absent from `metas` are ignored.
void attach_wals(MetaTable& metas, const std::filesystem::path& path);

}  // namespace xling

#endif  // XLING_LANGUAGE_H_
