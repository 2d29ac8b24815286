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

#ifndef XLING_SCORE_MATRIX_H_
#define XLING_SCORE_MATRIX_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "xling/language.h"

namespace xling {

enum class Provenance { kProxy, kIngested };
std::string_view to_string(Provenance p);

enum class Orientation { kRowSource, kColumnSource };
std::string_view to_string(Orientation o);
Orientation parse_orientation(std::string_view s);

using LanguagePair = std::pair<std::string, std::string>;  // (source, target)

// MRR of monolingual and bilingual models. bilingual[(s, t)] is the model
// pretrained on s and t, evaluated on t.
struct ScoreMatrix {
  std::vector<std::string> languages;
  std::map<std::string, double> mono;
  std::map<LanguagePair, double> bilingual;
  Provenance provenance = Provenance::kProxy;
  std::vector<std::uint64_t> seeds;
  // "joint", "sequential", or empty when the producer did not say.
  std::string regime;

  // Throws ValidationError on self pairs, values outside (0, 1], unknown
  // languages or a language without a monolingual entry.
  void validate() const;
  // True when every ordered pair has a bilingual entry.
  bool complete() const;
};

// Reads the score-matrix TSV:
//   # orientation=row-source        (mandatory; or col-source)
//   # scale=percent                 (optional; default fraction)
//   src<TAB>c1<TAB>c2 ...
//   c1<TAB>v11<TAB>v12 ...
// Diagonal cells are monolingual MRR; an empty cell is a missing value.
// With `expected` set, the declared orientation must match it. With `metas`
// set, every code must be a known language.
ScoreMatrix ingest_score_matrix(const std::filesystem::path& path,
                                std::optional<Orientation> expected = std::nullopt,
                                const MetaTable* metas = nullptr);
ScoreMatrix parse_score_matrix(std::string_view content, std::string_view source_name,
                               std::optional<Orientation> expected = std::nullopt,
                               const MetaTable* metas = nullptr);

// Writes row-source orientation with 10 fractional digits.
void write_score_matrix(std::ostream& out, const ScoreMatrix& matrix);
void write_score_matrix(const std::filesystem::path& path, const ScoreMatrix& matrix);

}  // namespace xling

#endif  // XLING_SCORE_MATRIX_H_
