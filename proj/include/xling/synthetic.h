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


#ifndef XLING_SYNTHETIC_H_
#define XLING_SYNTHETIC_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "xling/language.h"

namespace xling {

// Word-level Markov chain over a random syllabic lexicon. Each word has a
// small Zipf-weighted successor list; sentences end with '.'.
class MarkovWordGenerator {
 public:
  MarkovWordGenerator(std::vector<std::string> consonants, std::vector<std::string> vowels,
                      std::size_t lexicon_size, std::uint64_t seed);

  std::string sentence(std::mt19937_64& rng) const;
  const std::vector<std::string>& lexicon() const { return lexicon_; }

 private:
  std::size_t pick(const std::vector<std::size_t>& options, std::mt19937_64& rng) const;

  std::vector<std::string> lexicon_;
  std::vector<std::vector<std::size_t>> successors_;
  std::vector<std::size_t> starts_;
};

MarkovWordGenerator latin_generator(std::uint64_t seed);

struct FixtureOptions {
  std::size_t sentences_per_language = 2000;
  std::size_t sentences_per_document = 50;
  std::uint64_t seed = 7;
};

// Writes raw/<code>.txt, langs.tsv and wals.csv under dir for four
// languages: xa and xb share one generator, xc and xd each use their own
// alphabet. Returns the language table.
MetaTable write_synthetic_fixture(const std::filesystem::path& dir, const FixtureOptions& options);

}  // namespace xling

#endif  // XLING_SYNTHETIC_H_
