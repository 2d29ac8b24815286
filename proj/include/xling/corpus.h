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

// Raw corpus ingestion, fixed-budget partition sampling and the balance
// diagnostics run on the resulting partitions.

#ifndef XLING_CORPUS_H_
#define XLING_CORPUS_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "xling/language.h"
#include "xling/stats.h"
#include "xling/subword.h"

namespace xling {

struct RawCorpus {
  LanguageMeta meta;
  std::vector<std::string> documents;
  std::size_t total_chars = 0;
};

// Reads every regular file under `path` (or `path` itself when it is a
// file) in filename order. Blank lines separate documents; each document is
// whitespace-trimmed. Throws IoError for a missing path and ValidationError
// naming the file and byte offset for invalid UTF-8.
RawCorpus load_raw_corpus(const std::filesystem::path& path, LanguageMeta meta);

// One corpus per table entry, read from dir/<code>.txt or dir/<code>/.
std::vector<RawCorpus> load_raw_corpora(const std::filesystem::path& dir, const MetaTable& metas);

// Splits after `.`, `!`, `?`, `。`, `।`, `؟` when followed by whitespace or
// end of text. Sentences are trimmed and line breaks inside a sentence
// become spaces, so character counts are preserved.
std::vector<std::string> split_sentences(std::string_view text);

// Sentences of all documents in corpus order.
std::vector<std::string> corpus_sentences(const RawCorpus& raw);

// Mixes (seed, language code) into the starting-offset seed.
std::uint64_t mix_seed(std::uint64_t seed, std::string_view code);

// Takes consecutive sentences from a seed-determined start, wrapping across
// documents, until the next sentence would push char_count past `budget`.
// A corpus whose sentences total at most `budget` characters is returned
// whole and the partition is underfull.
LanguagePartition sample_partition(const RawCorpus& raw, std::size_t budget, std::uint64_t seed);

struct DistributionSet {
  static constexpr std::array<const char*, 3> kNames = {
      "sentence_len_words", "sentence_len_tokens", "word_len_chars"};

  stats::Histogram sentence_len_words;
  stats::Histogram sentence_len_tokens;
  stats::Histogram word_len_chars;

  const stats::Histogram& get(std::size_t i) const;
};

// Throws ValidationError on text without any words.
DistributionSet length_distributions(std::span<const std::string> sentences,
                                     const SubwordVocabulary& vocab);
DistributionSet length_distributions(const LanguagePartition& partition,
                                     const SubwordVocabulary& vocab);
DistributionSet length_distributions(const RawCorpus& raw, const SubwordVocabulary& vocab);

struct BalanceReport {
  static constexpr double kDefaultThreshold = 0.001;

  std::array<double, 3> per_distribution_emd{};
  double threshold = kDefaultThreshold;
  bool passed = false;
};

BalanceReport validate_balance(const DistributionSet& sample, const DistributionSet& full,
                               double threshold = BalanceReport::kDefaultThreshold);

// TSV with columns language, dist_name, emd, passed.
void write_balance_tsv(std::ostream& out,
                       const std::vector<std::pair<std::string, BalanceReport>>& reports);

struct InfoBalanceReport {
  std::map<std::string, std::size_t> per_language_total_tokens;
  std::map<std::string, std::size_t> per_language_unique_tokens;
  double pearson_r = 0.0;
};

InfoBalanceReport information_balance(std::span<const LanguagePartition> partitions,
                                      const SubwordVocabulary& vocab);

// `<code>.partition.txt` plus `<code>.partition.meta` (key=value lines).
void write_partition(const std::filesystem::path& dir, const LanguagePartition& partition);
LanguagePartition read_partition(const std::filesystem::path& dir, const std::string& code);
// All partitions in `dir`, ordered by language code.
std::vector<LanguagePartition> read_partitions(const std::filesystem::path& dir);

}  // namespace xling

#endif  // XLING_CORPUS_H_
