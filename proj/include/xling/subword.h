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

// A shared wordpiece vocabulary: training by likelihood-scored pair merges
// and longest-match-first tokenization.

#ifndef XLING_SUBWORD_H_
#define XLING_SUBWORD_H_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "xling/language.h"

namespace xling {

class SubwordVocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kCls = 2;
  static constexpr int kSep = 3;
  static constexpr int kMask = 4;
  static constexpr int kNumSpecials = 5;
  static constexpr std::string_view kContinuation = "##";

  static const std::vector<std::string>& special_tokens();

  // Validates that the first five tokens are the specials in fixed order and
  // that tokens are unique and non-empty.
  explicit SubwordVocabulary(std::vector<std::string> tokens);

  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  const std::string& token(int id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  std::optional<int> find(std::string_view token) const;
  static bool is_special(int id) { return id >= 0 && id < kNumSpecials; }
  // Longest token length in characters, ignoring the continuation marker.
  std::size_t max_piece_chars() const { return max_piece_chars_; }

  void save(const std::filesystem::path& path) const;
  static SubwordVocabulary load(const std::filesystem::path& path);

  bool operator==(const SubwordVocabulary& other) const { return tokens_ == other.tokens_; }

 private:
  struct StringHash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const {
      return std::hash<std::string_view>{}(s);
    }
  };

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int, StringHash, std::equal_to<>> index_;
  std::size_t max_piece_chars_ = 0;
};

struct TokenSequence {
  std::vector<int> ids;
  // [start, end) character spans into the source text, one per id.
  std::vector<std::pair<std::size_t, std::size_t>> offsets;
};

// Trains on the whitespace words of `texts`. Every character seen in
// training becomes a token (bare when word-initial, "##"-prefixed
// otherwise); then the adjacent piece pair maximizing
// count(pair) / (count(left) * count(right)) is merged until `vocab_size`
// tokens exist or no pair occurs twice. Ties go to the lexicographically
// smallest merged token.
SubwordVocabulary train_vocabulary(std::span<const std::string> texts,
                                   std::size_t vocab_size);
SubwordVocabulary train_vocabulary(std::span<const LanguagePartition> partitions,
                                   std::size_t vocab_size);

TokenSequence tokenize(const SubwordVocabulary& vocab, std::string_view text);

struct TokenStats {
  std::size_t total = 0;
  std::size_t unique = 0;
};

// Counts exclude special ids.
TokenStats token_stats(const SubwordVocabulary& vocab, const LanguagePartition& partition);

}  // namespace xling

#endif  // XLING_SUBWORD_H_
