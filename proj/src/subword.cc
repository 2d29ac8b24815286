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

#include "xling/subword.h"

#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <unordered_set>

#include "xling/error.h"
#include "xling/text_util.h"
#include "xling/utf8.h"

namespace xling {
namespace {

using PairKey = std::uint64_t;

PairKey pair_key(int a, int b) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}
int key_left(PairKey k) { return static_cast<int>(k >> 32); }
int key_right(PairKey k) { return static_cast<int>(k & 0xFFFFFFFFu); }

std::string merged_token(const std::string& left, const std::string& right) {
  return left + right.substr(SubwordVocabulary::kContinuation.size());
}

// Calls `fn(word)` for each maximal non-whitespace run of `text`, with the
// run's starting character offset.
template <typename Fn>
void for_each_word(const std::u32string& text, Fn&& fn) {
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && utf8::is_space(text[i])) ++i;
    const std::size_t start = i;
    while (i < text.size() && !utf8::is_space(text[i])) ++i;
    if (i > start) fn(std::u32string_view(text).substr(start, i - start), start);
  }
}

class MergeTrainer {
 public:
  explicit MergeTrainer(const std::map<std::u32string, std::int64_t>& word_counts) {
    std::set<std::string> alphabet;
    for (const auto& [word, _] : word_counts) {
      for (std::size_t i = 0; i < word.size(); ++i) {
        alphabet.insert(piece_string(word[i], i == 0));
      }
    }
    tokens_ = SubwordVocabulary::special_tokens();
    for (const auto& tok : alphabet) add_token(tok);
    alphabet_size_ = alphabet.size();

    for (const auto& [word, count] : word_counts) {
      std::vector<int> pieces;
      for (std::size_t i = 0; i < word.size(); ++i) {
        pieces.push_back(index_.at(piece_string(word[i], i == 0)));
      }
      words_.push_back(std::move(pieces));
      freqs_.push_back(count);
    }
    for (std::size_t w = 0; w < words_.size(); ++w) add_word(static_cast<int>(w), +1);
  }

  std::size_t alphabet_size() const { return alphabet_size_; }

  std::vector<std::string> run(std::size_t vocab_size) {
    while (tokens_.size() < vocab_size) {
      const auto best = best_pair();
      if (!best) break;
      apply_merge(*best);
    }
    return tokens_;
  }

 private:
  static std::string piece_string(char32_t c, bool initial) {
    std::string s = initial ? std::string() : std::string(SubwordVocabulary::kContinuation);
    return s + utf8::encode(c);
  }

  int add_token(const std::string& tok) {
    auto [it, inserted] = index_.emplace(tok, static_cast<int>(tokens_.size()));
    if (inserted) tokens_.push_back(tok);
    return it->second;
  }

  void add_word(int w, int sign) {
    const auto& pieces = words_[w];
    const std::int64_t f = freqs_[w] * sign;
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      piece_counts_[pieces[i]] += f;
      if (i + 1 < pieces.size()) {
        const PairKey k = pair_key(pieces[i], pieces[i + 1]);
        auto& c = pair_counts_[k];
        c += f;
        if (c == 0) pair_counts_.erase(k);
        if (sign > 0) pair_words_[k].insert(w);
      }
    }
  }

  std::optional<PairKey> best_pair() const {
    std::optional<PairKey> best;
    std::int64_t best_count = 0;
    unsigned __int128 best_denom = 1;
    std::string best_tok;
    for (const auto& [key, count] : pair_counts_) {
      if (count < 2) continue;
      const auto denom = static_cast<unsigned __int128>(piece_counts_.at(key_left(key))) *
                         static_cast<unsigned __int128>(piece_counts_.at(key_right(key)));
      if (!best) {
        best = key, best_count = count, best_denom = denom;
        best_tok = merged_token(tokens_[key_left(key)], tokens_[key_right(key)]);
        continue;
      }
      // Compare count/denom against best_count/best_denom exactly.
      const auto lhs = static_cast<unsigned __int128>(count) * best_denom;
      const auto rhs = static_cast<unsigned __int128>(best_count) * denom;
      if (lhs < rhs) continue;
      std::string tok = merged_token(tokens_[key_left(key)], tokens_[key_right(key)]);
      if (lhs == rhs && tok >= best_tok) continue;
      best = key, best_count = count, best_denom = denom, best_tok = std::move(tok);
    }
    return best;
  }

  void apply_merge(PairKey key) {
    const int left = key_left(key);
    const int right = key_right(key);
    const int merged = add_token(merged_token(tokens_[left], tokens_[right]));
    const auto affected = pair_words_[key];
    for (int w : affected) {
      add_word(w, -1);
      auto& pieces = words_[w];
      std::vector<int> out;
      out.reserve(pieces.size());
      for (std::size_t i = 0; i < pieces.size(); ++i) {
        if (i + 1 < pieces.size() && pieces[i] == left && pieces[i + 1] == right) {
          out.push_back(merged);
          ++i;
        } else {
          out.push_back(pieces[i]);
        }
      }
      pieces = std::move(out);
      add_word(w, +1);
    }
    pair_words_.erase(key);
  }

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
  std::size_t alphabet_size_ = 0;
  std::vector<std::vector<int>> words_;
  std::vector<std::int64_t> freqs_;
  std::unordered_map<int, std::int64_t> piece_counts_;
  // Ordered so that the best-pair scan, and therefore tie handling, does not
  // depend on hash iteration order.
  std::map<PairKey, std::int64_t> pair_counts_;
  std::unordered_map<PairKey, std::unordered_set<int>> pair_words_;
};

}  // namespace

const std::vector<std::string>& SubwordVocabulary::special_tokens() {
  static const std::vector<std::string> kSpecials = {"[PAD]", "[UNK]", "[CLS]", "[SEP]",
                                                      "[MASK]"};
  return kSpecials;
}

SubwordVocabulary::SubwordVocabulary(std::vector<std::string> tokens)
    : tokens_(std::move(tokens)) {
  const auto& specials = special_tokens();
  if (tokens_.size() < specials.size()) {
    throw ValidationError("vocabulary is missing the special tokens");
  }
  for (std::size_t i = 0; i < specials.size(); ++i) {
    if (tokens_[i] != specials[i]) {
      throw ValidationError("vocabulary line " + std::to_string(i + 1) + ": expected " +
                            specials[i] + ", found '" + tokens_[i] + "'");
    }
  }
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    const auto& tok = tokens_[i];
    if (tok.empty()) throw ValidationError("vocabulary has an empty token at id " + std::to_string(i));
    if (!index_.emplace(tok, static_cast<int>(i)).second) {
      throw ValidationError("vocabulary has duplicate token '" + tok + "'");
    }
    if (i >= specials.size()) {
      std::string_view body = tok;
      if (body.starts_with(kContinuation) && body.size() > kContinuation.size()) {
        body.remove_prefix(kContinuation.size());
      }
      max_piece_chars_ = std::max(max_piece_chars_, utf8::length(body));
    }
  }
}

std::optional<int> SubwordVocabulary::find(std::string_view token) const {
  auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void SubwordVocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write vocabulary " + path.string());
  for (const auto& tok : tokens_) out << tok << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

SubwordVocabulary SubwordVocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open vocabulary " + path.string());
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    strip_cr(line);
    tokens.push_back(line);
  }
  return SubwordVocabulary(std::move(tokens));
}

SubwordVocabulary train_vocabulary(std::span<const std::string> texts, std::size_t vocab_size) {
  std::map<std::u32string, std::int64_t> word_counts;
  for (const auto& text : texts) {
    const auto decoded = utf8::decode(text);
    for_each_word(decoded, [&](std::u32string_view word, std::size_t) {
      ++word_counts[std::u32string(word)];
    });
  }
  MergeTrainer trainer(word_counts);
  const std::size_t minimum = trainer.alphabet_size() + SubwordVocabulary::kNumSpecials;
  if (vocab_size < minimum) {
    throw ValidationError("vocab_size " + std::to_string(vocab_size) +
                          " is below alphabet size + specials (" + std::to_string(minimum) + ")");
  }
  return SubwordVocabulary(trainer.run(vocab_size));
}

SubwordVocabulary train_vocabulary(std::span<const LanguagePartition> partitions,
                                   std::size_t vocab_size) {
  std::vector<std::string> texts;
  for (const auto& p : partitions) {
    for (const auto& s : p.sentences) texts.push_back(s);
  }
  return train_vocabulary(texts, vocab_size);
}

TokenSequence tokenize(const SubwordVocabulary& vocab, std::string_view text) {
  TokenSequence out;
  const auto decoded = utf8::decode(text);
  const std::size_t max_len = std::max<std::size_t>(1, vocab.max_piece_chars());
  std::string candidate;
  for_each_word(decoded, [&](std::u32string_view word, std::size_t word_start) {
    std::size_t pos = 0;
    while (pos < word.size()) {
      std::size_t len = std::min(max_len, word.size() - pos);
      std::optional<int> id;
      for (; len > 0; --len) {
        candidate.clear();
        if (pos > 0) candidate = SubwordVocabulary::kContinuation;
        candidate += utf8::encode(word.substr(pos, len));
        id = vocab.find(candidate);
        if (id && !SubwordVocabulary::is_special(*id)) break;
        id.reset();
      }
      if (!id) {
        id = SubwordVocabulary::kUnk;
        len = 1;
      }
      out.ids.push_back(*id);
      out.offsets.emplace_back(word_start + pos, word_start + pos + len);
      pos += len;
    }
  });
  return out;
}

TokenStats token_stats(const SubwordVocabulary& vocab, const LanguagePartition& partition) {
  TokenStats stats;
  std::unordered_set<int> seen;
  for (const auto& sentence : partition.sentences) {
    for (int id : tokenize(vocab, sentence).ids) {
      if (SubwordVocabulary::is_special(id)) continue;
      ++stats.total;
      seen.insert(id);
    }
  }
  stats.unique = seen.size();
  return stats;
}

}  // namespace xling
