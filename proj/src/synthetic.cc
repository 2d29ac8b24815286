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


#include "xling/synthetic.h"

#include <fstream>
#include <set>

#include "xling/error.h"

namespace xling {
namespace {

constexpr std::size_t kMaxSuccessors = 8;
constexpr int kMinWords = 4;
constexpr int kMaxWords = 14;

double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::vector<std::string> chars(std::initializer_list<const char*> list) {
  return {list.begin(), list.end()};
}

struct FixtureLanguage {
  const char* code;
  const char* family;
  const char* script;
  const char* word_order;
};

constexpr FixtureLanguage kLanguages[] = {
    {"xa", "Alpha", "Latn", "SOV"},
    {"xb", "Alpha", "Latn", "SOV"},
    {"xc", "Beta", "Cyrl", "SVO"},
    {"xd", "Gamma", "Grek", "VSO"},
};

}  // namespace

MarkovWordGenerator::MarkovWordGenerator(std::vector<std::string> consonants,
                                         std::vector<std::string> vowels,
                                         std::size_t lexicon_size, std::uint64_t seed) {
  if (consonants.empty() || vowels.empty() || lexicon_size < 2) {
    throw ValidationError("markov generator: empty alphabet or lexicon");
  }
  std::mt19937_64 rng(seed);
  std::set<std::string> seen;
  while (lexicon_.size() < lexicon_size) {
    const int syllables = 1 + static_cast<int>(rng() % 3);
    std::string w;
    for (int i = 0; i < syllables; ++i) {
      w += consonants[rng() % consonants.size()];
      w += vowels[rng() % vowels.size()];
    }
    if (seen.insert(w).second) lexicon_.push_back(w);
  }
  successors_.resize(lexicon_size);
  for (auto& next : successors_) {
    const std::size_t n = 1 + rng() % kMaxSuccessors;
    for (std::size_t i = 0; i < n; ++i) next.push_back(rng() % lexicon_size);
  }
  for (std::size_t i = 0; i < kMaxSuccessors * 2; ++i) starts_.push_back(rng() % lexicon_size);
}

std::size_t MarkovWordGenerator::pick(const std::vector<std::size_t>& options,
                                      std::mt19937_64& rng) const {
  // Weight 1/(rank+1).
  double total = 0.0;
  for (std::size_t i = 0; i < options.size(); ++i) total += 1.0 / static_cast<double>(i + 1);
  double u = unit(rng) * total;
  for (std::size_t i = 0; i < options.size(); ++i) {
    u -= 1.0 / static_cast<double>(i + 1);
    if (u < 0.0) return options[i];
  }
  return options.back();
}

std::string MarkovWordGenerator::sentence(std::mt19937_64& rng) const {
  const int n = kMinWords + static_cast<int>(rng() % (kMaxWords - kMinWords + 1));
  std::size_t w = pick(starts_, rng);
  std::string out = lexicon_[w];
  for (int i = 1; i < n; ++i) {
    w = pick(successors_[w], rng);
    out += ' ';
    out += lexicon_[w];
  }
  out += '.';
  return out;
}

MarkovWordGenerator latin_generator(std::uint64_t seed) {
  return MarkovWordGenerator(
      chars({"b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z"}),
      chars({"a", "e", "i", "o", "u"}), 400, seed);
}

MetaTable write_synthetic_fixture(const std::filesystem::path& dir, const FixtureOptions& options) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir / "raw", ec);
  if (ec) throw IoError("cannot create " + (dir / "raw").string() + ": " + ec.message());

  const MarkovWordGenerator shared = latin_generator(options.seed);
  const MarkovWordGenerator cyrillic(
      chars({"б", "г", "д", "к", "л", "м", "н", "п", "р", "с", "т", "ж", "ш", "х"}),
      chars({"а", "е", "и", "о", "у"}), 400, options.seed + 1);
  const MarkovWordGenerator greek(
      chars({"β", "γ", "δ", "κ", "λ", "μ", "ν", "π", "ρ", "σ", "τ", "φ", "χ", "θ"}),
      chars({"α", "ε", "ι", "ο", "υ"}), 400, options.seed + 2);
  const MarkovWordGenerator* generators[] = {&shared, &shared, &cyrillic, &greek};

  MetaTable metas;
  std::ofstream langs(dir / "langs.tsv", std::ios::binary);
  std::ofstream wals(dir / "wals.csv", std::ios::binary);
  if (!langs || !wals) throw IoError("cannot write fixture tables under " + dir.string());
  langs << "code\tfamily\tscript\n";
  wals << "language_code,feature_id,value\n";
  for (std::size_t li = 0; li < std::size(kLanguages); ++li) {
    const auto& l = kLanguages[li];
    LanguageMeta meta{l.code, l.family, l.script, {{"81A", l.word_order}}};
    langs << l.code << '\t' << l.family << '\t' << l.script << '\n';
    wals << l.code << ",81A," << l.word_order << '\n';

    std::mt19937_64 rng(options.seed * 1000003ULL + li);
    std::ofstream raw(dir / "raw" / (std::string(l.code) + ".txt"), std::ios::binary);
    if (!raw) throw IoError("cannot write raw corpus for " + std::string(l.code));
    for (std::size_t i = 0; i < options.sentences_per_language; ++i) {
      if (i > 0) raw << (i % options.sentences_per_document == 0 ? "\n\n" : " ");
      raw << generators[li]->sentence(rng);
    }
    raw << '\n';
    metas.emplace(l.code, std::move(meta));
  }
  return metas;
}

}  // namespace xling
