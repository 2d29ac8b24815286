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

#include "xling/corpus.h"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "xling/error.h"
#include "xling/text_util.h"
#include "xling/utf8.h"

namespace xling {
namespace fs = std::filesystem;
namespace {

constexpr std::string_view kPartitionSuffix = ".partition.txt";
constexpr std::string_view kMetaSuffix = ".partition.meta";

bool is_terminator(char32_t c) {
  return c == U'.' || c == U'!' || c == U'?' || c == U'。' || c == U'।' ||
         c == U'؟';
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split_documents(const std::string& content) {
  std::vector<std::string> docs;
  std::string current;
  std::istringstream in(content);
  std::string line;
  auto flush = [&] {
    std::string doc = trim(current);
    if (!doc.empty()) docs.push_back(std::move(doc));
    current.clear();
  };
  while (std::getline(in, line)) {
    strip_cr(line);
    if (trim(line).empty()) {
      flush();
    } else {
      if (!current.empty()) current += '\n';
      current += line;
    }
  }
  flush();
  return docs;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Word count and per-word character lengths of one sentence.
std::vector<std::size_t> word_lengths(std::string_view sentence) {
  std::vector<std::size_t> out;
  const auto text = utf8::decode(sentence);
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && utf8::is_space(text[i])) ++i;
    const std::size_t start = i;
    while (i < text.size() && !utf8::is_space(text[i])) ++i;
    if (i > start) out.push_back(i - start);
  }
  return out;
}

}  // namespace

RawCorpus load_raw_corpus(const fs::path& path, LanguageMeta meta) {
  if (!fs::exists(path)) throw IoError("corpus path does not exist: " + path.string());
  std::vector<fs::path> files;
  if (fs::is_directory(path)) {
    for (const auto& entry : fs::directory_iterator(path)) {
      if (entry.is_regular_file()) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
  } else {
    files.push_back(path);
  }
  RawCorpus raw;
  raw.meta = std::move(meta);
  for (const auto& file : files) {
    const std::string content = read_file(file);
    if (auto bad = utf8::find_invalid(content)) {
      throw ValidationError(file.string() + ": invalid UTF-8 at byte offset " +
                            std::to_string(*bad));
    }
    for (auto& doc : split_documents(content)) {
      raw.total_chars += utf8::length(doc);
      raw.documents.push_back(std::move(doc));
    }
  }
  return raw;
}

std::vector<RawCorpus> load_raw_corpora(const fs::path& dir, const MetaTable& metas) {
  if (!fs::is_directory(dir)) throw IoError("raw corpus directory not found: " + dir.string());
  std::vector<RawCorpus> out;
  for (const auto& [code, meta] : metas) {
    const fs::path file = dir / (code + ".txt");
    out.push_back(load_raw_corpus(fs::exists(file) ? file : dir / code, meta));
  }
  return out;
}

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  const auto decoded = utf8::decode(text);
  std::u32string current;
  auto flush = [&] {
    for (auto& c : current) {
      if (c == U'\n' || c == U'\r') c = U' ';
    }
    std::string s = trim(utf8::encode(current));
    if (!s.empty()) out.push_back(std::move(s));
    current.clear();
  };
  for (std::size_t i = 0; i < decoded.size(); ++i) {
    current.push_back(decoded[i]);
    if (is_terminator(decoded[i]) &&
        (i + 1 == decoded.size() || utf8::is_space(decoded[i + 1]))) {
      flush();
    }
  }
  flush();
  return out;
}

std::vector<std::string> corpus_sentences(const RawCorpus& raw) {
  std::vector<std::string> out;
  for (const auto& doc : raw.documents) {
    for (auto& s : split_sentences(doc)) out.push_back(std::move(s));
  }
  return out;
}

std::uint64_t mix_seed(std::uint64_t seed, std::string_view code) {
  // FNV-1a over the code, then splitmix to decorrelate nearby seeds.
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : code) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return splitmix64(splitmix64(seed) ^ h);
}

LanguagePartition sample_partition(const RawCorpus& raw, std::size_t budget, std::uint64_t seed) {
  if (budget == 0) throw ValidationError("sample_partition: budget must be positive");
  LanguagePartition part;
  part.meta = raw.meta;
  part.target_budget = budget;
  part.sample_seed = seed;

  const auto sentences = corpus_sentences(raw);
  std::vector<std::size_t> lengths;
  std::size_t total = 0;
  for (const auto& s : sentences) {
    lengths.push_back(utf8::length(s));
    total += lengths.back();
  }
  if (sentences.empty()) return part;
  if (total <= budget) {
    part.sentences = sentences;
    part.char_count = total;
    return part;
  }
  const std::size_t n = sentences.size();
  const std::size_t start = mix_seed(seed, raw.meta.code) % n;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t idx = (start + i) % n;
    if (part.char_count + lengths[idx] > budget) break;
    part.char_count += lengths[idx];
    part.sentences.push_back(sentences[idx]);
  }
  return part;
}

const stats::Histogram& DistributionSet::get(std::size_t i) const {
  switch (i) {
    case 0: return sentence_len_words;
    case 1: return sentence_len_tokens;
    default: return word_len_chars;
  }
}

DistributionSet length_distributions(std::span<const std::string> sentences,
                                     const SubwordVocabulary& vocab) {
  stats::Histogram words, tokens, chars;
  for (const auto& s : sentences) {
    const auto lens = word_lengths(s);
    if (lens.empty()) continue;
    words[static_cast<std::int64_t>(lens.size())] += 1.0;
    for (auto len : lens) chars[static_cast<std::int64_t>(len)] += 1.0;
    tokens[static_cast<std::int64_t>(tokenize(vocab, s).ids.size())] += 1.0;
  }
  if (words.empty()) throw ValidationError("length_distributions: text has no words");
  return {stats::normalize(words), stats::normalize(tokens), stats::normalize(chars)};
}

DistributionSet length_distributions(const LanguagePartition& partition,
                                     const SubwordVocabulary& vocab) {
  return length_distributions(partition.sentences, vocab);
}

DistributionSet length_distributions(const RawCorpus& raw, const SubwordVocabulary& vocab) {
  return length_distributions(corpus_sentences(raw), vocab);
}

BalanceReport validate_balance(const DistributionSet& sample, const DistributionSet& full,
                               double threshold) {
  BalanceReport report;
  report.threshold = threshold;
  report.passed = true;
  for (std::size_t i = 0; i < 3; ++i) {
    report.per_distribution_emd[i] = stats::emd_1d(sample.get(i), full.get(i));
    if (!(report.per_distribution_emd[i] < threshold)) report.passed = false;
  }
  return report;
}

void write_balance_tsv(std::ostream& out,
                       const std::vector<std::pair<std::string, BalanceReport>>& reports) {
  out << "language\tdist_name\temd\tpassed\n";
  for (const auto& [code, report] : reports) {
    for (std::size_t i = 0; i < 3; ++i) {
      const bool ok = report.per_distribution_emd[i] < report.threshold;
      out << code << '\t' << DistributionSet::kNames[i] << '\t'
          << format_fixed(report.per_distribution_emd[i], 8) << '\t' << (ok ? "true" : "false")
          << '\n';
    }
  }
}

InfoBalanceReport information_balance(std::span<const LanguagePartition> partitions,
                                      const SubwordVocabulary& vocab) {
  if (partitions.size() < 3) {
    throw ValidationError("information_balance: need at least 3 partitions");
  }
  InfoBalanceReport report;
  for (const auto& p : partitions) {
    const auto st = token_stats(vocab, p);
    if (st.total == 0) {
      throw ValidationError("information_balance: partition '" + p.meta.code +
                            "' has no tokens");
    }
    report.per_language_total_tokens[p.meta.code] = st.total;
    report.per_language_unique_tokens[p.meta.code] = st.unique;
  }
  std::vector<double> totals, uniques;
  for (const auto& [code, total] : report.per_language_total_tokens) {
    auto it = report.per_language_unique_tokens.find(code);
    if (it == report.per_language_unique_tokens.end()) continue;
    totals.push_back(static_cast<double>(total));
    uniques.push_back(static_cast<double>(it->second));
  }
  report.pearson_r = stats::pearson_r(totals, uniques);
  return report;
}

void write_partition(const fs::path& dir, const LanguagePartition& partition) {
  fs::create_directories(dir);
  const std::string code = partition.meta.code;
  {
    std::ofstream out(dir / (code + std::string(kPartitionSuffix)), std::ios::binary);
    if (!out) throw IoError("cannot write partition for " + code);
    out << partition.text();
  }
  std::ofstream meta(dir / (code + std::string(kMetaSuffix)), std::ios::binary);
  if (!meta) throw IoError("cannot write partition meta for " + code);
  meta << "code=" << code << '\n'
       << "family=" << partition.meta.family << '\n'
       << "script=" << partition.meta.script << '\n'
       << "char_count=" << partition.char_count << '\n'
       << "seed=" << partition.sample_seed << '\n'
       << "budget=" << partition.target_budget << '\n';
}

LanguagePartition read_partition(const fs::path& dir, const std::string& code) {
  LanguagePartition part;
  const auto meta_path = dir / (code + std::string(kMetaSuffix));
  std::ifstream meta(meta_path);
  if (!meta) throw IoError("cannot open " + meta_path.string());
  std::string line;
  std::map<std::string, std::string> kv;
  while (std::getline(meta, line)) {
    strip_cr(line);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  auto need = [&](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw ValidationError(meta_path.string() + ": missing key " + key);
    return it->second;
  };
  part.meta.code = need("code");
  part.meta.family = need("family");
  part.meta.script = need("script");
  part.meta.validate();
  part.target_budget = static_cast<std::size_t>(parse_int(need("budget"), "budget"));
  part.sample_seed = static_cast<std::uint64_t>(parse_int(need("seed"), "seed"));
  const auto declared = static_cast<std::size_t>(parse_int(need("char_count"), "char_count"));

  const auto text_path = dir / (code + std::string(kPartitionSuffix));
  const std::string content = read_file(text_path);
  if (auto bad = utf8::find_invalid(content)) {
    throw ValidationError(text_path.string() + ": invalid UTF-8 at byte offset " +
                          std::to_string(*bad));
  }
  std::istringstream in(content);
  while (std::getline(in, line)) {
    strip_cr(line);
    if (line.empty()) continue;
    part.char_count += utf8::length(line);
    part.sentences.push_back(line);
  }
  if (part.char_count != declared) {
    throw ValidationError(meta_path.string() + ": char_count " + std::to_string(declared) +
                          " does not match text (" + std::to_string(part.char_count) + ")");
  }
  return part;
}

std::vector<LanguagePartition> read_partitions(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<std::string> codes;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.size() > kMetaSuffix.size() && name.ends_with(kMetaSuffix)) {
      codes.push_back(name.substr(0, name.size() - kMetaSuffix.size()));
    }
  }
  std::sort(codes.begin(), codes.end());
  std::vector<LanguagePartition> out;
  for (const auto& code : codes) out.push_back(read_partition(dir, code));
  return out;
}

}  // namespace xling
