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

// MLM corruption protocol plus a count-based stand-in for a masked language
// model. The stand-in is a back-off n-gram predictor with additive
// smoothing, scored by mean reciprocal rank of the gold token at corrupted
// positions given the (corrupted) left context.

#ifndef XLING_PROXY_MLM_H_
#define XLING_PROXY_MLM_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "xling/language.h"
#include "xling/score_matrix.h"
#include "xling/subword.h"

namespace xling {

struct MaskingPolicy {
  double select_rate = 0.15;
  double mask_frac = 0.8;
  double random_frac = 0.1;
  double keep_frac = 0.1;
  std::size_t max_seq_len = 128;

  void validate() const;
};

struct MaskedSequence {
  std::vector<int> input_ids;
  // (position, original id) for every selected position.
  std::vector<std::pair<std::size_t, int>> gold;
};

// Truncates to max_seq_len, then selects each non-special position with
// probability select_rate and replaces it by [MASK], a random non-special
// id, or itself per the policy split. Deterministic in (ids, seed).
MaskedSequence apply_masking(std::span<const int> ids, const MaskingPolicy& policy,
                             std::uint64_t seed, std::size_t vocab_size);

struct ProxyConfig {
  int order = 3;
  double smoothing_alpha = 0.1;
  // Sequential regime: weight kept on the initializing model's counts.
  double decay = 0.5;

  void validate() const;
};

class ProxyModel {
 public:
  struct Successors {
    double total = 0.0;
    std::unordered_map<int, double> next;
    bool operator==(const Successors&) const = default;
  };
  // Context (0 .. order-1 ids, oldest first) -> successor counts.
  using CountTable = std::map<std::vector<int>, Successors>;

  ProxyModel(int order, double smoothing_alpha, std::size_t vocab_size);

  int order() const { return order_; }
  double smoothing_alpha() const { return alpha_; }
  std::size_t vocab_size() const { return vocab_size_; }
  const CountTable& counts() const { return counts_; }

  // Adds one sequence; a [CLS] is prepended and every real position is
  // counted under all context lengths 0 .. order-1.
  void accumulate(std::span<const int> ids, double weight = 1.0);
  // Scales every count by `lambda`, dropping entries that reach zero.
  void decay(double lambda);

  // Back-off distribution over all ids. The empty model is uniform. Each
  // observed suffix of `context` (shortest first, at most order-1 ids)
  // assigns (c + alpha) / (total + alpha * V) to its seen successors and
  // spreads the remaining alpha * (V - seen) / (total + alpha * V) over the
  // other ids in proportion to the shorter context's distribution.
  void distribution(std::span<const int> context, std::vector<double>& out) const;
  double probability(std::span<const int> context, int token) const;
  // Competition rank: 1 + number of ids with strictly higher probability.
  std::size_t rank(std::span<const int> context, int token) const;

  bool operator==(const ProxyModel&) const = default;

 private:
  int order_;
  double alpha_;
  std::size_t vocab_size_;
  CountTable counts_;

  std::vector<const Successors*> chain(std::span<const int> context) const;
};

using TokenizedCorpus = std::vector<std::vector<int>>;

TokenizedCorpus tokenize_sentences(const SubwordVocabulary& vocab,
                                   std::span<const std::string> sentences);

// Joint mode (no init_from): counts over all partitions. Sequential mode:
// init_from's counts decayed by config.decay, then the partitions' counts
// added. Throws ValidationError when `partitions` is empty.
ProxyModel train_proxy(std::span<const LanguagePartition> partitions,
                       const SubwordVocabulary& vocab, const ProxyConfig& config,
                       const ProxyModel* init_from = nullptr);

// Mean reciprocal rank of all gold positions, each ranked under its left
// context in input_ids (callers include any leading [CLS]). Throws on an
// empty set.
double evaluate_mrr(const ProxyModel& model, std::span<const MaskedSequence> eval_set);

enum class Regime { kJoint, kSequential };
std::string_view to_string(Regime r);
Regime parse_regime(std::string_view s);

struct ScoringOptions {
  MaskingPolicy policy;
  ProxyConfig config;
  Regime regime = Regime::kJoint;
  // Trailing fraction of each partition's sentences held out for evaluation.
  double holdout_fraction = 0.1;
  // 0 = hardware concurrency.
  unsigned threads = 0;
};

// Scores mono[l] for every language and bilingual[(s, t)] for every ordered
// pair, averaged over `seeds`. Joint: one model per unordered pair,
// evaluated on both members. Sequential: one model per ordered pair,
// initialized from the source's monolingual model. Output is independent of
// thread scheduling.
ScoreMatrix score_all_pairs(std::span<const LanguagePartition> partitions,
                            const SubwordVocabulary& vocab, std::span<const std::uint64_t> seeds,
                            const ScoringOptions& options = {});

// MRR on each of `eval_codes` of one model trained jointly on the training
// slices of `pretrain_codes`, averaged over seeds.
std::map<std::string, double> score_pretrain_set(std::span<const LanguagePartition> partitions,
                                                 const std::vector<std::string>& pretrain_codes,
                                                 const std::vector<std::string>& eval_codes,
                                                 const SubwordVocabulary& vocab,
                                                 std::span<const std::uint64_t> seeds,
                                                 const ScoringOptions& options = {});

}  // namespace xling

#endif  // XLING_PROXY_MLM_H_
