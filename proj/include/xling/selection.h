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

// Pretraining-set selection from donation scores, zero-shot aggregation of
// downstream results, and the donor/recipient hypothesis checks.

#ifndef XLING_SELECTION_H_
#define XLING_SELECTION_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "json.hpp"
#include "xling/score_matrix.h"
#include "xling/stats.h"
#include "xling/transfer_graph.h"

namespace xling {

enum class SelectionMode { kMostDonating, kLeastDonating, kRandom, kControl };
std::string_view to_string(SelectionMode m);
SelectionMode parse_selection_mode(std::string_view s);

struct PretrainConfig {
  static constexpr std::uint64_t kDefaultBudget = 100'000'000;
  // Downstream finetuning caps (sentences per language).
  static constexpr int kPosSentenceCap = 1000;
  static constexpr int kNerSentenceCap = 5000;

  std::string id;
  std::vector<std::string> donors;
  std::vector<std::string> recipients_high;
  std::vector<std::string> recipients_low;
  std::uint64_t budget_chars = kDefaultBudget;
  SelectionMode mode = SelectionMode::kControl;

  // donors, then R_h, then R_l, without duplicates.
  std::vector<std::string> languages() const;
  // Equal split of budget_chars (floor) over languages().
  std::map<std::string, std::uint64_t> allocation() const;
  // Donors disjoint from recipients; control has no donors.
  void validate() const;
};

nlohmann::json manifest_to_json(const PretrainConfig& config);
PretrainConfig config_from_json(const nlohmann::json& doc);
void write_manifest(const std::filesystem::path& path, const PretrainConfig& config);
PretrainConfig read_manifest(const std::filesystem::path& path);

// Languages by donation descending, ties by code ascending.
std::vector<std::string> rank_donors(const TransferGraph& graph);

struct SelectionRequest {
  std::size_t k = 4;
  SelectionMode mode = SelectionMode::kMostDonating;
  std::size_t min_families = 3;
  std::set<std::string> excluded;
  // Always part of the result and counted towards k.
  std::vector<std::string> force_include;
  std::uint64_t seed = 0;
};

// Donors in selection order. Most/least donating scan languages by
// donation and skip any pick that would leave the remaining slots unable
// to reach min_families distinct families; this is optimal for the sum of
// donation because the feasible sets are the bases of a matroid. Random
// draws uniformly among feasible sets. Control returns no donors. Throws
// InfeasibleError when no k-set reaches min_families.
std::vector<std::string> select_pretrain_set(const TransferGraph& graph,
                                             const SelectionRequest& request);

double donation_sum(const TransferGraph& graph, std::span<const std::string> codes);

struct RecipientSplit {
  std::vector<std::string> high;
  std::vector<std::string> low;
};
// Orders codes by recipience (descending, ties by code) and puts the first
// ceil(n/2) into the high group.
RecipientSplit split_recipients(const TransferGraph& graph, std::span<const std::string> codes);

// Runs the selection and wraps it into a validated config. With both
// recipient groups empty the excluded codes are split by recipience.
PretrainConfig make_pretrain_config(const TransferGraph& graph, const SelectionRequest& request,
                                    std::string id, RecipientSplit recipients,
                                    std::uint64_t budget_chars = PretrainConfig::kDefaultBudget);

// Per-(config, source, target) F1 averaged over seeds, for one task.
struct DownstreamResults {
  using Key = std::tuple<std::string, std::string, std::string>;  // config, source, target

  std::string task;
  std::map<Key, double> scores;
  std::size_t seeds = 0;

  double at(const std::string& config_id, const std::string& source,
            const std::string& target) const;
};

// TSV `config_id<TAB>task<TAB>source<TAB>target<TAB>f1<TAB>seed`; results
// are grouped by task and averaged over seeds.
std::map<std::string, DownstreamResults> read_downstream_results(const std::filesystem::path& path);
std::map<std::string, DownstreamResults> parse_downstream_results(std::string_view content,
                                                                  std::string_view source_name);

// Mean over the |D|^2 - |D| ordered zero-shot pairs of D.
double zero_shot_score(const DownstreamResults& results, const std::string& config_id,
                       std::span<const std::string> languages);
// Mean of the monolingual (source == target) scores over C.
double monolingual_score(const DownstreamResults& results, const std::string& config_id,
                         std::span<const std::string> languages);

enum class HypothesisId { kEq3, kEq7, kEq8, kEq9, kEq10 };
std::string_view to_string(HypothesisId id);

enum class Verdict { kYes, kNo, kPartial };
std::string_view to_string(Verdict v);

struct Comparison {
  std::string label;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;  // lhs - rhs, oriented so that the claim wants > 0
  bool holds = false;
  bool tie = false;
};

struct HypothesisResult {
  HypothesisId hypothesis_id = HypothesisId::kEq9;
  Verdict satisfied = Verdict::kNo;
  std::vector<double> margins;
  std::vector<Comparison> details;
  std::string task;
  std::string variant;
};

nlohmann::json hypothesis_to_json(const HypothesisResult& result);

// Z_P(R_h) > Z_P(R_l) for every config P.
HypothesisResult check_recipience_hypothesis(const DownstreamResults& results,
                                             std::span<const std::string> config_ids,
                                             std::span<const std::string> recipients_high,
                                             std::span<const std::string> recipients_low);

// Z_most(C) > Z_random(C) > Z_least(C); ties are violations flagged as ties.
HypothesisResult check_donation_hypothesis(const DownstreamResults& results,
                                           const std::string& most_id,
                                           const std::string& random_id,
                                           const std::string& least_id,
                                           std::span<const std::string> languages);

// A larger donation sum over a pretraining set implies a zero-shot score at
// least as high over D. Returns the donors-only and the full-set variants.
std::vector<HypothesisResult> check_donation_sum_hypothesis(
    const TransferGraph& graph, const DownstreamResults& results,
    std::span<const PretrainConfig> configs, std::span<const std::string> languages);

struct Observation {
  std::string config_id;
  std::vector<std::string> languages;
};

struct ProportionalityResult {
  double pearson = 0.0;
  double spearman = 0.0;
  stats::TestResult test;  // for the Pearson coefficient
  std::size_t n = 0;
  // Positive Pearson correlation with p < 0.05.
  bool satisfied = false;
  std::vector<double> recipience_sums;
  std::vector<double> zero_shot;
};

ProportionalityResult recipience_proportionality(const TransferGraph& graph,
                                                 const DownstreamResults& results,
                                                 std::span<const Observation> observations);
HypothesisResult to_hypothesis(const ProportionalityResult& result);

struct MonotonicityStep {
  std::vector<std::string> pretrain_set;
  // mono[l] holds the MRR on l of a model pretrained on pretrain_set.
  ScoreMatrix matrix;
};

// Orders the steps by set size and checks mean MRR over D never drops as
// the pretraining set grows. Throws ValidationError for non-nested sets.
// Runs every check the configs allow, per task: Eq9 over all configs, Eq10
// when most/random/least configs exist, Eq8 (both variants) over configs,
// Eq7 over (config, R_h | R_l | R_h+R_l) observations. All configs must
// share one recipient split.
std::vector<HypothesisResult> evaluate_hypotheses(
    const TransferGraph& graph, const std::map<std::string, DownstreamResults>& results,
    std::span<const PretrainConfig> configs);

HypothesisResult monotonicity_probe(std::span<const MonotonicityStep> steps,
                                    std::span<const std::string> languages);

}  // namespace xling

#endif  // XLING_SELECTION_H_
