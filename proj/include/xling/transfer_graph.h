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

// The complete directed bilingual pretraining graph. Edge weights are
// relative MRR gains of the target language from bilingual pretraining with
// the source; nodes aggregate them into donation (outgoing) and recipience
// (incoming) scores.

#ifndef XLING_TRANSFER_GRAPH_H_
#define XLING_TRANSFER_GRAPH_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "xling/language.h"
#include "xling/score_matrix.h"
#include "xling/stats.h"

namespace xling {

enum class TransferBin { kNegative, kNeutral, kPositive, kVeryPositive };
inline constexpr std::array<TransferBin, 4> kAllBins = {
    TransferBin::kNegative, TransferBin::kNeutral, TransferBin::kPositive,
    TransferBin::kVeryPositive};
// Lower borders (percent) of Neutral, Positive and VeryPositive. Each border
// belongs to the bin above it.
inline constexpr std::array<double, 3> kBinBorders = {-10.0, 10.0, 55.0};

TransferBin bin_for_percent(double ft_percent);
std::string_view to_string(TransferBin b);
TransferBin parse_bin(std::string_view s);

enum class BloodType { kO, kABPlus, kUniversal, kIsolate };
// Zero counts as positive on both axes.
BloodType classify_blood_type(double donation, double recipience);
std::string_view to_string(BloodType b);
BloodType parse_blood_type(std::string_view s);

struct TransferEdge {
  std::string source;
  std::string target;
  double ft = 0.0;
  double ft_percent = 0.0;
  TransferBin bin = TransferBin::kNeutral;
  bool operator==(const TransferEdge&) const = default;
};

struct LanguageNode {
  LanguageMeta meta;
  double mono_mrr = 0.0;
  double donation = 0.0;
  double recipience = 0.0;
  BloodType blood_type = BloodType::kUniversal;
  bool operator==(const LanguageNode&) const = default;
};

struct GraphMeta {
  std::string provenance;
  std::vector<std::uint64_t> seeds;
  std::string regime;
  std::string created_at;
  bool operator==(const GraphMeta&) const = default;
};

struct TransferGraph {
  std::map<std::string, LanguageNode> nodes;
  std::map<LanguagePair, TransferEdge> edges;
  GraphMeta meta;

  const LanguageNode& node(const std::string& code) const;
  const TransferEdge& edge(const std::string& source, const std::string& target) const;
  std::vector<std::string> codes() const;
  bool operator==(const TransferGraph&) const = default;
};

// (bilingual(s, t) - mono(t)) / mono(t), unquantized.
double finetune_score(const ScoreMatrix& matrix, const std::string& source,
                      const std::string& target);

// Rounds each edge ft onto a dyadic grid fine enough that every sum over any
// subset of edges is exact in double precision, so that
// sum(donation) == sum(recipience) == sum(ft) holds bit for bit regardless
// of summation order. The rounding error per edge is below 2^-45 * max|ft|
// for graphs of up to 64 edges.
TransferGraph build_graph(const ScoreMatrix& matrix, const MetaTable& metas,
                          std::string created_at = "1970-01-01T00:00:00Z");

struct Asymmetry {
  double delta = 0.0;  // ft(l1 -> l2) - ft(l2 -> l1)
  bool sign_flip = false;
};
Asymmetry detect_asymmetry(const TransferGraph& graph, const std::string& l1,
                           const std::string& l2);

struct CorrelationResult {
  double r = 0.0;
  stats::TestResult test;
  std::size_t n = 0;
};

// Pearson r over unordered pairs {a < b} of (ft(a -> b), ft(b -> a)).
CorrelationResult reciprocity_correlation(const TransferGraph& graph);

struct MonoCorrelations {
  CorrelationResult as_source;  // mono MRR vs mean outgoing ft
  CorrelationResult as_target;  // mono MRR vs mean incoming ft
};
MonoCorrelations mono_correlations(const TransferGraph& graph);

struct FactorAnalysis {
  std::string factor;  // "script" or "family"
  // Rows {shared, not_shared} x the four bins.
  stats::ContingencyTable table;
  // Chi-square over the non-empty bin columns. With fewer than two such
  // columns or an empty row the result is degenerate: statistic 0, p 1.
  stats::TestResult test;
};
struct ScriptFamilyAnalysis {
  FactorAnalysis script;
  FactorAnalysis family;
};
ScriptFamilyAnalysis script_family_analysis(const TransferGraph& graph);

using BinCounts = std::array<std::size_t, 4>;  // indexed by TransferBin
BinCounts bin_histogram(const TransferGraph& graph);

// Graph document (see schema/graph.schema.json).
nlohmann::json graph_to_json(const TransferGraph& graph);
TransferGraph graph_from_json(const nlohmann::json& doc);
void export_graph(const TransferGraph& graph, const std::filesystem::path& path);
TransferGraph load_graph(const std::filesystem::path& path);

// Analytics report document: reciprocity, mono correlations, bins, chi-square.
nlohmann::json analytics_to_json(const TransferGraph& graph);

}  // namespace xling

#endif  // XLING_TRANSFER_GRAPH_H_
