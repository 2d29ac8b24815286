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

#include "xling/transfer_graph.h"

#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

#include "xling/error.h"

namespace xling {
namespace {

using nlohmann::json;

constexpr std::string_view kTieRule =
    "donation >= 0 counts as donating; recipience >= 0 counts as receiving";
constexpr std::string_view kAggregation =
    "donation and recipience are sums of edge ft; mono correlations use per-node means";

// Smallest p with |x| < 2^p (x != 0).
int magnitude_exponent(double x) {
  int p = 0;
  std::frexp(x, &p);
  return p;
}

double quantize(double v, int exponent) {
  return std::ldexp(std::nearbyint(std::ldexp(v, -exponent)), exponent);
}

// Sums in canonical order: nodes by code, edges by (source, target).
bool sums_agree(const TransferGraph& g) {
  double don = 0.0, rec = 0.0, ft = 0.0;
  for (const auto& [code, n] : g.nodes) {
    don += n.donation;
    rec += n.recipience;
  }
  for (const auto& [key, e] : g.edges) ft += e.ft;
  return don == rec && rec == ft;
}

FactorAnalysis analyze_factor(const TransferGraph& graph, const std::string& factor) {
  FactorAnalysis fa;
  fa.factor = factor;
  fa.table.rows = {"shared", "not_shared"};
  for (auto b : kAllBins) fa.table.cols.emplace_back(to_string(b));
  fa.table.counts.assign(2, std::vector<std::int64_t>(4, 0));
  for (const auto& [key, e] : graph.edges) {
    const auto& a = graph.node(e.source).meta;
    const auto& b = graph.node(e.target).meta;
    const bool shared = factor == "script" ? a.script == b.script : a.family == b.family;
    ++fa.table.counts[shared ? 0 : 1][static_cast<std::size_t>(e.bin)];
  }
  stats::ContingencyTable reduced;
  reduced.rows = fa.table.rows;
  reduced.counts.assign(2, {});
  for (std::size_t j = 0; j < 4; ++j) {
    if (fa.table.counts[0][j] + fa.table.counts[1][j] == 0) continue;
    reduced.cols.push_back(fa.table.cols[j]);
    reduced.counts[0].push_back(fa.table.counts[0][j]);
    reduced.counts[1].push_back(fa.table.counts[1][j]);
  }
  auto row_total = [&](std::size_t i) {
    std::int64_t t = 0;
    for (auto c : reduced.counts[i]) t += c;
    return t;
  };
  if (reduced.cols.size() < 2 || row_total(0) == 0 || row_total(1) == 0) {
    fa.test.statistic = 0.0;
    fa.test.df = 0;
    fa.test.p_value = 1.0;
    fa.test.degenerate = true;
  } else {
    fa.test = stats::chi_square(reduced);
  }
  return fa;
}

json test_to_json(const stats::TestResult& t) {
  json j = {{"df", t.df}, {"p_value", t.p_value}, {"degenerate", t.degenerate}};
  j["statistic"] = std::isfinite(t.statistic) ? json(t.statistic) : json(nullptr);
  return j;
}

json correlation_to_json(const CorrelationResult& c) {
  return {{"r", c.r}, {"n", c.n}, {"test", test_to_json(c.test)}};
}

json factor_to_json(const FactorAnalysis& fa) {
  json counts = json::object();
  for (std::size_t i = 0; i < fa.table.rows.size(); ++i) {
    json row = json::object();
    for (std::size_t j = 0; j < fa.table.cols.size(); ++j) {
      row[fa.table.cols[j]] = fa.table.counts[i][j];
    }
    counts[fa.table.rows[i]] = row;
  }
  return {{"factor", fa.factor}, {"counts", counts}, {"chi_square", test_to_json(fa.test)}};
}

}  // namespace

TransferBin bin_for_percent(double ft_percent) {
  if (ft_percent < kBinBorders[0]) return TransferBin::kNegative;
  if (ft_percent < kBinBorders[1]) return TransferBin::kNeutral;
  if (ft_percent < kBinBorders[2]) return TransferBin::kPositive;
  return TransferBin::kVeryPositive;
}

std::string_view to_string(TransferBin b) {
  switch (b) {
    case TransferBin::kNegative: return "Negative";
    case TransferBin::kNeutral: return "Neutral";
    case TransferBin::kPositive: return "Positive";
    case TransferBin::kVeryPositive: return "VeryPositive";
  }
  return "Neutral";
}

TransferBin parse_bin(std::string_view s) {
  for (auto b : kAllBins) {
    if (to_string(b) == s) return b;
  }
  throw ValidationError("unknown transfer bin '" + std::string(s) + "'");
}

BloodType classify_blood_type(double donation, double recipience) {
  const bool donates = donation >= 0.0;
  const bool receives = recipience >= 0.0;
  if (donates && !receives) return BloodType::kO;
  if (!donates && receives) return BloodType::kABPlus;
  if (donates) return BloodType::kUniversal;
  return BloodType::kIsolate;
}

std::string_view to_string(BloodType b) {
  switch (b) {
    case BloodType::kO: return "O";
    case BloodType::kABPlus: return "ABplus";
    case BloodType::kUniversal: return "Universal";
    case BloodType::kIsolate: return "Isolate";
  }
  return "Isolate";
}

BloodType parse_blood_type(std::string_view s) {
  for (auto b : {BloodType::kO, BloodType::kABPlus, BloodType::kUniversal, BloodType::kIsolate}) {
    if (to_string(b) == s) return b;
  }
  if (s == "AB+") return BloodType::kABPlus;
  throw ValidationError("unknown blood type '" + std::string(s) + "'");
}

const LanguageNode& TransferGraph::node(const std::string& code) const {
  auto it = nodes.find(code);
  if (it == nodes.end()) throw ValidationError("unknown language '" + code + "'");
  return it->second;
}

const TransferEdge& TransferGraph::edge(const std::string& source,
                                        const std::string& target) const {
  auto it = edges.find({source, target});
  if (it == edges.end()) throw ValidationError("no edge " + source + " -> " + target);
  return it->second;
}

std::vector<std::string> TransferGraph::codes() const {
  std::vector<std::string> out;
  for (const auto& [code, _] : nodes) out.push_back(code);
  return out;
}

double finetune_score(const ScoreMatrix& matrix, const std::string& source,
                      const std::string& target) {
  if (source == target) throw ValidationError("finetune_score: source equals target");
  auto mono = matrix.mono.find(target);
  if (mono == matrix.mono.end() || mono->second == 0.0) {
    throw ValidationError("finetune_score: missing or zero monolingual MRR for '" + target + "'");
  }
  auto bi = matrix.bilingual.find({source, target});
  if (bi == matrix.bilingual.end()) {
    throw ValidationError("finetune_score: missing bilingual entry " + source + " -> " + target);
  }
  return (bi->second - mono->second) / mono->second;
}

TransferGraph build_graph(const ScoreMatrix& matrix, const MetaTable& metas,
                          std::string created_at) {
  matrix.validate();
  if (!matrix.complete()) throw ValidationError("build_graph: score matrix is incomplete");
  const auto& langs = matrix.languages;

  std::map<LanguagePair, double> raw;
  double abs_sum = 0.0;
  for (const auto& s : langs) {
    for (const auto& t : langs) {
      if (s == t) continue;
      const double ft = finetune_score(matrix, s, t);
      raw[{s, t}] = ft;
      abs_sum += std::fabs(ft);
    }
  }

  TransferGraph g;
  g.meta.provenance = std::string(to_string(matrix.provenance));
  g.meta.seeds = matrix.seeds;
  g.meta.regime = matrix.regime;
  g.meta.created_at = std::move(created_at);
  for (const auto& code : langs) {
    auto it = metas.find(code);
    if (it == metas.end()) throw ValidationError("build_graph: no metadata for language '" + code + "'");
    it->second.validate();
    LanguageNode node;
    node.meta = it->second;
    node.mono_mrr = matrix.mono.at(code);
    g.nodes.emplace(code, std::move(node));
  }
  auto fill = [&](std::optional<int> exponent) {
    for (auto& [code, node] : g.nodes) node.donation = node.recipience = 0.0;
    g.edges.clear();
    for (const auto& [key, ft_raw] : raw) {
      TransferEdge e;
      e.source = key.first;
      e.target = key.second;
      e.ft = exponent ? quantize(ft_raw, *exponent) : ft_raw;
      e.ft_percent = 100.0 * e.ft;
      e.bin = bin_for_percent(e.ft_percent);
      g.nodes[e.source].donation += e.ft;
      g.nodes[e.target].recipience += e.ft;
      g.edges.emplace(key, std::move(e));
    }
  };
  fill(std::nullopt);
  if (abs_sum > 0.0 && !sums_agree(g)) {
    // Every partial sum is bounded by sum |ft| < 2^p, plus rounding growth
    // that stays below 2^p again. Multiples of 2^(p - 52) under 2^(p + 1)
    // are exact doubles, so the identity then holds in any order. Each ft
    // moves by at most 2^(p - 53).
    fill(magnitude_exponent(abs_sum) - 52);
  }
  for (auto& [code, node] : g.nodes) {
    node.blood_type = classify_blood_type(node.donation, node.recipience);
  }
  return g;
}

Asymmetry detect_asymmetry(const TransferGraph& graph, const std::string& l1,
                           const std::string& l2) {
  const double a = graph.edge(l1, l2).ft;
  const double b = graph.edge(l2, l1).ft;
  return {a - b, (a > 0.0 && b < 0.0) || (a < 0.0 && b > 0.0)};
}

CorrelationResult reciprocity_correlation(const TransferGraph& graph) {
  std::vector<double> fwd, back;
  const auto codes = graph.codes();
  for (std::size_t i = 0; i < codes.size(); ++i) {
    for (std::size_t j = i + 1; j < codes.size(); ++j) {
      fwd.push_back(graph.edge(codes[i], codes[j]).ft);
      back.push_back(graph.edge(codes[j], codes[i]).ft);
    }
  }
  if (fwd.size() < 3) throw ValidationError("reciprocity_correlation: need >= 3 language pairs");
  CorrelationResult out;
  out.n = fwd.size();
  out.r = stats::pearson_r(fwd, back);
  out.test = stats::t_test_correlation(out.r, static_cast<int>(out.n));
  return out;
}

MonoCorrelations mono_correlations(const TransferGraph& graph) {
  if (graph.nodes.size() < 3) throw ValidationError("mono_correlations: need >= 3 languages");
  const double degree = static_cast<double>(graph.nodes.size() - 1);
  std::vector<double> mono, out_mean, in_mean;
  for (const auto& [code, node] : graph.nodes) {
    mono.push_back(node.mono_mrr);
    out_mean.push_back(node.donation / degree);
    in_mean.push_back(node.recipience / degree);
  }
  MonoCorrelations out;
  const int n = static_cast<int>(mono.size());
  out.as_source.n = out.as_target.n = mono.size();
  out.as_source.r = stats::pearson_r(mono, out_mean);
  out.as_source.test = stats::t_test_correlation(out.as_source.r, n);
  out.as_target.r = stats::pearson_r(mono, in_mean);
  out.as_target.test = stats::t_test_correlation(out.as_target.r, n);
  return out;
}

ScriptFamilyAnalysis script_family_analysis(const TransferGraph& graph) {
  for (const auto& [code, node] : graph.nodes) node.meta.validate();
  return {analyze_factor(graph, "script"), analyze_factor(graph, "family")};
}

BinCounts bin_histogram(const TransferGraph& graph) {
  BinCounts counts{};
  for (const auto& [key, e] : graph.edges) ++counts[static_cast<std::size_t>(e.bin)];
  return counts;
}

json graph_to_json(const TransferGraph& g) {
  json languages = json::array();
  for (const auto& [code, n] : g.nodes) {
    languages.push_back({{"code", code},
                         {"family", n.meta.family},
                         {"script", n.meta.script},
                         {"mono_mrr", n.mono_mrr},
                         {"donation", n.donation},
                         {"recipience", n.recipience},
                         {"blood_type", to_string(n.blood_type)},
                         {"wals", n.meta.wals}});
  }
  json edges = json::array();
  for (const auto& [key, e] : g.edges) {
    edges.push_back({{"source", e.source},
                     {"target", e.target},
                     {"ft", e.ft},
                     {"ft_percent", e.ft_percent},
                     {"bin", to_string(e.bin)}});
  }
  json meta = {
      {"provenance", g.meta.provenance},
      {"seeds", g.meta.seeds},
      {"regime", g.meta.regime},
      {"created_at", g.meta.created_at},
      {"conventions",
       {{"bin_borders", kBinBorders},
        {"blood_type_tie_rule", kTieRule},
        {"correlation_aggregation", kAggregation},
        {"invented_blood_types", {"Universal", "Isolate"}}}}};
  return {{"languages", languages}, {"edges", edges}, {"meta", meta}};
}

TransferGraph graph_from_json(const json& doc) {
  try {
    TransferGraph g;
    for (const auto& l : doc.at("languages")) {
      LanguageNode n;
      n.meta.code = l.at("code").get<std::string>();
      n.meta.family = l.at("family").get<std::string>();
      n.meta.script = l.at("script").get<std::string>();
      if (l.contains("wals")) n.meta.wals = l.at("wals").get<std::map<std::string, std::string>>();
      n.meta.validate();
      n.mono_mrr = l.at("mono_mrr").get<double>();
      n.donation = l.at("donation").get<double>();
      n.recipience = l.at("recipience").get<double>();
      n.blood_type = parse_blood_type(l.at("blood_type").get<std::string>());
      const std::string code = n.meta.code;
      if (!g.nodes.emplace(code, std::move(n)).second) {
        throw ValidationError("graph document: duplicate language '" + code + "'");
      }
    }
    for (const auto& j : doc.at("edges")) {
      TransferEdge e;
      e.source = j.at("source").get<std::string>();
      e.target = j.at("target").get<std::string>();
      e.ft = j.at("ft").get<double>();
      e.ft_percent = j.at("ft_percent").get<double>();
      e.bin = parse_bin(j.at("bin").get<std::string>());
      if (!g.nodes.count(e.source) || !g.nodes.count(e.target) || e.source == e.target) {
        throw ValidationError("graph document: bad edge " + e.source + " -> " + e.target);
      }
      if (bin_for_percent(e.ft_percent) != e.bin) {
        throw ValidationError("graph document: bin of " + e.source + " -> " + e.target +
                              " is inconsistent with ft_percent");
      }
      g.edges[{e.source, e.target}] = std::move(e);
    }
    if (g.edges.size() != g.nodes.size() * (g.nodes.size() - (g.nodes.empty() ? 0 : 1))) {
      throw ValidationError("graph document: graph is not complete");
    }
    const auto& meta = doc.at("meta");
    g.meta.provenance = meta.at("provenance").get<std::string>();
    g.meta.seeds = meta.at("seeds").get<std::vector<std::uint64_t>>();
    g.meta.regime = meta.at("regime").get<std::string>();
    g.meta.created_at = meta.at("created_at").get<std::string>();
    return g;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("graph document: ") + e.what());
  }
}

void export_graph(const TransferGraph& graph, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write graph " + path.string());
  out << graph_to_json(graph).dump(2) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

TransferGraph load_graph(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open graph " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  return graph_from_json(doc);
}

json analytics_to_json(const TransferGraph& graph) {
  json out = json::object();
  auto guarded = [&](const char* key, auto&& fn) {
    try {
      out[key] = fn();
    } catch (const ValidationError& e) {
      out[key] = {{"error", e.what()}};
    }
  };
  guarded("reciprocity", [&] { return correlation_to_json(reciprocity_correlation(graph)); });
  guarded("mono_correlations", [&] {
    const auto mc = mono_correlations(graph);
    return json{{"as_source", correlation_to_json(mc.as_source)},
                {"as_target", correlation_to_json(mc.as_target)}};
  });
  json bins = json::object();
  const auto counts = bin_histogram(graph);
  for (auto b : kAllBins) bins[std::string(to_string(b))] = counts[static_cast<std::size_t>(b)];
  out["bin_histogram"] = bins;
  guarded("script_family", [&] {
    const auto sf = script_family_analysis(graph);
    return json{{"script", factor_to_json(sf.script)}, {"family", factor_to_json(sf.family)}};
  });
  return out;
}

}  // namespace xling
