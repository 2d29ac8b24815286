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

#include "xling/selection.h"

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

#include "xling/error.h"
#include "xling/text_util.h"

namespace xling {
namespace {

using nlohmann::json;

constexpr int kRandomAttempts = 1000;

Verdict verdict(const std::vector<Comparison>& details) {
  const auto holding = std::count_if(details.begin(), details.end(),
                                     [](const Comparison& c) { return c.holds; });
  if (holding == static_cast<std::ptrdiff_t>(details.size())) return Verdict::kYes;
  if (holding == 0) return Verdict::kNo;
  return Verdict::kPartial;
}

Comparison strictly_greater(std::string label, double lhs, double rhs) {
  Comparison c{std::move(label), lhs, rhs, lhs - rhs, lhs > rhs, lhs == rhs};
  return c;
}

Comparison at_most(std::string label, double lower, double upper) {
  // lower <= upper, margin oriented as upper - lower.
  Comparison c{std::move(label), upper, lower, upper - lower, lower <= upper, lower == upper};
  return c;
}

HypothesisResult finish(HypothesisId id, std::string task, std::vector<Comparison> details) {
  HypothesisResult r;
  r.hypothesis_id = id;
  r.task = std::move(task);
  for (const auto& c : details) r.margins.push_back(c.margin);
  r.satisfied = verdict(details);
  r.details = std::move(details);
  return r;
}

std::string set_label(std::span<const std::string> codes) {
  return "{" + join(std::vector<std::string>(codes.begin(), codes.end()), ",") + "}";
}

std::size_t distinct_families(const TransferGraph& graph, std::span<const std::string> codes) {
  std::set<std::string> fams;
  for (const auto& c : codes) fams.insert(graph.node(c).meta.family);
  return fams.size();
}

// Greedy scan of `order` filling `slots` more picks on top of `picked`.
std::vector<std::string> greedy_fill(const TransferGraph& graph, std::vector<std::string> picked,
                                     const std::vector<std::string>& order, std::size_t k,
                                     std::size_t min_families) {
  std::set<std::string> fams;
  for (const auto& c : picked) fams.insert(graph.node(c).meta.family);
  for (std::size_t i = 0; i < order.size() && picked.size() < k; ++i) {
    const auto& cand = order[i];
    auto next = fams;
    next.insert(graph.node(cand).meta.family);
    const std::size_t remaining = k - picked.size() - 1;
    std::set<std::string> later;
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      const auto& fam = graph.node(order[j]).meta.family;
      if (!next.count(fam)) later.insert(fam);
    }
    if (next.size() + std::min(remaining, later.size()) < min_families) continue;
    picked.push_back(cand);
    fams = std::move(next);
  }
  return picked;
}

}  // namespace

std::string_view to_string(SelectionMode m) {
  switch (m) {
    case SelectionMode::kMostDonating: return "most_donating";
    case SelectionMode::kLeastDonating: return "least_donating";
    case SelectionMode::kRandom: return "random";
    case SelectionMode::kControl: return "control";
  }
  return "control";
}

SelectionMode parse_selection_mode(std::string_view s) {
  for (auto m : {SelectionMode::kMostDonating, SelectionMode::kLeastDonating,
                 SelectionMode::kRandom, SelectionMode::kControl}) {
    if (to_string(m) == s) return m;
  }
  throw ValidationError("unknown selection mode '" + std::string(s) + "'");
}

std::vector<std::string> PretrainConfig::languages() const {
  std::vector<std::string> out;
  for (const auto* group : {&donors, &recipients_high, &recipients_low}) {
    for (const auto& c : *group) {
      if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
    }
  }
  return out;
}

std::map<std::string, std::uint64_t> PretrainConfig::allocation() const {
  std::map<std::string, std::uint64_t> out;
  const auto langs = languages();
  if (langs.empty()) return out;
  const std::uint64_t share = budget_chars / langs.size();
  for (const auto& c : langs) out[c] = share;
  return out;
}

void PretrainConfig::validate() const {
  if (id.empty()) throw ValidationError("pretraining config has no id");
  if (mode == SelectionMode::kControl && !donors.empty()) {
    throw ValidationError("config '" + id + "': control mode must have no donors");
  }
  for (const auto& d : donors) {
    const bool clash =
        std::count(recipients_high.begin(), recipients_high.end(), d) ||
        std::count(recipients_low.begin(), recipients_low.end(), d);
    if (clash) throw ValidationError("config '" + id + "': donor '" + d + "' is also a recipient");
  }
}

json manifest_to_json(const PretrainConfig& c) {
  json alloc = json::object();
  for (const auto& [code, chars] : c.allocation()) alloc[code] = chars;
  return {{"id", c.id},
          {"mode", to_string(c.mode)},
          {"donors", c.donors},
          {"recipients_high", c.recipients_high},
          {"recipients_low", c.recipients_low},
          {"budget_chars", c.budget_chars},
          {"allocation", alloc},
          {"finetune_sentence_caps",
           {{"POS", PretrainConfig::kPosSentenceCap}, {"NER", PretrainConfig::kNerSentenceCap}}}};
}

PretrainConfig config_from_json(const json& doc) {
  try {
    PretrainConfig c;
    c.id = doc.at("id").get<std::string>();
    c.mode = parse_selection_mode(doc.at("mode").get<std::string>());
    c.donors = doc.at("donors").get<std::vector<std::string>>();
    c.recipients_high = doc.value("recipients_high", std::vector<std::string>{});
    c.recipients_low = doc.value("recipients_low", std::vector<std::string>{});
    c.budget_chars = doc.value("budget_chars", PretrainConfig::kDefaultBudget);
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("manifest: ") + e.what());
  }
}

void write_manifest(const std::filesystem::path& path, const PretrainConfig& config) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write manifest " + path.string());
  out << manifest_to_json(config).dump(2) << '\n';
}

PretrainConfig read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open manifest " + path.string());
  try {
    return config_from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::vector<std::string> rank_donors(const TransferGraph& graph) {
  auto codes = graph.codes();
  std::stable_sort(codes.begin(), codes.end(), [&](const auto& a, const auto& b) {
    const double da = graph.node(a).donation;
    const double db = graph.node(b).donation;
    if (da != db) return da > db;
    return a < b;
  });
  return codes;
}

std::vector<std::string> select_pretrain_set(const TransferGraph& graph,
                                             const SelectionRequest& req) {
  for (const auto& c : req.excluded) graph.node(c);
  if (req.mode == SelectionMode::kControl) return {};

  std::vector<std::string> forced;
  for (const auto& c : req.force_include) {
    graph.node(c);
    if (req.excluded.count(c)) {
      throw ValidationError("language '" + c + "' is both forced and excluded");
    }
    if (std::find(forced.begin(), forced.end(), c) == forced.end()) forced.push_back(c);
  }
  std::vector<std::string> eligible;
  for (const auto& c : graph.codes()) {
    if (!req.excluded.count(c) && std::find(forced.begin(), forced.end(), c) == forced.end()) {
      eligible.push_back(c);
    }
  }
  if (req.k < forced.size() || req.k > forced.size() + eligible.size()) {
    throw InfeasibleError("cannot pick " + std::to_string(req.k) + " languages from " +
                          std::to_string(forced.size() + eligible.size()) + " eligible");
  }
  std::vector<std::string> pool = forced;
  pool.insert(pool.end(), eligible.begin(), eligible.end());
  if (req.min_families > req.k || distinct_families(graph, pool) < req.min_families) {
    throw InfeasibleError("cannot reach " + std::to_string(req.min_families) +
                          " distinct families with k = " + std::to_string(req.k));
  }
  // Forced picks may already use up the duplicate-family allowance.
  const std::size_t forced_dups = forced.size() - distinct_families(graph, forced);
  if (forced_dups > req.k - req.min_families) {
    throw InfeasibleError("forced languages leave too few slots for " +
                          std::to_string(req.min_families) + " families");
  }

  if (req.mode == SelectionMode::kRandom) {
    std::mt19937_64 rng(req.seed);
    std::vector<std::string> order = eligible;
    const std::size_t slots = req.k - forced.size();
    for (int attempt = 0; attempt < kRandomAttempts; ++attempt) {
      for (std::size_t i = order.size(); i > 1; --i) {
        std::swap(order[i - 1], order[rng() % i]);
      }
      std::vector<std::string> picked = forced;
      picked.insert(picked.end(), order.begin(), order.begin() + static_cast<std::ptrdiff_t>(slots));
      if (distinct_families(graph, picked) >= req.min_families) return picked;
    }
    return greedy_fill(graph, forced, order, req.k, req.min_families);
  }

  std::vector<std::string> order = rank_donors(graph);
  if (req.mode == SelectionMode::kLeastDonating) {
    std::stable_sort(order.begin(), order.end(), [&](const auto& a, const auto& b) {
      const double da = graph.node(a).donation;
      const double db = graph.node(b).donation;
      if (da != db) return da < db;
      return a < b;
    });
  }
  std::erase_if(order, [&](const std::string& c) {
    return std::find(eligible.begin(), eligible.end(), c) == eligible.end();
  });
  auto picked = greedy_fill(graph, forced, order, req.k, req.min_families);
  if (picked.size() != req.k) {
    throw InfeasibleError("no feasible selection for the requested family constraint");
  }
  return picked;
}

double donation_sum(const TransferGraph& graph, std::span<const std::string> codes) {
  double s = 0.0;
  for (const auto& c : codes) s += graph.node(c).donation;
  return s;
}

RecipientSplit split_recipients(const TransferGraph& graph, std::span<const std::string> codes) {
  std::vector<std::string> order(codes.begin(), codes.end());
  for (const auto& c : order) graph.node(c);
  std::sort(order.begin(), order.end(), [&](const auto& a, const auto& b) {
    const double ra = graph.node(a).recipience;
    const double rb = graph.node(b).recipience;
    if (ra != rb) return ra > rb;
    return a < b;
  });
  order.erase(std::unique(order.begin(), order.end()), order.end());
  const auto half = static_cast<std::ptrdiff_t>((order.size() + 1) / 2);
  return {{order.begin(), order.begin() + half}, {order.begin() + half, order.end()}};
}

PretrainConfig make_pretrain_config(const TransferGraph& graph, const SelectionRequest& request,
                                    std::string id, RecipientSplit recipients,
                                    std::uint64_t budget_chars) {
  if (recipients.high.empty() && recipients.low.empty()) {
    const std::vector<std::string> excluded(request.excluded.begin(), request.excluded.end());
    recipients = split_recipients(graph, excluded);
  }
  for (const auto* group : {&recipients.high, &recipients.low}) {
    for (const auto& c : *group) graph.node(c);
  }
  PretrainConfig config;
  config.id = std::move(id);
  config.mode = request.mode;
  config.donors = select_pretrain_set(graph, request);
  config.recipients_high = std::move(recipients.high);
  config.recipients_low = std::move(recipients.low);
  config.budget_chars = budget_chars;
  config.validate();
  return config;
}

double DownstreamResults::at(const std::string& config_id, const std::string& source,
                             const std::string& target) const {
  auto it = scores.find({config_id, source, target});
  if (it == scores.end()) {
    throw ValidationError("downstream results (" + task + "): no score for config '" + config_id +
                          "' " + source + " -> " + target);
  }
  return it->second;
}

std::map<std::string, DownstreamResults> parse_downstream_results(std::string_view content,
                                                                  std::string_view source_name) {
  const std::string name(source_name);
  struct Acc {
    double sum = 0.0;
    int n = 0;
  };
  std::map<std::string, std::map<DownstreamResults::Key, Acc>> acc;
  std::map<std::string, std::set<long long>> seeds;
  std::istringstream in{std::string(content)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (trim(line).empty() || line[0] == '#') continue;
    auto f = split(line, '\t');
    if (!f.empty() && f[0] == "config_id") continue;
    const std::string where = name + ":" + std::to_string(lineno);
    if (f.size() != 6) throw ValidationError(where + ": expected 6 tab-separated fields");
    const double f1 = parse_double(f[4], where);
    if (f1 < 0.0 || f1 > 1.0) throw ValidationError(where + ": f1 outside [0, 1]");
    const long long seed = parse_int(f[5], where);
    auto& a = acc[f[1]][{f[0], f[2], f[3]}];
    a.sum += f1;
    ++a.n;
    seeds[f[1]].insert(seed);
  }
  std::map<std::string, DownstreamResults> out;
  for (const auto& [task, entries] : acc) {
    DownstreamResults r;
    r.task = task;
    r.seeds = seeds[task].size();
    for (const auto& [key, a] : entries) r.scores[key] = a.sum / a.n;
    out.emplace(task, std::move(r));
  }
  return out;
}

std::map<std::string, DownstreamResults> read_downstream_results(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open downstream results " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_downstream_results(ss.str(), path.string());
}

double zero_shot_score(const DownstreamResults& results, const std::string& config_id,
                       std::span<const std::string> languages) {
  if (languages.size() < 2) throw ValidationError("zero_shot_score: need |D| >= 2");
  double sum = 0.0;
  std::vector<std::string> missing;
  for (const auto& s : languages) {
    for (const auto& t : languages) {
      if (s == t) continue;
      auto it = results.scores.find({config_id, s, t});
      if (it == results.scores.end()) {
        missing.push_back(s + "->" + t);
      } else {
        sum += it->second;
      }
    }
  }
  if (!missing.empty()) {
    throw ValidationError("zero_shot_score (" + results.task + ", " + config_id +
                          "): missing " + join(missing, ", "));
  }
  const double n = static_cast<double>(languages.size());
  return sum / (n * n - n);
}

double monolingual_score(const DownstreamResults& results, const std::string& config_id,
                         std::span<const std::string> languages) {
  if (languages.empty()) throw ValidationError("monolingual_score: empty language set");
  double sum = 0.0;
  std::vector<std::string> missing;
  for (const auto& l : languages) {
    auto it = results.scores.find({config_id, l, l});
    if (it == results.scores.end()) {
      missing.push_back(l);
    } else {
      sum += it->second;
    }
  }
  if (!missing.empty()) {
    throw ValidationError("monolingual_score (" + results.task + ", " + config_id +
                          "): missing diagonal for " + join(missing, ", "));
  }
  return sum / static_cast<double>(languages.size());
}

std::string_view to_string(HypothesisId id) {
  switch (id) {
    case HypothesisId::kEq3: return "Eq3";
    case HypothesisId::kEq7: return "Eq7";
    case HypothesisId::kEq8: return "Eq8";
    case HypothesisId::kEq9: return "Eq9";
    case HypothesisId::kEq10: return "Eq10";
  }
  return "Eq9";
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::kYes: return "yes";
    case Verdict::kNo: return "no";
    case Verdict::kPartial: return "partial";
  }
  return "no";
}

json hypothesis_to_json(const HypothesisResult& r) {
  json details = json::array();
  for (const auto& c : r.details) {
    details.push_back({{"label", c.label},
                       {"lhs", c.lhs},
                       {"rhs", c.rhs},
                       {"margin", c.margin},
                       {"holds", c.holds},
                       {"tie", c.tie}});
  }
  return {{"hypothesis_id", to_string(r.hypothesis_id)},
          {"satisfied", to_string(r.satisfied)},
          {"task", r.task},
          {"variant", r.variant},
          {"margins", r.margins},
          {"details", details}};
}

HypothesisResult check_recipience_hypothesis(const DownstreamResults& results,
                                             std::span<const std::string> config_ids,
                                             std::span<const std::string> recipients_high,
                                             std::span<const std::string> recipients_low) {
  if (config_ids.empty()) throw ValidationError("recipience hypothesis: no configurations");
  std::vector<Comparison> details;
  for (const auto& id : config_ids) {
    details.push_back(strictly_greater(id + ": Z(R_h) > Z(R_l)",
                                       zero_shot_score(results, id, recipients_high),
                                       zero_shot_score(results, id, recipients_low)));
  }
  return finish(HypothesisId::kEq9, results.task, std::move(details));
}

HypothesisResult check_donation_hypothesis(const DownstreamResults& results,
                                           const std::string& most_id,
                                           const std::string& random_id,
                                           const std::string& least_id,
                                           std::span<const std::string> languages) {
  const double most = zero_shot_score(results, most_id, languages);
  const double random = zero_shot_score(results, random_id, languages);
  const double least = zero_shot_score(results, least_id, languages);
  std::vector<Comparison> details;
  details.push_back(strictly_greater("Z(" + most_id + ") > Z(" + random_id + ")", most, random));
  details.push_back(strictly_greater("Z(" + random_id + ") > Z(" + least_id + ")", random, least));
  return finish(HypothesisId::kEq10, results.task, std::move(details));
}

std::vector<HypothesisResult> check_donation_sum_hypothesis(
    const TransferGraph& graph, const DownstreamResults& results,
    std::span<const PretrainConfig> configs, std::span<const std::string> languages) {
  if (configs.size() < 2) throw ValidationError("donation-sum hypothesis: need >= 2 configs");
  std::vector<double> z;
  for (const auto& c : configs) z.push_back(zero_shot_score(results, c.id, languages));
  std::vector<HypothesisResult> out;
  for (const bool full : {false, true}) {
    std::vector<double> sums;
    for (const auto& c : configs) {
      sums.push_back(full ? donation_sum(graph, c.languages()) : donation_sum(graph, c.donors));
    }
    std::vector<Comparison> details;
    for (std::size_t i = 0; i < configs.size(); ++i) {
      for (std::size_t j = 0; j < configs.size(); ++j) {
        if (i == j || sums[i] > sums[j]) continue;
        if (sums[i] == sums[j] && i > j) continue;
        details.push_back(at_most("Z(" + configs[i].id + ") <= Z(" + configs[j].id + ")", z[i], z[j]));
      }
    }
    auto r = finish(HypothesisId::kEq8, results.task, std::move(details));
    r.variant = full ? "full_set" : "donors_only";
    out.push_back(std::move(r));
  }
  return out;
}

ProportionalityResult recipience_proportionality(const TransferGraph& graph,
                                                 const DownstreamResults& results,
                                                 std::span<const Observation> observations) {
  if (observations.size() < 3) {
    throw ValidationError("recipience proportionality: need >= 3 observations");
  }
  ProportionalityResult out;
  for (const auto& obs : observations) {
    double s = 0.0;
    for (const auto& l : obs.languages) s += graph.node(l).recipience;
    out.recipience_sums.push_back(s);
    out.zero_shot.push_back(zero_shot_score(results, obs.config_id, obs.languages));
  }
  out.n = observations.size();
  out.pearson = stats::pearson_r(out.recipience_sums, out.zero_shot);
  out.spearman = stats::spearman_rho(out.recipience_sums, out.zero_shot);
  out.test = stats::t_test_correlation(out.pearson, static_cast<int>(out.n));
  out.satisfied = out.pearson > 0.0 && out.test.p_value < 0.05;
  return out;
}

HypothesisResult to_hypothesis(const ProportionalityResult& p) {
  HypothesisResult r;
  r.hypothesis_id = HypothesisId::kEq7;
  r.satisfied = p.satisfied ? Verdict::kYes : Verdict::kNo;
  r.margins = {p.pearson, p.spearman};
  r.details.push_back({"pearson r > 0 (p = " + format_fixed(p.test.p_value, 6) + ")", p.pearson, 0.0,
                       p.pearson, p.satisfied, false});
  r.details.push_back({"spearman rho", p.spearman, 0.0, p.spearman, p.spearman > 0.0, p.spearman == 0.0});
  return r;
}

std::vector<HypothesisResult> evaluate_hypotheses(
    const TransferGraph& graph, const std::map<std::string, DownstreamResults>& results,
    std::span<const PretrainConfig> configs) {
  if (configs.empty()) throw ValidationError("no pretraining configs to check");
  const auto& rh = configs.front().recipients_high;
  const auto& rl = configs.front().recipients_low;
  for (const auto& c : configs) {
    if (c.recipients_high != rh || c.recipients_low != rl) {
      throw ValidationError("config '" + c.id + "' uses a different recipient split than '" +
                            configs.front().id + "'");
    }
  }
  std::vector<std::string> all = rh;
  all.insert(all.end(), rl.begin(), rl.end());
  std::vector<std::string> ids;
  for (const auto& c : configs) ids.push_back(c.id);
  auto first_of = [&](SelectionMode m) -> const PretrainConfig* {
    for (const auto& c : configs) {
      if (c.mode == m) return &c;
    }
    return nullptr;
  };

  std::vector<HypothesisResult> out;
  for (const auto& [task, res] : results) {
    if (rh.size() >= 2 && rl.size() >= 2) {
      out.push_back(check_recipience_hypothesis(res, ids, rh, rl));
    }
    const auto* most = first_of(SelectionMode::kMostDonating);
    const auto* random = first_of(SelectionMode::kRandom);
    const auto* least = first_of(SelectionMode::kLeastDonating);
    if (most && random && least && all.size() >= 2) {
      out.push_back(check_donation_hypothesis(res, most->id, random->id, least->id, all));
    }
    if (configs.size() >= 2 && all.size() >= 2) {
      for (auto& r : check_donation_sum_hypothesis(graph, res, configs, all)) {
        out.push_back(std::move(r));
      }
    }
    std::vector<Observation> obs;
    for (const auto& c : configs) {
      for (const auto* d : std::initializer_list<const std::vector<std::string>*>{&rh, &rl, &all}) {
        if (d->size() >= 2) obs.push_back({c.id, *d});
      }
    }
    if (obs.size() >= 3) {
      // Constant sums or scores leave the correlation undefined; skip then.
      try {
        auto r = to_hypothesis(recipience_proportionality(graph, res, obs));
        r.task = task;
        out.push_back(std::move(r));
      } catch (const ValidationError&) {
      }
    }
  }
  return out;
}

HypothesisResult monotonicity_probe(std::span<const MonotonicityStep> steps,
                                    std::span<const std::string> languages) {
  if (steps.size() < 2) throw ValidationError("monotonicity probe: need >= 2 steps");
  if (languages.empty()) throw ValidationError("monotonicity probe: empty evaluation set");
  std::vector<const MonotonicityStep*> ordered;
  for (const auto& s : steps) ordered.push_back(&s);
  std::stable_sort(ordered.begin(), ordered.end(), [](const auto* a, const auto* b) {
    return a->pretrain_set.size() < b->pretrain_set.size();
  });
  auto aggregate = [&](const MonotonicityStep& step) {
    double sum = 0.0;
    for (const auto& l : languages) {
      auto it = step.matrix.mono.find(l);
      if (it == step.matrix.mono.end()) {
        throw ValidationError("monotonicity probe: no score for '" + l + "' under " +
                              set_label(step.pretrain_set));
      }
      sum += it->second;
    }
    return sum / static_cast<double>(languages.size());
  };
  std::vector<Comparison> details;
  for (std::size_t i = 1; i < ordered.size(); ++i) {
    const auto& small = ordered[i - 1]->pretrain_set;
    const auto& large = ordered[i]->pretrain_set;
    const std::set<std::string> big(large.begin(), large.end());
    for (const auto& c : small) {
      if (!big.count(c)) {
        throw ValidationError("monotonicity probe: " + set_label(small) + " is not a subset of " +
                              set_label(large));
      }
    }
    details.push_back(at_most("Z" + set_label(small) + " <= Z" + set_label(large),
                              aggregate(*ordered[i - 1]), aggregate(*ordered[i])));
  }
  return finish(HypothesisId::kEq3, "proxy_mrr", std::move(details));
}

}  // namespace xling
