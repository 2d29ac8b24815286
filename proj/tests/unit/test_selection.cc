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
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "test_util.h"
#include "xling/error.h"

using namespace xling;
using doctest::Approx;

namespace {

const std::filesystem::path kDownstream =
    std::filesystem::path(XLING_SOURCE_DIR) / "tests/fixtures/downstream";

struct NodeSpec {
  std::string code;
  std::string family;
  double donation;
  double recipience = 0.0;
};

// Nodes only; selection never looks at edges.
TransferGraph graph_of(const std::vector<NodeSpec>& specs) {
  TransferGraph g;
  for (const auto& s : specs) {
    LanguageNode n;
    n.meta = {s.code, s.family, "Latn", {}};
    n.donation = s.donation;
    n.recipience = s.recipience;
    n.blood_type = classify_blood_type(n.donation, n.recipience);
    g.nodes[s.code] = n;
  }
  return g;
}

std::size_t family_count(const TransferGraph& g, const std::vector<std::string>& codes) {
  std::set<std::string> f;
  for (const auto& c : codes) f.insert(g.node(c).meta.family);
  return f.size();
}

// Best feasible subset by brute force over every k-subset.
std::vector<std::string> exhaustive_best(const TransferGraph& g, std::size_t k, std::size_t f,
                                         const std::set<std::string>& excluded, bool most) {
  std::vector<std::string> pool;
  for (const auto& c : g.codes()) {
    if (!excluded.count(c)) pool.push_back(c);
  }
  std::vector<std::string> best;
  double best_sum = 0.0;
  const std::size_t n = pool.size();
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    if (static_cast<std::size_t>(__builtin_popcount(mask)) != k) continue;
    std::vector<std::string> pick;
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) {
        pick.push_back(pool[i]);
        sum += g.node(pool[i]).donation;
      }
    }
    if (family_count(g, pick) < f) continue;
    if (!most) sum = -sum;
    if (best.empty() || sum > best_sum) {
      best = pick;
      best_sum = sum;
    }
  }
  return best;
}

std::vector<std::string> sorted(std::vector<std::string> v) {
  std::sort(v.begin(), v.end());
  return v;
}

DownstreamResults uniform_results(const std::string& config, const std::vector<std::string>& d,
                                  double zero_shot, double mono) {
  DownstreamResults r;
  r.task = "T";
  for (const auto& s : d) {
    for (const auto& t : d) r.scores[{config, s, t}] = s == t ? mono : zero_shot;
  }
  return r;
}

}  // namespace

TEST_SUITE("selection") {

TEST_CASE("rank_donors orders by donation then code") {
  const auto g = graph_of({{"c", "F", -0.2}, {"a", "F", 0.3}, {"b", "F", 0.1}});
  CHECK(rank_donors(g) == std::vector<std::string>{"a", "b", "c"});
  const auto tie = graph_of({{"y", "F", 0.1}, {"x", "F", 0.1}, {"z", "F", 0.2}});
  CHECK(rank_donors(tie) == std::vector<std::string>{"z", "x", "y"});
}

TEST_CASE("one per family when k equals f") {
  const auto g = graph_of({{"a1", "A", 0.9}, {"a2", "A", 0.8}, {"b1", "B", 0.5},
                           {"b2", "B", 0.6}, {"c1", "C", -0.1}, {"c2", "C", 0.2}});
  SelectionRequest req;
  req.k = 3;
  req.min_families = 3;
  CHECK(sorted(select_pretrain_set(g, req)) == std::vector<std::string>{"a1", "b2", "c2"});
  req.min_families = 1;
  CHECK(sorted(select_pretrain_set(g, req)) == std::vector<std::string>{"a1", "a2", "b2"});
  req.mode = SelectionMode::kLeastDonating;
  req.min_families = 3;
  CHECK(sorted(select_pretrain_set(g, req)) == std::vector<std::string>{"a2", "b1", "c1"});
}

TEST_CASE("greedy selection matches exhaustive enumeration") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int checked = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const int n = 6 + static_cast<int>(rng() % 3);
    const int families = 2 + static_cast<int>(rng() % 3);
    std::vector<NodeSpec> specs;
    for (int i = 0; i < n; ++i) {
      specs.push_back({std::string(1, static_cast<char>('a' + i)),
                       "F" + std::to_string(rng() % families), u(rng)});
    }
    const auto g = graph_of(specs);
    std::set<std::string> excluded;
    if (rng() % 2) excluded.insert(std::string(1, static_cast<char>('a' + rng() % n)));
    SelectionRequest req;
    req.k = 1 + rng() % 5;
    req.min_families = 1 + rng() % 3;
    req.excluded = excluded;
    for (bool most : {true, false}) {
      CAPTURE(trial);
      req.mode = most ? SelectionMode::kMostDonating : SelectionMode::kLeastDonating;
      const auto oracle = exhaustive_best(g, req.k, req.min_families, excluded, most);
      if (oracle.empty()) {
        CHECK_THROWS_AS(select_pretrain_set(g, req), InfeasibleError);
        continue;
      }
      const auto got = select_pretrain_set(g, req);
      CHECK(sorted(got) == sorted(oracle));
      CHECK(family_count(g, got) >= req.min_families);
      ++checked;
    }
  }
  CHECK(checked > 300);
}

TEST_CASE("full eligible set is the same for both orders") {
  const auto g = graph_of({{"a", "A", 0.3}, {"b", "B", 0.1}, {"c", "A", -0.2}, {"d", "C", 0.0}});
  SelectionRequest req;
  req.k = 3;
  req.min_families = 2;
  req.excluded = {"d"};
  const auto most = sorted(select_pretrain_set(g, req));
  req.mode = SelectionMode::kLeastDonating;
  CHECK(sorted(select_pretrain_set(g, req)) == most);
}

TEST_CASE("random mode") {
  std::vector<NodeSpec> specs;
  for (int i = 0; i < 12; ++i) {
    specs.push_back({"l" + std::to_string(i), "F" + std::to_string(i % 4), 0.01 * i});
  }
  const auto g = graph_of(specs);
  SelectionRequest req;
  req.mode = SelectionMode::kRandom;
  req.k = 4;
  req.min_families = 3;
  req.excluded = {"l0", "l1", "l2", "l3", "l4", "l5"};
  std::set<std::vector<std::string>> distinct;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    req.seed = seed;
    const auto a = select_pretrain_set(g, req);
    CHECK(a == select_pretrain_set(g, req));
    CHECK(a.size() == 4);
    CHECK(family_count(g, a) >= 3);
    for (const auto& c : a) CHECK_FALSE(req.excluded.count(c));
    distinct.insert(sorted(a));
  }
  CHECK(distinct.size() > 1);
}

TEST_CASE("control, force_include and contract errors") {
  const auto g = graph_of({{"a", "A", 0.3}, {"b", "A", 0.2}, {"c", "B", 0.1},
                           {"d", "C", -0.4}, {"e", "C", -0.1}});
  SelectionRequest req;
  req.mode = SelectionMode::kControl;
  CHECK(select_pretrain_set(g, req).empty());

  req.mode = SelectionMode::kLeastDonating;
  req.k = 3;
  req.min_families = 2;
  req.force_include = {"a"};
  const auto least = select_pretrain_set(g, req);
  CHECK(least.front() == "a");
  CHECK(sorted(least) == std::vector<std::string>{"a", "d", "e"});

  struct Case {
    int line;
    std::size_t k;
    std::size_t f;
    std::set<std::string> excluded;
    std::vector<std::string> forced;
    bool infeasible;  // else ValidationError
  };
  const Case cases[] = {
      {__LINE__, 6, 1, {}, {}, true},
      {__LINE__, 4, 1, {"a", "b"}, {}, true},
      {__LINE__, 2, 3, {}, {}, true},
      {__LINE__, 3, 3, {"c"}, {}, true},
      {__LINE__, 3, 3, {}, {"a", "b"}, true},
      {__LINE__, 1, 1, {}, {"a", "b"}, true},
      {__LINE__, 2, 1, {"zz"}, {}, false},
      {__LINE__, 2, 1, {}, {"zz"}, false},
      {__LINE__, 2, 1, {"a"}, {"a"}, false},
  };
  for (const auto& c : cases) {
    CAPTURE(c.line);
    SelectionRequest r;
    r.k = c.k;
    r.min_families = c.f;
    r.excluded = c.excluded;
    r.force_include = c.forced;
    if (c.infeasible) {
      CHECK_THROWS_AS(select_pretrain_set(g, r), InfeasibleError);
    } else {
      CHECK_THROWS_AS(select_pretrain_set(g, r), ValidationError);
    }
  }
}

TEST_CASE("pretrain config manifest") {
  const auto g = graph_of({{"a", "A", 0.3, 0.1}, {"b", "B", 0.2, -0.3}, {"c", "C", 0.1, 0.5},
                           {"d", "C", -0.4, 0.2}, {"e", "D", -0.1, -0.1}});
  SelectionRequest req;
  req.k = 2;
  req.min_families = 2;
  req.excluded = {"c", "d", "e"};
  const auto config = make_pretrain_config(g, req, "most", {}, 1000);
  CHECK(config.donors == std::vector<std::string>{"a", "b"});
  CHECK(config.recipients_high == std::vector<std::string>{"c", "d"});
  CHECK(config.recipients_low == std::vector<std::string>{"e"});
  const auto alloc = config.allocation();
  CHECK(alloc.size() == 5);
  for (const auto& [code, chars] : alloc) CHECK(chars == 200);

  testing::TempDir tmp;
  write_manifest(tmp / "m.json", config);
  const auto back = read_manifest(tmp / "m.json");
  CHECK(back.id == "most");
  CHECK(back.donors == config.donors);
  CHECK(back.recipients_high == config.recipients_high);
  CHECK(back.recipients_low == config.recipients_low);
  CHECK(back.budget_chars == 1000);
  CHECK(back.mode == SelectionMode::kMostDonating);

  PretrainConfig bad = config;
  bad.donors.push_back("c");
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad = config;
  bad.mode = SelectionMode::kControl;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  testing::write_file(tmp / "bad.json", "{\"id\": \"x\"}");
  CHECK_THROWS_AS(read_manifest(tmp / "bad.json"), ValidationError);
}

TEST_CASE("published configuration manifests load") {
  const auto most = read_manifest(kDownstream / "configs/most.json");
  CHECK(most.donors == std::vector<std::string>{"ja", "te", "fi", "ru"});
  CHECK(most.recipients_high == std::vector<std::string>{"hi", "de", "hu"});
  CHECK(most.recipients_low == std::vector<std::string>{"ar", "el", "ta"});
  CHECK(most.budget_chars == 100'000'000);
  const auto control = read_manifest(kDownstream / "configs/control.json");
  CHECK(control.donors.empty());
  CHECK(control.allocation().at("hi") == 100'000'000 / 6);
}

TEST_CASE("zero_shot_score") {
  DownstreamResults r;
  r.scores = {{{"P", "a", "b"}, 0.4}, {{"P", "b", "a"}, 0.2}};
  const std::vector<std::string> ab = {"a", "b"};
  CHECK(zero_shot_score(r, "P", ab) == Approx(0.3).epsilon(1e-15));
  const std::vector<std::string> abc = {"a", "b", "c"};
  CHECK(zero_shot_score(uniform_results("P", abc, 0.5, 0.9), "P", abc) == 0.5);
  const std::vector<std::string> one = {"a"};
  CHECK_THROWS_AS(zero_shot_score(r, "P", one), ValidationError);
  try {
    zero_shot_score(r, "P", abc);
    FAIL("expected missing entries");
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("a->c") != std::string::npos);
    CHECK(msg.find("c->b") != std::string::npos);
  }
}

TEST_CASE("zero_shot_score brute force and relabeling") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int size = 2; size <= 4; ++size) {
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<std::string> d;
      for (int i = 0; i < size; ++i) d.push_back(std::string(1, static_cast<char>('p' + i)));
      DownstreamResults r;
      double sum = 0.0;
      for (const auto& s : d) {
        for (const auto& t : d) {
          r.scores[{"P", s, t}] = u(rng);
          if (s != t) sum += r.scores[{"P", s, t}];
        }
      }
      const double expected = sum / (size * size - size);
      CHECK(zero_shot_score(r, "P", d) == Approx(expected).epsilon(1e-12));
      std::shuffle(d.begin(), d.end(), rng);
      CHECK(zero_shot_score(r, "P", d) == Approx(expected).epsilon(1e-12));
    }
  }
}

TEST_CASE("monolingual_score") {
  DownstreamResults r;
  r.scores = {{{"P", "a", "a"}, 0.6}, {{"P", "b", "b"}, 0.4}, {{"P", "a", "b"}, 0.1}};
  const std::vector<std::string> ab = {"a", "b"}, a = {"a"}, ac = {"a", "c"};
  CHECK(monolingual_score(r, "P", ab) == Approx(0.5).epsilon(1e-15));
  CHECK(monolingual_score(r, "P", a) == 0.6);
  CHECK_THROWS_AS(monolingual_score(r, "P", ac), ValidationError);
  const auto t3 = read_downstream_results(kDownstream / "pairwise_results.tsv");
  const std::vector<std::string> c = {"hi", "de", "hu", "ar", "el", "ta"};
  CHECK(monolingual_score(t3.at("NER"), "most", c) == Approx(0.493).epsilon(1e-12));
}

TEST_CASE("downstream results parsing") {
  const std::string text =
      "config_id\ttask\tsource\ttarget\tf1\tseed\n"
      "P\tNER\ta\tb\t0.4\t1\n"
      "P\tNER\ta\tb\t0.6\t2\n"
      "P\tPOS\ta\ta\t0.9\t1\n";
  const auto r = parse_downstream_results(text, "t");
  CHECK(r.size() == 2);
  CHECK(r.at("NER").at("P", "a", "b") == Approx(0.5).epsilon(1e-15));
  CHECK(r.at("NER").seeds == 2);
  CHECK(r.at("POS").at("P", "a", "a") == 0.9);
  struct Case {
    int line;
    std::string row;
  };
  const Case bad[] = {
      {__LINE__, "P\tNER\ta\tb\t1.2\t1\n"},
      {__LINE__, "P\tNER\ta\tb\t-0.1\t1\n"},
      {__LINE__, "P\tNER\ta\tb\t0.4\n"},
      {__LINE__, "P\tNER\ta\tb\tx\t1\n"},
      {__LINE__, "P\tNER\ta\tb\t0.4\tone\n"},
  };
  for (const auto& c : bad) {
    CAPTURE(c.line);
    CHECK_THROWS_AS(parse_downstream_results(c.row, "t"), ValidationError);
  }
  CHECK_THROWS_AS(read_downstream_results("/nonexistent.tsv"), IoError);
}

TEST_CASE("donation ordering on the published aggregate table") {
  const auto t3 = read_downstream_results(kDownstream / "pairwise_results.tsv");
  const std::vector<std::string> c = {"hi", "de", "hu", "ar", "el", "ta"};
  struct Case {
    int line;
    std::string task;
    bool first_tie;
    bool second_tie;
  };
  const Case cases[] = {
      {__LINE__, "NER", true, false},
      {__LINE__, "POS", false, true},
  };
  for (const auto& k : cases) {
    CAPTURE(k.line);
    const auto h = check_donation_hypothesis(t3.at(k.task), "most", "random", "least", c);
    CHECK(h.hypothesis_id == HypothesisId::kEq10);
    CHECK(h.satisfied == Verdict::kPartial);
    REQUIRE(h.details.size() == 2);
    CHECK(h.details[0].tie == k.first_tie);
    CHECK(h.details[0].holds == !k.first_tie);
    CHECK(h.details[1].tie == k.second_tie);
    CHECK(h.details[1].holds == !k.second_tie);
  }
  CHECK(zero_shot_score(t3.at("NER"), "least", c) == Approx(0.148).epsilon(1e-12));

  DownstreamResults r;
  for (const auto& [id, v] : std::map<std::string, double>{{"m", 0.3}, {"r", 0.2}, {"l", 0.1}}) {
    for (const auto& [k, s] : uniform_results(id, {"a", "b"}, v, 0.5).scores) r.scores[k] = s;
  }
  const std::vector<std::string> ab = {"a", "b"};
  CHECK(check_donation_hypothesis(r, "m", "r", "l", ab).satisfied == Verdict::kYes);
  CHECK(check_donation_hypothesis(r, "l", "r", "m", ab).satisfied == Verdict::kNo);
}

TEST_CASE("recipience ordering on the published aggregate table") {
  const auto t4 = read_downstream_results(kDownstream / "aggregate_results.tsv");
  const std::vector<std::string> rh = {"hi", "de", "hu"}, rl = {"ar", "el", "ta"};
  const std::vector<std::string> ids = {"aggregate"};
  struct Case {
    int line;
    std::string task;
    double margin;
  };
  const Case cases[] = {{__LINE__, "NER", 0.06}, {__LINE__, "POS", 0.027}};
  for (const auto& c : cases) {
    CAPTURE(c.line);
    const auto h = check_recipience_hypothesis(t4.at(c.task), ids, rh, rl);
    CHECK(h.hypothesis_id == HypothesisId::kEq9);
    CHECK(h.satisfied == Verdict::kYes);
    REQUIRE(h.margins.size() == 1);
    CHECK(h.margins[0] == Approx(c.margin).epsilon(1e-12));
  }

  DownstreamResults r;
  const std::vector<std::string> hi = {"a", "b"}, lo = {"c", "d"};
  auto put = [&](const std::string& id, const std::vector<std::string>& d, double v) {
    for (const auto& [k, s] : uniform_results(id, d, v, 0.5).scores) r.scores[k] = s;
  };
  put("P", hi, 0.4);
  put("P", lo, 0.2);
  put("Q", hi, 0.1);
  put("Q", lo, 0.3);
  const std::vector<std::string> pq = {"P", "Q"};
  CHECK(check_recipience_hypothesis(r, pq, hi, lo).satisfied == Verdict::kPartial);
}

TEST_CASE("recipience proportionality") {
  const auto g = graph_of({{"a", "A", 0, 0.1}, {"b", "A", 0, 0.3}, {"c", "B", 0, -0.2},
                           {"d", "C", 0, 0.05}});
  const std::vector<std::vector<std::string>> sets = {{"a", "b"}, {"a", "c"}, {"b", "d"},
                                                      {"c", "d"}};
  for (double slope : {2.0, -2.0}) {
    CAPTURE(slope);
    DownstreamResults r;
    std::vector<Observation> obs;
    for (std::size_t i = 0; i < sets.size(); ++i) {
      const std::string id = "P" + std::to_string(i);
      double rec = 0.0;
      for (const auto& c : sets[i]) rec += g.node(c).recipience;
      for (const auto& [k, s] : uniform_results(id, sets[i], 0.5 + slope * rec * 0.5, 0.9).scores) {
        r.scores[k] = s;
      }
      obs.push_back({id, sets[i]});
    }
    const auto res = recipience_proportionality(g, r, obs);
    CHECK(res.pearson == Approx(slope > 0 ? 1.0 : -1.0).epsilon(1e-12));
    CHECK(res.spearman == Approx(slope > 0 ? 1.0 : -1.0).epsilon(1e-12));
    CHECK(res.n == 4);
    CHECK(res.satisfied == (slope > 0));
    CHECK(to_hypothesis(res).hypothesis_id == HypothesisId::kEq7);
    const std::vector<Observation> two(obs.begin(), obs.begin() + 2);
    CHECK_THROWS_AS(recipience_proportionality(g, r, two), ValidationError);
  }
}

TEST_CASE("donation sums against zero-shot order") {
  const auto g = graph_of({{"a", "A", 0.5}, {"b", "B", -0.5}, {"x", "C", 0.1}, {"y", "C", 0.2}});
  std::vector<PretrainConfig> configs(2);
  configs[0].id = "high";
  configs[0].mode = SelectionMode::kMostDonating;
  configs[0].donors = {"a"};
  configs[1].id = "low";
  configs[1].mode = SelectionMode::kLeastDonating;
  configs[1].donors = {"b"};
  for (auto& c : configs) {
    c.recipients_high = {"x"};
    c.recipients_low = {"y"};
  }
  DownstreamResults r;
  const std::vector<std::string> xy = {"x", "y"};
  for (const auto& [k, s] : uniform_results("high", xy, 0.4, 0.5).scores) r.scores[k] = s;
  for (const auto& [k, s] : uniform_results("low", xy, 0.2, 0.5).scores) r.scores[k] = s;
  const auto results = check_donation_sum_hypothesis(g, r, configs, xy);
  REQUIRE(results.size() == 2);
  std::set<std::string> variants;
  for (const auto& h : results) {
    variants.insert(h.variant);
    CHECK(h.hypothesis_id == HypothesisId::kEq8);
    CHECK(h.satisfied == Verdict::kYes);
  }
  CHECK(variants == std::set<std::string>{"donors_only", "full_set"});

  const auto all = evaluate_hypotheses(g, {{"T", r}}, configs);
  std::set<HypothesisId> ids;
  for (const auto& h : all) ids.insert(h.hypothesis_id);
  CHECK(ids.count(HypothesisId::kEq8));
  CHECK_FALSE(ids.count(HypothesisId::kEq9));   // singleton recipient groups
  CHECK_FALSE(ids.count(HypothesisId::kEq10));  // no random config
}

TEST_CASE("monotonicity probe") {
  auto step = [](std::vector<std::string> set, double va, double vb) {
    MonotonicityStep s;
    s.pretrain_set = std::move(set);
    s.matrix.languages = {"a", "b"};
    s.matrix.mono = {{"a", va}, {"b", vb}};
    return s;
  };
  const std::vector<std::string> d = {"a", "b"};
  const std::vector<MonotonicityStep> same = {step({"a"}, 0.3, 0.4), step({"a", "b"}, 0.3, 0.4)};
  const auto h = monotonicity_probe(same, d);
  CHECK(h.hypothesis_id == HypothesisId::kEq3);
  CHECK(h.satisfied == Verdict::kYes);
  for (double m : h.margins) CHECK(m == 0.0);
  const std::vector<MonotonicityStep> worse = {step({"a"}, 0.3, 0.4), step({"a", "b"}, 0.2, 0.4)};
  const auto v = monotonicity_probe(worse, d);
  CHECK(v.satisfied == Verdict::kNo);
  CHECK_FALSE(v.details.at(0).holds);
  const std::vector<MonotonicityStep> not_nested = {step({"a"}, 0.3, 0.4), step({"b", "c"}, 0.3, 0.4)};
  CHECK_THROWS_AS(monotonicity_probe(not_nested, d), ValidationError);
}

}  // TEST_SUITE
