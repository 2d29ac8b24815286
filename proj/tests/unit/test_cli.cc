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


// Drives the xling binary end to end and checks exit codes and artifacts.

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "test_util.h"
#include "xling/corpus.h"
#include "xling/language.h"
#include "xling/utf8.h"

using namespace xling;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const fs::path kSource = XLING_SOURCE_DIR;

int run(const std::string& args, const fs::path& stdout_file = "/dev/null") {
  const std::string cmd = std::string("\"") + XLING_CLI + "\" " + args + " > \"" +
                          stdout_file.string() + "\" 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

// Runs the pipeline into dir; returns the first non-zero exit code.
int pipeline(const fs::path& dir) {
  const fs::path fx = dir / "fx";
  for (const std::string& cmd : {
           "gen-fixture --out " + q(fx) + " --sentences 600",
           "sample --raw " + q(fx / "raw") + " --meta " + q(fx / "langs.tsv") +
               " --budget 20000 --seed 3 --out " + q(dir / "parts"),
           "train-vocab --partitions " + q(dir / "parts") + " --size 800 --out " +
               q(dir / "vocab.txt"),
           "score --partitions " + q(dir / "parts") + " --vocab " + q(dir / "vocab.txt") +
               " --seeds 1,2 --threads 2 --out " + q(dir / "matrix.tsv"),
           "build-graph --matrix " + q(dir / "matrix.tsv") + " --meta " + q(fx / "langs.tsv") +
               " --wals " + q(fx / "wals.csv") + " --out " + q(dir / "graph.json"),
           "analyze --graph " + q(dir / "graph.json") + " --out " + q(dir / "analytics.json"),
       }) {
    if (const int rc = run(cmd); rc != 0) return rc;
  }
  return 0;
}

std::vector<std::string> artifacts(const fs::path& dir) {
  std::vector<std::string> out;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file()) out.push_back(fs::relative(entry.path(), dir).string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("pipeline produces a complete graph and reruns bit-identically") {
  testing::TempDir a, b;
  REQUIRE(pipeline(a.path()) == 0);
  const auto graph = json::parse(testing::read_file(a / "graph.json"));
  CHECK(graph["edges"].size() == 12);
  CHECK(graph["languages"].size() == 4);
  CHECK(graph["meta"]["provenance"] == "proxy");
  CHECK(json::parse(testing::read_file(a / "analytics.json")).contains("bin_histogram"));

  // Same inputs into a fresh directory, then over the first one again.
  REQUIRE(pipeline(b.path()) == 0);
  const auto files = artifacts(a.path());
  CHECK(files == artifacts(b.path()));
  for (const auto& f : files) {
    CAPTURE(f);
    CHECK(testing::read_file(a / f) == testing::read_file(b / f));
  }
  REQUIRE(pipeline(a.path()) == 0);
  for (const auto& f : files) {
    CAPTURE(f);
    CHECK(testing::read_file(a / f) == testing::read_file(b / f));
  }
}

TEST_CASE("select and check-hypotheses on the bundled workspace") {
  testing::TempDir tmp;
  const fs::path ws = kSource / "tests/fixtures/workspace";
  REQUIRE(run("select --graph " + q(ws / "graph.json") +
                  " --mode control --exclude xb,xd --recipients-high xb --recipients-low xd",
              tmp / "control.json") == 0);
  const auto control = json::parse(testing::read_file(tmp / "control.json"));
  CHECK(control["donors"].empty());
  CHECK(control["recipients_high"] == json::array({"xb"}));
  CHECK(control["recipients_low"] == json::array({"xd"}));
  CHECK(control["donation_sum"] == 0.0);

  REQUIRE(run("select --graph " + q(ws / "graph.json") +
                  " --k 1 --min-families 1 --exclude xb,xd --mode most_donating --id most",
              tmp / "most.json") == 0);
  const auto most = json::parse(testing::read_file(tmp / "most.json"));
  const auto bundled = json::parse(testing::read_file(ws / "configs/most.json"));
  CHECK(most["donors"] == bundled["donors"]);

  std::string configs;
  for (const char* c : {"most", "least", "random", "control"}) {
    configs += " " + q(ws / "configs" / (std::string(c) + ".json"));
  }
  REQUIRE(run("check-hypotheses --graph " + q(ws / "graph.json") + " --results " +
                  q(ws / "results.tsv") + " --configs" + configs,
              tmp / "h.json") == 0);
  const auto hyps = json::parse(testing::read_file(tmp / "h.json"));
  CHECK(hyps.is_array());
  CHECK_FALSE(hyps.empty());
}

TEST_CASE("ingest-matrix normalizes orientation") {
  testing::TempDir tmp;
  REQUIRE(run("ingest-matrix --in " + q(kSource / "tests/fixtures/pairwise_mean.tsv") +
              " --orientation row-source --out " + q(tmp / "m.tsv")) == 0);
  const std::string text = testing::read_file(tmp / "m.tsv");
  CHECK(text.find("# orientation=row-source") != std::string::npos);
  CHECK(text.find("de\t0.2801\t0.3177") != std::string::npos);
  CHECK(run("ingest-matrix --in " + q(kSource / "tests/fixtures/pairwise_mean.tsv") +
            " --orientation col-source") == 1);
}

TEST_CASE("skewed sample fails balance validation") {
  testing::TempDir tmp;
  REQUIRE(run("gen-fixture --out " + q(tmp / "fx") + " --sentences 800") == 0);
  const auto metas = read_language_table(tmp / "fx/langs.tsv");
  for (const auto& raw : load_raw_corpora(tmp / "fx/raw", metas)) {
    auto sentences = corpus_sentences(raw);
    std::stable_sort(sentences.begin(), sentences.end(), [](const auto& x, const auto& y) {
      return utf8::length(x) > utf8::length(y);
    });
    LanguagePartition p;
    p.meta = raw.meta;
    p.sentences.assign(sentences.begin(), sentences.begin() + 80);
    for (const auto& s : p.sentences) p.char_count += utf8::length(s);
    p.target_budget = p.char_count;
    write_partition(tmp / "skewed", p);
  }
  CHECK(run("validate-balance --sample " + q(tmp / "skewed") + " --full " + q(tmp / "fx/raw") +
                " --threshold 0.001 --vocab-size 500",
            tmp / "report.tsv") == 1);
  const std::string report = testing::read_file(tmp / "report.tsv");
  CHECK(report.find("false") != std::string::npos);
}

TEST_CASE("exit codes") {
  testing::TempDir tmp;
  const fs::path ws = kSource / "tests/fixtures/workspace";
  testing::write_file(tmp / "bad.tsv", "# orientation=row-source\nsrc\ta\na\t1.5\n");
  struct Case {
    int line;
    std::string args;
    int code;
  };
  const Case cases[] = {
      {__LINE__, "--help", 0},
      {__LINE__, "", 1},
      {__LINE__, "frobnicate", 1},
      {__LINE__, "ingest-matrix --in " + q(tmp / "bad.tsv"), 1},
      {__LINE__, "ingest-matrix --in " + q(tmp / "bad.tsv") + " --orientation row-source", 1},
      {__LINE__, "ingest-matrix --in " + q(tmp / "none.tsv") + " --orientation row-source", 2},
      {__LINE__, "analyze --graph " + q(tmp / "none.json"), 2},
      {__LINE__, "select --graph " + q(ws / "graph.json") + " --k 9 --min-families 1", 3},
      {__LINE__, "select --graph " + q(ws / "graph.json") + " --k 2 --min-families 3", 3},
      {__LINE__, "select --graph " + q(ws / "graph.json") + " --mode best", 1},
      {__LINE__, "select --graph " + q(ws / "graph.json") + " --exclude zz", 1},
      {__LINE__, "score --partitions " + q(tmp / "none") + " --vocab " + q(tmp / "v.txt"), 2},
      {__LINE__, "serve --workspace " + q(tmp / "none"), 2},
  };
  for (const auto& c : cases) {
    CAPTURE(c.line);
    CHECK(run(c.args) == c.code);
  }
}

}  // TEST_SUITE
