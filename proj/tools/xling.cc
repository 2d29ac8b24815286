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


// Command-line driver for the transfer-graph pipeline.

#include <cstdio>
#include <ctime>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "xling/corpus.h"
#include "xling/error.h"
#include "xling/language.h"
#include "xling/proxy_mlm.h"
#include "xling/score_matrix.h"
#include "xling/selection.h"
#include "xling/service.h"
#include "xling/subword.h"
#include "xling/synthetic.h"
#include "xling/text_util.h"
#include "xling/transfer_graph.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace xling {
namespace {

constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;
constexpr int kExitInfeasible = 3;

std::vector<std::string> codes_list(const std::string& csv) {
  std::vector<std::string> out;
  if (csv.empty()) return out;
  for (auto& c : split(csv, ',')) {
    auto t = trim(c);
    if (t.empty()) throw ValidationError("empty language code in list '" + csv + "'");
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<std::uint64_t> seed_list(const std::string& csv) {
  std::vector<std::uint64_t> out;
  for (const auto& s : split(csv, ',')) {
    const long long v = parse_int(trim(s), "seed");
    if (v < 0) throw ValidationError("seeds must be non-negative");
    out.push_back(static_cast<std::uint64_t>(v));
  }
  if (out.empty()) throw ValidationError("need at least one seed");
  return out;
}

// Artifacts stay byte-identical across runs unless a timestamp is asked for.
std::string resolve_created_at(const std::string& flag) {
  if (!flag.empty()) return flag;
  const char* epoch = std::getenv("SOURCE_DATE_EPOCH");
  if (!epoch || !*epoch) return "1970-01-01T00:00:00Z";
  const std::time_t t = static_cast<std::time_t>(parse_int(epoch, "SOURCE_DATE_EPOCH"));
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << text;
  if (!out) throw IoError("write failed for " + path);
}

MetaTable metas_from_partitions(const std::vector<LanguagePartition>& partitions) {
  MetaTable metas;
  for (const auto& p : partitions) metas.emplace(p.meta.code, p.meta);
  return metas;
}

Server* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

struct Options {
  // sample
  std::string raw, meta, out;
  std::size_t budget = LanguagePartition::kDefaultBudget;
  std::uint64_t seed = 0;
  // validate-balance
  std::string sample_dir, full_dir, vocab;
  double threshold = BalanceReport::kDefaultThreshold;
  std::size_t vocab_size = 8000;
  // score
  std::string partitions, seeds = "0", regime = "joint";
  int order = 3;
  double alpha = 0.1, decay = 0.5, holdout = 0.1;
  unsigned threads = 0;
  // ingest / build
  std::string in, matrix, wals, orientation, created_at;
  // analyze / select / hypotheses
  std::string graph, mode = "most_donating", exclude, force_include, rh, rl, id, results;
  std::size_t k = 4, min_families = 3;
  std::uint64_t budget_chars = PretrainConfig::kDefaultBudget;
  std::vector<std::string> configs;
  // serve
  std::string workspace, bind, cors_origin, service_config;
  // gen-fixture
  std::size_t sentences = 2000;
};

int cmd_sample(const Options& o) {
  const fs::path meta = o.meta.empty() ? fs::path(o.raw) / "langs.tsv" : fs::path(o.meta);
  MetaTable metas = read_language_table(meta);
  fs::create_directories(o.out);
  for (const auto& raw : load_raw_corpora(o.raw, metas)) {
    const auto p = sample_partition(raw, o.budget, o.seed);
    write_partition(o.out, p);
    std::cerr << p.meta.code << ": " << p.sentences.size() << " sentences, " << p.char_count
              << " chars";
    // Stopping at a sentence boundary always leaves a few characters unused;
    // only a corpus smaller than the budget is worth a warning.
    if (raw.total_chars < o.budget) {
      std::cerr << " (underfull: raw corpus has only " << raw.total_chars << " chars)";
    }
    std::cerr << '\n';
  }
  return 0;
}

int cmd_validate_balance(const Options& o) {
  const auto partitions = read_partitions(o.sample_dir);
  const auto vocab = o.vocab.empty() ? train_vocabulary(partitions, o.vocab_size)
                                     : SubwordVocabulary::load(o.vocab);
  std::vector<std::pair<std::string, BalanceReport>> reports;
  bool all = true;
  for (const auto& p : partitions) {
    const fs::path file = fs::path(o.full_dir) / (p.meta.code + ".txt");
    const auto raw = load_raw_corpus(fs::exists(file) ? file : fs::path(o.full_dir) / p.meta.code,
                                     p.meta);
    auto report = validate_balance(length_distributions(p, vocab),
                                   length_distributions(raw, vocab), o.threshold);
    all = all && report.passed;
    reports.emplace_back(p.meta.code, report);
  }
  std::ostringstream ss;
  write_balance_tsv(ss, reports);
  write_text(o.out, ss.str());
  return all ? 0 : kExitValidation;
}

int cmd_train_vocab(const Options& o) {
  const auto partitions = read_partitions(o.partitions);
  const auto vocab = train_vocabulary(partitions, o.vocab_size);
  vocab.save(o.out);
  std::cerr << "vocabulary: " << vocab.size() << " tokens\n";
  return 0;
}

int cmd_score(const Options& o) {
  const auto partitions = read_partitions(o.partitions);
  const auto vocab = SubwordVocabulary::load(o.vocab);
  ScoringOptions opts;
  opts.regime = parse_regime(o.regime);
  opts.config.order = o.order;
  opts.config.smoothing_alpha = o.alpha;
  opts.config.decay = o.decay;
  opts.holdout_fraction = o.holdout;
  opts.threads = o.threads;
  const auto seeds = seed_list(o.seeds);
  const auto matrix = score_all_pairs(partitions, vocab, seeds, opts);
  std::ostringstream ss;
  write_score_matrix(ss, matrix);
  write_text(o.out, ss.str());
  return 0;
}

int cmd_ingest(const Options& o) {
  std::optional<MetaTable> metas;
  if (!o.meta.empty()) metas = read_language_table(o.meta);
  const auto matrix =
      ingest_score_matrix(o.in, parse_orientation(o.orientation), metas ? &*metas : nullptr);
  std::cerr << "matrix: " << matrix.languages.size() << " languages, "
            << matrix.bilingual.size() << " bilingual entries"
            << (matrix.complete() ? "" : " (incomplete)") << '\n';
  if (!o.out.empty()) {
    std::ostringstream ss;
    write_score_matrix(ss, matrix);
    write_text(o.out, ss.str());
  }
  return 0;
}

int cmd_build_graph(const Options& o) {
  MetaTable metas = read_language_table(o.meta);
  if (!o.wals.empty()) attach_wals(metas, o.wals);
  std::optional<Orientation> expected;
  if (!o.orientation.empty()) expected = parse_orientation(o.orientation);
  const auto matrix = ingest_score_matrix(o.matrix, expected, &metas);
  const auto graph = build_graph(matrix, metas, resolve_created_at(o.created_at));
  if (o.out.empty() || o.out == "-") {
    std::cout << graph_to_json(graph).dump(2) << '\n';
  } else {
    export_graph(graph, o.out);
  }
  return 0;
}

int cmd_analyze(const Options& o) {
  const auto graph = load_graph(o.graph);
  write_text(o.out, analytics_to_json(graph).dump(2) + "\n");
  return 0;
}

int cmd_select(const Options& o) {
  const auto graph = load_graph(o.graph);
  SelectionRequest req;
  req.k = o.k;
  req.mode = parse_selection_mode(o.mode);
  req.min_families = o.min_families;
  for (const auto& c : codes_list(o.exclude)) req.excluded.insert(c);
  req.force_include = codes_list(o.force_include);
  req.seed = o.seed;
  RecipientSplit recipients{codes_list(o.rh), codes_list(o.rl)};
  const std::string id = o.id.empty() ? std::string(to_string(req.mode)) : o.id;
  const auto config = make_pretrain_config(graph, req, id, recipients, o.budget_chars);
  json doc = manifest_to_json(config);
  doc["donation_sum"] = donation_sum(graph, config.donors);
  if (!o.out.empty()) write_manifest(o.out, config);
  std::cout << doc.dump(2) << '\n';
  return 0;
}

int cmd_check_hypotheses(const Options& o) {
  const auto graph = load_graph(o.graph);
  const auto results = read_downstream_results(o.results);
  std::vector<PretrainConfig> configs;
  for (const auto& c : o.configs) configs.push_back(read_manifest(c));
  json out = json::array();
  for (const auto& h : evaluate_hypotheses(graph, results, configs)) {
    out.push_back(hypothesis_to_json(h));
  }
  write_text(o.out, out.dump(2) + "\n");
  return 0;
}

int cmd_serve(const Options& o) {
  ServiceConfig cfg;
  if (!o.service_config.empty()) cfg = read_service_config(o.service_config);
  if (!o.workspace.empty()) cfg.workspace_dir = o.workspace;
  if (!o.bind.empty()) cfg.bind = o.bind;
  if (!o.cors_origin.empty()) cfg.cors_origin = o.cors_origin;
  if (cfg.workspace_dir.empty()) throw ValidationError("serve: no workspace given");
  const auto workspace = load_workspace(cfg.workspace_dir);
  Server server(workspace, cfg.cors_origin);
  const auto address = parse_bind(cfg.bind);
  const int port = server.bind(address);
  std::cerr << "serving " << cfg.workspace_dir.string() << " on " << address.host << ':' << port
            << '\n';
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  server.listen();
  g_server = nullptr;
  return 0;
}

int cmd_gen_fixture(const Options& o) {
  FixtureOptions opts;
  opts.sentences_per_language = o.sentences;
  opts.seed = o.seed;
  write_synthetic_fixture(o.out, opts);
  return 0;
}

}  // namespace
}  // namespace xling

int main(int argc, char** argv) {
  using namespace xling;
  Options o;
  CLI::App app{"xling: multilingual pretraining transfer-graph toolkit"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");
  int (*run)(const Options&) = nullptr;
  auto sub = [&](const char* name, const char* desc, int (*fn)(const Options&)) {
    auto* s = app.add_subcommand(name, desc);
    s->callback([&run, fn] { run = fn; });
    return s;
  };

  auto* sample = sub("sample", "Draw fixed-budget partitions from raw corpora", cmd_sample);
  sample->add_option("--raw", o.raw, "Directory with <code>.txt or <code>/ corpora")->required();
  sample->add_option("--meta", o.meta, "Language table (default: <raw>/langs.tsv)");
  sample->add_option("--budget", o.budget, "Characters per language")->capture_default_str();
  sample->add_option("--seed", o.seed)->capture_default_str();
  sample->add_option("--out", o.out, "Partition directory")->required();

  auto* vb = sub("validate-balance", "Compare partition length distributions to full corpora",
                 cmd_validate_balance);
  vb->add_option("--sample", o.sample_dir, "Partition directory")->required();
  vb->add_option("--full", o.full_dir, "Raw corpus directory")->required();
  vb->add_option("--threshold", o.threshold)->capture_default_str();
  vb->add_option("--vocab", o.vocab, "Vocabulary file (trained on the sample when absent)");
  vb->add_option("--vocab-size", o.vocab_size)->capture_default_str();
  vb->add_option("--out", o.out, "Report TSV (default: stdout)");

  auto* tv = sub("train-vocab", "Train a shared WordPiece vocabulary", cmd_train_vocab);
  tv->add_option("--partitions", o.partitions)->required();
  tv->add_option("--size", o.vocab_size)->capture_default_str();
  tv->add_option("--out", o.out)->required();

  auto* score = sub("score", "Score mono and bilingual proxy models into a matrix", cmd_score);
  score->add_option("--partitions", o.partitions)->required();
  score->add_option("--vocab", o.vocab)->required();
  score->add_option("--seeds", o.seeds, "Comma-separated seeds")->capture_default_str();
  score->add_option("--regime", o.regime, "joint or sequential")->capture_default_str();
  score->add_option("--order", o.order, "n-gram order")->capture_default_str();
  score->add_option("--alpha", o.alpha, "Additive smoothing")->capture_default_str();
  score->add_option("--decay", o.decay, "Sequential-regime decay")->capture_default_str();
  score->add_option("--holdout", o.holdout, "Held-out fraction")->capture_default_str();
  score->add_option("--threads", o.threads, "0 = all cores")->capture_default_str();
  score->add_option("--out", o.out, "Matrix TSV (default: stdout)");

  auto* ingest = sub("ingest-matrix", "Validate an external score matrix", cmd_ingest);
  ingest->add_option("--in", o.in)->required();
  ingest->add_option("--orientation", o.orientation, "row-source or col-source")->required();
  ingest->add_option("--meta", o.meta, "Language table to check codes against");
  ingest->add_option("--out", o.out, "Write the normalized row-source matrix");

  auto* bg = sub("build-graph", "Build the transfer graph document", cmd_build_graph);
  bg->add_option("--matrix", o.matrix)->required();
  bg->add_option("--meta", o.meta)->required();
  bg->add_option("--wals", o.wals);
  bg->add_option("--orientation", o.orientation, "Expected matrix orientation");
  bg->add_option("--created-at", o.created_at, "Timestamp recorded in the graph");
  bg->add_option("--out", o.out, "Graph JSON (default: stdout)");

  auto* an = sub("analyze", "Reciprocity, correlations, bins and chi-square", cmd_analyze);
  an->add_option("--graph", o.graph)->required();
  an->add_option("--out", o.out);

  auto* sel = sub("select", "Choose a pretraining donor set", cmd_select);
  sel->add_option("--graph", o.graph)->required();
  sel->add_option("--k", o.k)->capture_default_str();
  sel->add_option("--mode", o.mode, "most_donating, least_donating, random or control")
      ->capture_default_str();
  sel->add_option("--min-families", o.min_families)->capture_default_str();
  sel->add_option("--exclude", o.exclude, "Comma-separated codes");
  sel->add_option("--force-include", o.force_include, "Comma-separated codes");
  sel->add_option("--recipients-high", o.rh, "Comma-separated codes");
  sel->add_option("--recipients-low", o.rl, "Comma-separated codes");
  sel->add_option("--seed", o.seed)->capture_default_str();
  sel->add_option("--id", o.id, "Config id (default: the mode name)");
  sel->add_option("--budget", o.budget_chars)->capture_default_str();
  sel->add_option("--out", o.out, "Write the manifest");

  auto* ch = sub("check-hypotheses", "Evaluate transfer hypotheses on downstream results",
                 cmd_check_hypotheses);
  ch->add_option("--graph", o.graph)->required();
  ch->add_option("--results", o.results)->required();
  ch->add_option("--configs", o.configs, "Manifest files")->required();
  ch->add_option("--out", o.out);

  auto* sv = sub("serve", "Serve a workspace over HTTP", cmd_serve);
  sv->add_option("--workspace", o.workspace);
  sv->add_option("--bind", o.bind, "host:port (default 127.0.0.1:8080)");
  sv->add_option("--cors-origin", o.cors_origin);
  sv->add_option("--config", o.service_config, "key=value service config");

  auto* gf = sub("gen-fixture", "Write the four-language synthetic fixture", cmd_gen_fixture);
  gf->add_option("--out", o.out)->required();
  gf->add_option("--sentences", o.sentences, "Sentences per language")->capture_default_str();
  gf->add_option("--seed", o.seed)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }
  try {
    return run(o);
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kExitIo;
  }
}
