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

#include "xling/proxy_mlm.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <random>
#include <thread>

#include "xling/corpus.h"
#include "xling/error.h"

namespace xling {
namespace {

// Portable uniform double in [0, 1) (std distributions are not
// reproducible across standard libraries).
double unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

struct LanguageData {
  std::string code;
  TokenizedCorpus train;
  // eval[seed index] = masked held-out sequences.
  std::vector<std::vector<MaskedSequence>> eval;
};

std::vector<LanguageData> prepare(std::span<const LanguagePartition> partitions,
                                  const SubwordVocabulary& vocab,
                                  std::span<const std::uint64_t> seeds,
                                  const ScoringOptions& options) {
  if (seeds.empty()) throw ValidationError("scoring needs at least one seed");
  if (!(options.holdout_fraction > 0.0 && options.holdout_fraction < 1.0)) {
    throw ValidationError("holdout_fraction must be in (0, 1)");
  }
  options.policy.validate();
  options.config.validate();
  std::vector<LanguageData> out;
  for (const auto& p : partitions) {
    LanguageData d;
    d.code = p.meta.code;
    auto all = tokenize_sentences(vocab, p.sentences);
    const auto held = static_cast<std::size_t>(
        std::floor(static_cast<double>(all.size()) * options.holdout_fraction));
    if (held == 0) {
      throw ValidationError("language '" + d.code + "' has an empty held-out slice (" +
                            std::to_string(all.size()) + " sentences)");
    }
    const std::size_t split_at = all.size() - held;
    d.train.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(split_at));
    for (std::uint64_t seed : seeds) {
      std::vector<MaskedSequence> eval;
      for (std::size_t i = split_at; i < all.size(); ++i) {
        std::vector<int> seq;
        seq.reserve(all[i].size() + 1);
        seq.push_back(SubwordVocabulary::kCls);
        seq.insert(seq.end(), all[i].begin(), all[i].end());
        eval.push_back(apply_masking(seq, options.policy, mix_seed(seed ^ (i * 0x9E3779B97F4A7C15ULL), d.code),
                                     vocab.size()));
      }
      d.eval.push_back(std::move(eval));
    }
    out.push_back(std::move(d));
  }
  return out;
}

ProxyModel fit(const ProxyConfig& config, std::size_t vocab_size,
               std::initializer_list<const TokenizedCorpus*> corpora) {
  ProxyModel model(config.order, config.smoothing_alpha, vocab_size);
  for (const auto* corpus : corpora) {
    for (const auto& seq : *corpus) model.accumulate(seq);
  }
  return model;
}

double mean_mrr(const ProxyModel& model, const LanguageData& data) {
  double sum = 0.0;
  for (const auto& eval : data.eval) sum += evaluate_mrr(model, eval);
  return sum / static_cast<double>(data.eval.size());
}

void run_jobs(std::vector<std::function<void()>>& jobs, unsigned threads) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(jobs.size()));
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(jobs.size());
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      try {
        jobs[i]();
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

void MaskingPolicy::validate() const {
  if (!(select_rate > 0.0 && select_rate < 1.0)) {
    throw ValidationError("masking: select_rate must be in (0, 1)");
  }
  for (double f : {mask_frac, random_frac, keep_frac}) {
    if (f < 0.0 || f > 1.0) throw ValidationError("masking: fractions must be in [0, 1]");
  }
  if (std::fabs(mask_frac + random_frac + keep_frac - 1.0) > 1e-12) {
    throw ValidationError("masking: mask/random/keep fractions must sum to 1");
  }
  if (max_seq_len == 0) throw ValidationError("masking: max_seq_len must be positive");
}

MaskedSequence apply_masking(std::span<const int> ids, const MaskingPolicy& policy,
                             std::uint64_t seed, std::size_t vocab_size) {
  policy.validate();
  MaskedSequence out;
  const std::size_t len = std::min(ids.size(), policy.max_seq_len);
  out.input_ids.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(len));
  std::mt19937_64 rng(seed);
  const std::size_t n_regular = vocab_size > SubwordVocabulary::kNumSpecials
                                    ? vocab_size - SubwordVocabulary::kNumSpecials
                                    : 0;
  for (std::size_t i = 0; i < len; ++i) {
    const int original = out.input_ids[i];
    if (SubwordVocabulary::is_special(original)) continue;
    if (unit(rng) >= policy.select_rate) continue;
    out.gold.emplace_back(i, original);
    const double r = unit(rng);
    if (r < policy.mask_frac) {
      out.input_ids[i] = SubwordVocabulary::kMask;
    } else if (r < policy.mask_frac + policy.random_frac && n_regular > 0) {
      out.input_ids[i] = SubwordVocabulary::kNumSpecials + static_cast<int>(rng() % n_regular);
    }
  }
  return out;
}

void ProxyConfig::validate() const {
  if (order < 1) throw ValidationError("proxy: order must be >= 1");
  if (!(smoothing_alpha > 0.0)) throw ValidationError("proxy: smoothing_alpha must be positive");
  if (!(decay >= 0.0 && decay <= 1.0)) throw ValidationError("proxy: decay must be in [0, 1]");
}

ProxyModel::ProxyModel(int order, double smoothing_alpha, std::size_t vocab_size)
    : order_(order), alpha_(smoothing_alpha), vocab_size_(vocab_size) {
  if (order < 1) throw ValidationError("proxy: order must be >= 1");
  if (!(smoothing_alpha > 0.0)) throw ValidationError("proxy: smoothing_alpha must be positive");
  if (vocab_size == 0) throw ValidationError("proxy: empty vocabulary");
}

void ProxyModel::accumulate(std::span<const int> ids, double weight) {
  if (weight <= 0.0) return;
  std::vector<int> full;
  full.reserve(ids.size() + 1);
  full.push_back(SubwordVocabulary::kCls);
  full.insert(full.end(), ids.begin(), ids.end());
  std::vector<int> ctx;
  for (std::size_t j = 1; j < full.size(); ++j) {
    const std::size_t max_k = std::min<std::size_t>(order_ - 1, j);
    for (std::size_t k = 0; k <= max_k; ++k) {
      ctx.assign(full.begin() + static_cast<std::ptrdiff_t>(j - k),
                 full.begin() + static_cast<std::ptrdiff_t>(j));
      auto& succ = counts_[ctx];
      succ.total += weight;
      succ.next[full[j]] += weight;
    }
  }
}

void ProxyModel::decay(double lambda) {
  if (lambda < 0.0) throw ValidationError("proxy: negative decay");
  for (auto it = counts_.begin(); it != counts_.end();) {
    auto& succ = it->second;
    succ.total = 0.0;
    for (auto nt = succ.next.begin(); nt != succ.next.end();) {
      nt->second *= lambda;
      if (nt->second > 0.0) {
        succ.total += nt->second;
        ++nt;
      } else {
        nt = succ.next.erase(nt);
      }
    }
    if (succ.next.empty()) {
      it = counts_.erase(it);
    } else {
      ++it;
    }
  }
}

std::vector<const ProxyModel::Successors*> ProxyModel::chain(
    std::span<const int> context) const {
  // Every observed context has all its suffixes observed, so the chain
  // stops at the first miss.
  std::vector<const Successors*> out;
  const std::size_t max_k = std::min<std::size_t>(order_ - 1, context.size());
  std::vector<int> key;
  for (std::size_t k = 0; k <= max_k; ++k) {
    key.assign(context.end() - static_cast<std::ptrdiff_t>(k), context.end());
    auto it = counts_.find(key);
    if (it == counts_.end() || !(it->second.total > 0.0)) break;
    out.push_back(&it->second);
  }
  return out;
}

void ProxyModel::distribution(std::span<const int> context, std::vector<double>& out) const {
  const double v = static_cast<double>(vocab_size_);
  out.assign(vocab_size_, 1.0 / v);
  for (const Successors* succ : chain(context)) {
    const double denom = succ->total + alpha_ * v;
    double lower_seen = 0.0;
    for (const auto& [id, c] : succ->next) lower_seen += out[static_cast<std::size_t>(id)];
    const double unseen_lower = 1.0 - lower_seen;
    const double unseen_mass =
        alpha_ * (v - static_cast<double>(succ->next.size())) / denom;
    const double scale = unseen_lower > 0.0 ? unseen_mass / unseen_lower : 0.0;
    for (auto& p : out) p *= scale;
    for (const auto& [id, c] : succ->next) out[static_cast<std::size_t>(id)] = (c + alpha_) / denom;
  }
}

double ProxyModel::probability(std::span<const int> context, int token) const {
  std::vector<double> dist;
  distribution(context, dist);
  return dist.at(static_cast<std::size_t>(token));
}

std::size_t ProxyModel::rank(std::span<const int> context, int token) const {
  thread_local std::vector<double> dist;
  distribution(context, dist);
  const double p = dist.at(static_cast<std::size_t>(token));
  std::size_t higher = 0;
  for (double q : dist) {
    if (q > p) ++higher;
  }
  return 1 + higher;
}

TokenizedCorpus tokenize_sentences(const SubwordVocabulary& vocab,
                                   std::span<const std::string> sentences) {
  TokenizedCorpus out;
  out.reserve(sentences.size());
  for (const auto& s : sentences) out.push_back(tokenize(vocab, s).ids);
  return out;
}

ProxyModel train_proxy(std::span<const LanguagePartition> partitions,
                       const SubwordVocabulary& vocab, const ProxyConfig& config,
                       const ProxyModel* init_from) {
  config.validate();
  if (partitions.empty()) throw ValidationError("train_proxy: no partitions");
  ProxyModel model(config.order, config.smoothing_alpha, vocab.size());
  if (init_from) {
    if (init_from->order() != config.order || init_from->vocab_size() != vocab.size()) {
      throw ValidationError("train_proxy: init_from has a different order or vocabulary");
    }
    model = *init_from;
    model.decay(config.decay);
  }
  for (const auto& p : partitions) {
    for (const auto& seq : tokenize_sentences(vocab, p.sentences)) model.accumulate(seq);
  }
  return model;
}

double evaluate_mrr(const ProxyModel& model, std::span<const MaskedSequence> eval_set) {
  double sum = 0.0;
  std::size_t n = 0;
  const std::size_t width = static_cast<std::size_t>(model.order() - 1);
  for (const auto& seq : eval_set) {
    for (const auto& [pos, gold] : seq.gold) {
      const std::size_t start = pos >= width ? pos - width : 0;
      std::span<const int> ctx(seq.input_ids.data() + start, pos - start);
      sum += 1.0 / static_cast<double>(model.rank(ctx, gold));
      ++n;
    }
  }
  if (n == 0) throw ValidationError("evaluate_mrr: evaluation set has no gold positions");
  return sum / static_cast<double>(n);
}

std::string_view to_string(Regime r) { return r == Regime::kJoint ? "joint" : "sequential"; }

Regime parse_regime(std::string_view s) {
  if (s == "joint") return Regime::kJoint;
  if (s == "sequential") return Regime::kSequential;
  throw ValidationError("unknown regime '" + std::string(s) + "' (expected joint or sequential)");
}

ScoreMatrix score_all_pairs(std::span<const LanguagePartition> partitions,
                            const SubwordVocabulary& vocab, std::span<const std::uint64_t> seeds,
                            const ScoringOptions& options) {
  if (partitions.size() < 2) throw ValidationError("score_all_pairs: need at least 2 languages");
  const auto data = prepare(partitions, vocab, seeds, options);
  const std::size_t n = data.size();
  const auto& cfg = options.config;

  ScoreMatrix m;
  m.provenance = Provenance::kProxy;
  m.seeds.assign(seeds.begin(), seeds.end());
  m.regime = std::string(to_string(options.regime));
  for (const auto& d : data) m.languages.push_back(d.code);

  std::vector<ProxyModel> mono_models(n, ProxyModel(cfg.order, cfg.smoothing_alpha, vocab.size()));
  std::vector<double> mono(n, 0.0);
  std::vector<std::function<void()>> jobs;
  for (std::size_t i = 0; i < n; ++i) {
    jobs.emplace_back([&, i] {
      mono_models[i] = fit(cfg, vocab.size(), {&data[i].train});
      mono[i] = mean_mrr(mono_models[i], data[i]);
    });
  }
  run_jobs(jobs, options.threads);

  // bi[s][t]: model for (s, t) evaluated on t.
  std::vector<std::vector<double>> bi(n, std::vector<double>(n, 0.0));
  jobs.clear();
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t t = 0; t < n; ++t) {
      if (s == t) continue;
      if (options.regime == Regime::kJoint) {
        if (s > t) continue;
        jobs.emplace_back([&, s, t] {
          const ProxyModel model = fit(cfg, vocab.size(), {&data[s].train, &data[t].train});
          bi[s][t] = mean_mrr(model, data[t]);
          bi[t][s] = mean_mrr(model, data[s]);
        });
      } else {
        jobs.emplace_back([&, s, t] {
          ProxyModel model = mono_models[s];
          model.decay(cfg.decay);
          for (const auto& seq : data[t].train) model.accumulate(seq);
          bi[s][t] = mean_mrr(model, data[t]);
        });
      }
    }
  }
  run_jobs(jobs, options.threads);

  for (std::size_t i = 0; i < n; ++i) m.mono[data[i].code] = mono[i];
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t t = 0; t < n; ++t) {
      if (s != t) m.bilingual[{data[s].code, data[t].code}] = bi[s][t];
    }
  }
  m.validate();
  return m;
}

std::map<std::string, double> score_pretrain_set(std::span<const LanguagePartition> partitions,
                                                 const std::vector<std::string>& pretrain_codes,
                                                 const std::vector<std::string>& eval_codes,
                                                 const SubwordVocabulary& vocab,
                                                 std::span<const std::uint64_t> seeds,
                                                 const ScoringOptions& options) {
  const auto data = prepare(partitions, vocab, seeds, options);
  auto find = [&](const std::string& code) -> const LanguageData& {
    for (const auto& d : data) {
      if (d.code == code) return d;
    }
    throw ValidationError("no partition for language '" + code + "'");
  };
  ProxyModel model(options.config.order, options.config.smoothing_alpha, vocab.size());
  for (const auto& code : pretrain_codes) {
    for (const auto& seq : find(code).train) model.accumulate(seq);
  }
  std::map<std::string, double> out;
  for (const auto& code : eval_codes) out[code] = mean_mrr(model, find(code));
  return out;
}

}  // namespace xling
