#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "vicoref/client.hpp"
#include "vicoref/core.hpp"
#include "vicoref/errors.hpp"
#include "vicoref/metrics.hpp"
#include "vicoref/prompt.hpp"
#include "vicoref/response.hpp"
#include "vicoref/transform.hpp"

namespace vicoref {

struct ModelExchange {
  std::string doc_id;
  std::string prompt;
  std::string raw_response;
  std::optional<ClusterSet> parsed;
  Consistency consistency = Consistency::Unparseable;
  int attempt_count = 0;
  long latency_ms = 0;
};

struct EvalConfig {
  ModelConfig model;
  RunMode mode = RunMode::Replay;
  std::filesystem::path cassette_path;
  TokenBudget budget;
  PromptTemplate prompt_template;
  SimilarityKind conll_phi = SimilarityKind::Phi3;
  // Score unparseable/failed documents as the all-singleton fallback instead of
  // excluding them, keeping denominators comparable across models.
  bool include_unparseable = true;
  int concurrency = 1;
};

struct DocResult {
  std::string doc_id;
  bool responded = false;
  ModelExchange exchange;
  std::optional<DocScores> scores;
  std::vector<std::string> flags;
  std::vector<std::string> warnings;
};

struct RunReport {
  std::string model;
  RunMode mode = RunMode::Replay;
  SimilarityKind conll_phi = SimilarityKind::Phi3;
  std::vector<DocResult> documents;  // doc_id order
  std::optional<CorpusScores> corpus;
  std::size_t responded = 0;
  std::size_t clean = 0;
  std::size_t recovered = 0;
  std::size_t unparseable = 0;
  std::size_t failed = 0;   // transport/cassette/budget failures
  std::size_t skipped = 0;  // documents with no mentions
  // Rates are over documents that produced a response.
  double consistency_rate = 0;
  double recovery_rate = 0;
  double unparseable_rate = 0;
  std::vector<std::string> notes;
};

namespace detail {

inline DocResult evaluate_one(const AnnotatedDocument& doc, const std::string& fewshot,
                              const EvalConfig& cfg, ModelClient& client) {
  DocResult result;
  result.doc_id = doc.doc_id;
  result.exchange.doc_id = doc.doc_id;

  const int n = static_cast<int>(doc.mentions.size());
  if (n == 0) {
    result.flags.push_back("no_mentions");
    return result;
  }
  const ClusterSet gold = build_gold_clusters(doc);

  auto score_fallback = [&](const std::string& flag) {
    result.flags.push_back(flag);
    if (cfg.include_unparseable) {
      result.scores = score_document(doc.doc_id, gold, singleton_fallback(n), cfg.conll_phi);
      result.flags.push_back("fallback_scored");
    }
  };

  std::string prompt;
  try {
    prompt = build_final_prompt(fewshot, index_document(doc), cfg.budget, cfg.prompt_template);
  } catch (const BudgetExceededError& e) {
    result.flags.push_back("budget_exceeded");
    score_fallback("failed");
    result.warnings.push_back(e.what());
    return result;
  }
  result.exchange.prompt = prompt;

  CompletionResult completion;
  try {
    completion = client.complete(prompt);
  } catch (const CassetteMissError& e) {
    result.flags.push_back("cassette_miss");
    score_fallback("failed");
    result.warnings.push_back(e.what());
    return result;
  } catch (const TransportError& e) {
    result.flags.push_back("transport_failed");
    score_fallback("failed");
    result.warnings.push_back(e.what());
    return result;
  }

  result.responded = true;
  result.exchange.raw_response = completion.text;
  result.exchange.attempt_count = completion.attempt_count;
  result.exchange.latency_ms = completion.latency_ms;

  ResponseParse parsed = parse_response(completion.text, n);
  result.exchange.consistency = parsed.consistency;
  result.exchange.parsed = parsed.clusters;
  result.warnings = std::move(parsed.warnings);

  if (parsed.consistency == Consistency::Unparseable) {
    score_fallback("unparseable_fallback");
  } else {
    result.scores = score_document(doc.doc_id, gold, *parsed.clusters, cfg.conll_phi);
  }
  return result;
}

}  // namespace detail

// Runs the full evaluation: index each document, build the prompt, complete
// (live or from cassette), parse and score. Per-document transport failures
// are flagged, never fatal; only configuration problems abort the run.
inline RunReport run_evaluation(const std::vector<AnnotatedDocument>& exemplars,
                                const std::vector<AnnotatedDocument>& eval_docs,
                                const EvalConfig& cfg) {
  if (exemplars.empty()) throw ConfigError("evaluation requires at least one exemplar document");
  if (eval_docs.empty()) throw ConfigError("evaluation requires at least one target document");

  std::set<std::string> exemplar_ids, eval_ids;
  for (const auto& d : exemplars) {
    if (!exemplar_ids.insert(d.doc_id).second) {
      throw ConfigError("duplicate exemplar document id '" + d.doc_id + "'");
    }
  }
  for (const auto& d : eval_docs) {
    if (!eval_ids.insert(d.doc_id).second) {
      throw ConfigError("duplicate evaluation document id '" + d.doc_id + "'");
    }
    if (exemplar_ids.count(d.doc_id)) {
      throw ConfigError("document '" + d.doc_id + "' is both exemplar and evaluation target");
    }
  }

  std::vector<FewShotExemplar> shots;
  shots.reserve(exemplars.size());
  for (const auto& d : exemplars) {
    shots.push_back({index_document(d).indexed_text, build_gold_clusters(d)});
  }
  const std::string fewshot = build_fewshot_prompt(shots, cfg.prompt_template);

  std::vector<const AnnotatedDocument*> ordered;
  ordered.reserve(eval_docs.size());
  for (const auto& d : eval_docs) ordered.push_back(&d);
  std::sort(ordered.begin(), ordered.end(),
            [](const AnnotatedDocument* a, const AnnotatedDocument* b) {
              return a->doc_id < b->doc_id;
            });

  ModelClient client(cfg.model, cfg.mode, cfg.cassette_path);
  std::vector<DocResult> results(ordered.size());
  auto process = [&](std::size_t i) {
    try {
      results[i] = detail::evaluate_one(*ordered[i], fewshot, cfg, client);
    } catch (const std::exception& e) {
      DocResult r;
      r.doc_id = ordered[i]->doc_id;
      r.flags.push_back("document_error");
      r.warnings.push_back(e.what());
      results[i] = std::move(r);
    }
  };
  const int workers = std::max(1, std::min<int>(cfg.concurrency,
                                                static_cast<int>(ordered.size())));
  if (workers == 1) {
    for (std::size_t i = 0; i < ordered.size(); ++i) process(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < ordered.size(); i = next.fetch_add(1)) {
          process(i);
        }
      });
    }
    for (auto& t : pool) t.join();
  }

  RunReport report;
  report.model = cfg.model.model;
  report.mode = cfg.mode;
  report.conll_phi = cfg.conll_phi;
  std::vector<DocScores> scored;
  for (DocResult& r : results) {
    if (r.responded) {
      ++report.responded;
      switch (r.exchange.consistency) {
        case Consistency::Clean: ++report.clean; break;
        case Consistency::Recovered: ++report.recovered; break;
        case Consistency::Unparseable: ++report.unparseable; break;
      }
    } else if (std::find(r.flags.begin(), r.flags.end(), "no_mentions") != r.flags.end()) {
      ++report.skipped;
    } else {
      ++report.failed;
    }
    if (r.scores) scored.push_back(*r.scores);
  }
  if (report.responded > 0) {
    const double denom = static_cast<double>(report.responded);
    report.consistency_rate = static_cast<double>(report.clean) / denom;
    report.recovery_rate = static_cast<double>(report.recovered) / denom;
    report.unparseable_rate = static_cast<double>(report.unparseable) / denom;
  }
  if (!scored.empty()) report.corpus = aggregate_corpus(scored, cfg.conll_phi);
  report.documents = std::move(results);
  report.notes = {
      "ceaf recall follows the standard Luo 2005 definition total/sum phi(G_i,G_i)",
      std::string("conll ceaf variant: ") + std::string(to_string(cfg.conll_phi)),
      "headline aggregation is micro (summed numerators/denominators); macro reported alongside",
  };
  return report;
}

}  // namespace vicoref
