#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vicoref/core.hpp"
#include "vicoref/errors.hpp"
#include "vicoref/metrics.hpp"
#include "vicoref/runner.hpp"
#include "vicoref/sacr.hpp"

namespace vicoref::io {

using nlohmann::json;

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write file: " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

// Corpus layout: one document per UTF-8 .txt file; the file stem is the doc id.
// Derived outputs (*.indexed.txt) are not corpus documents.
inline bool is_corpus_file(const std::filesystem::path& path) {
  const std::string name = path.filename().string();
  return name.size() > 4 && name.ends_with(".txt") && !name.ends_with(".indexed.txt");
}

inline SacrParseResult load_document(const std::filesystem::path& path,
                                     ParseMode mode = ParseMode::Lenient) {
  SacrParseOptions opts;
  opts.mode = mode;
  opts.doc_id = path.stem().string();
  return parse_sacr(read_file(path), opts);
}

inline std::vector<SacrParseResult> load_corpus(const std::filesystem::path& dir,
                                                ParseMode mode = ParseMode::Lenient) {
  if (!std::filesystem::is_directory(dir)) {
    throw ConfigError("corpus directory does not exist: " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && is_corpus_file(entry.path())) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<SacrParseResult> docs;
  docs.reserve(files.size());
  for (const auto& f : files) docs.push_back(load_document(f, mode));
  return docs;
}

inline json clusters_to_json(const ClusterSet& cs) {
  json out = json::array();
  for (const auto& cluster : cs.clusters) out.push_back(cluster);
  return out;
}

// Reads the bare list-of-lists serialization. n_mentions defaults to the
// largest index present (a gold set covers 1..n).
inline ClusterSet clusters_from_json(const json& j, std::optional<int> n_mentions = {}) {
  if (!j.is_array()) throw ConfigError("cluster file must hold a JSON list of lists");
  std::vector<std::vector<int>> raw;
  int max_index = 0;
  for (const auto& cluster : j) {
    if (!cluster.is_array()) throw ConfigError("cluster file must hold a JSON list of lists");
    std::vector<int> members;
    for (const auto& v : cluster) {
      if (!v.is_number_integer()) throw ConfigError("cluster members must be integers");
      members.push_back(v.get<int>());
      max_index = std::max(max_index, members.back());
    }
    raw.push_back(std::move(members));
  }
  return canonicalize(std::move(raw), n_mentions.value_or(max_index));
}

inline ClusterSet load_clusters(const std::filesystem::path& path,
                                std::optional<int> n_mentions = {}) {
  json j = json::parse(read_file(path), nullptr, false);
  if (j.is_discarded()) throw ConfigError("invalid JSON in " + path.string());
  try {
    return clusters_from_json(j, n_mentions);
  } catch (const Error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

inline json prf_to_json(const PRF& prf) {
  return json{{"precision", prf.precision}, {"recall", prf.recall},
              {"f1", prf.f1},               {"precision_num", prf.p_num},
              {"precision_den", prf.p_den}, {"recall_num", prf.r_num},
              {"recall_den", prf.r_den},    {"degenerate", prf.degenerate}};
}

inline PRF prf_from_json(const json& j) {
  return make_prf(j.at("precision_num").get<double>(), j.at("precision_den").get<double>(),
                  j.at("recall_num").get<double>(), j.at("recall_den").get<double>());
}

inline json doc_scores_to_json(const DocScores& s) {
  return json{{"doc_id", s.doc_id},
              {"n_mentions", s.n_mentions},
              {"muc", prf_to_json(s.muc)},
              {"b_cubed", prf_to_json(s.b_cubed)},
              {"ceaf_phi3", prf_to_json(s.ceaf_phi3)},
              {"ceaf_phi4", prf_to_json(s.ceaf_phi4)},
              {"conll_f1", s.conll}};
}

inline DocScores doc_scores_from_json(const json& j,
                                      SimilarityKind conll_phi = SimilarityKind::Phi3) {
  DocScores s;
  s.doc_id = j.at("doc_id").get<std::string>();
  s.n_mentions = j.value("n_mentions", 0);
  s.muc = prf_from_json(j.at("muc"));
  s.b_cubed = prf_from_json(j.at("b_cubed"));
  s.ceaf_phi3 = prf_from_json(j.at("ceaf_phi3"));
  s.ceaf_phi4 = prf_from_json(j.at("ceaf_phi4"));
  const PRF& chosen = conll_phi == SimilarityKind::Phi3 ? s.ceaf_phi3 : s.ceaf_phi4;
  s.conll = conll_f1(s.muc.f1, s.b_cubed.f1, chosen.f1);
  return s;
}

inline std::string format_score(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return std::string(buf);
}

// One row per metric, one model column, F1 values with 3 decimals.
inline std::string report_csv(const CorpusScores& scores, const std::string& model,
                              const std::string& aggregation = "micro") {
  const bool micro = aggregation != "macro";
  auto f1 = [&](const MetricSummary& m) { return micro ? m.micro.f1 : m.macro_f1; };
  const MetricSummary& ceaf_chosen =
      scores.conll_phi == SimilarityKind::Phi3 ? scores.ceaf_phi3 : scores.ceaf_phi4;
  std::string out = "Metric," + model + "\n";
  out += "CoNLL F1," + format_score(micro ? scores.conll_micro : scores.conll_macro) + "\n";
  out += "MUC F1," + format_score(f1(scores.muc)) + "\n";
  out += "B-Cubed F1," + format_score(f1(scores.b_cubed)) + "\n";
  out += "CEAF F1," + format_score(f1(ceaf_chosen)) + "\n";
  return out;
}

inline json metric_summary_to_json(const MetricSummary& m) {
  return json{{"micro", prf_to_json(m.micro)}, {"macro_f1", m.macro_f1}};
}

inline json corpus_scores_to_json(const CorpusScores& s) {
  return json{{"documents", s.documents},
              {"muc", metric_summary_to_json(s.muc)},
              {"b_cubed", metric_summary_to_json(s.b_cubed)},
              {"ceaf_phi3", metric_summary_to_json(s.ceaf_phi3)},
              {"ceaf_phi4", metric_summary_to_json(s.ceaf_phi4)},
              {"conll_phi", std::string(to_string(s.conll_phi))},
              {"conll_f1", json{{"micro", s.conll_micro}, {"macro", s.conll_macro}}}};
}

inline json run_report_to_json(const RunReport& report, const std::string& aggregation) {
  json flagged = json::object();
  for (const DocResult& d : report.documents) {
    if (!d.flags.empty()) flagged[d.doc_id] = d.flags;
  }
  json out{{"model", report.model},
           {"mode", std::string(to_string(report.mode))},
           {"conll_phi", std::string(to_string(report.conll_phi))},
           {"aggregation", aggregation},
           {"documents", report.documents.size()},
           {"responded", report.responded},
           {"clean", report.clean},
           {"recovered", report.recovered},
           {"unparseable", report.unparseable},
           {"failed", report.failed},
           {"skipped", report.skipped},
           {"consistency_rate", report.consistency_rate},
           {"recovery_rate", report.recovery_rate},
           {"unparseable_rate", report.unparseable_rate},
           {"flagged_documents", flagged},
           {"notes", report.notes}};
  if (report.corpus) out["metrics"] = corpus_scores_to_json(*report.corpus);
  return out;
}

inline json doc_result_to_json(const DocResult& d) {
  json out{{"doc_id", d.doc_id},
           {"responded", d.responded},
           {"flags", d.flags},
           {"warnings", d.warnings}};
  if (d.responded) {
    out["consistency"] = std::string(to_string(d.exchange.consistency));
    out["attempt_count"] = d.exchange.attempt_count;
    out["latency_ms"] = d.exchange.latency_ms;
    if (d.exchange.parsed) out["predicted"] = clusters_to_json(*d.exchange.parsed);
  } else {
    out["consistency"] = nullptr;
  }
  if (d.scores) out["scores"] = doc_scores_to_json(*d.scores);
  return out;
}

// Run configuration file (JSON). Paths are resolved relative to the config
// file's directory.
struct RunFileConfig {
  std::filesystem::path corpus_dir;
  std::filesystem::path exemplar_dir;  // defaults to corpus_dir
  std::filesystem::path output_dir = "run";
  std::vector<std::string> exemplar_ids;
  std::string aggregation = "micro";
  EvalConfig eval;
};

inline RunFileConfig load_run_config(const std::filesystem::path& path) {
  json j = json::parse(read_file(path), nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    throw ConfigError("run config is not a JSON object: " + path.string());
  }
  RunFileConfig cfg;
  const auto base = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  auto resolve = [&](const std::string& p) -> std::filesystem::path {
    std::filesystem::path fp(p);
    return fp.is_absolute() ? fp : base / fp;
  };

  if (!j.contains("corpus_dir")) throw ConfigError("run config misses 'corpus_dir'");
  cfg.corpus_dir = resolve(j.at("corpus_dir").get<std::string>());
  cfg.exemplar_dir =
      j.contains("exemplar_dir") ? resolve(j.at("exemplar_dir").get<std::string>())
                                 : cfg.corpus_dir;
  if (j.contains("output_dir")) cfg.output_dir = resolve(j.at("output_dir").get<std::string>());
  if (!j.contains("exemplar_ids") || !j.at("exemplar_ids").is_array() ||
      j.at("exemplar_ids").empty()) {
    throw ConfigError("run config misses a nonempty 'exemplar_ids' list");
  }
  for (const auto& id : j.at("exemplar_ids")) cfg.exemplar_ids.push_back(id.get<std::string>());

  cfg.eval.mode = run_mode_from(j.value("mode", "replay"));
  if (j.contains("cassette")) cfg.eval.cassette_path = resolve(j.at("cassette").get<std::string>());
  cfg.aggregation = j.value("aggregation", "micro");
  if (cfg.aggregation != "micro" && cfg.aggregation != "macro") {
    throw ConfigError("aggregation must be micro or macro");
  }
  const std::string phi = j.value("phi", "phi3");
  if (phi == "phi3") {
    cfg.eval.conll_phi = SimilarityKind::Phi3;
  } else if (phi == "phi4") {
    cfg.eval.conll_phi = SimilarityKind::Phi4;
  } else {
    throw ConfigError("phi must be phi3 or phi4");
  }
  cfg.eval.concurrency = j.value("concurrency", 1);
  if (cfg.eval.concurrency < 1) throw ConfigError("concurrency must be >= 1");
  cfg.eval.include_unparseable = j.value("include_unparseable", true);

  if (j.contains("model")) {
    const json& m = j.at("model");
    ModelConfig& mc = cfg.eval.model;
    mc.base_url = m.value("base_url", mc.base_url);
    mc.completions_path = m.value("completions_path", mc.completions_path);
    mc.model = m.value("model", mc.model);
    mc.temperature = m.value("temperature", mc.temperature);
    if (m.contains("max_tokens")) mc.max_tokens = m.at("max_tokens").get<int>();
    mc.api_key_env = m.value("api_key_env", mc.api_key_env);
    mc.retry.max_attempts = m.value("max_attempts", mc.retry.max_attempts);
    mc.retry.initial_backoff_ms = m.value("initial_backoff_ms", mc.retry.initial_backoff_ms);
    mc.retry.backoff_multiplier = m.value("backoff_multiplier", mc.retry.backoff_multiplier);
    mc.retry.jitter_ms = m.value("jitter_ms", mc.retry.jitter_ms);
    mc.timeout_seconds = m.value("timeout_seconds", mc.timeout_seconds);
  }
  if (j.contains("budget")) {
    const json& b = j.at("budget");
    cfg.eval.budget.max_tokens = b.value("max_tokens", cfg.eval.budget.max_tokens);
    cfg.eval.budget.chars_per_token = b.value("chars_per_token", cfg.eval.budget.chars_per_token);
    cfg.eval.budget.safety_margin = b.value("safety_margin", cfg.eval.budget.safety_margin);
  }
  if (j.contains("prompt")) {
    const json& p = j.at("prompt");
    cfg.eval.prompt_template.version = p.value("version", cfg.eval.prompt_template.version);
    cfg.eval.prompt_template.preamble = p.value("preamble", cfg.eval.prompt_template.preamble);
    cfg.eval.prompt_template.request = p.value("request", cfg.eval.prompt_template.request);
  }
  return cfg;
}

inline json manifest_json(const RunFileConfig& cfg, const RunReport& report,
                          const std::vector<std::string>& eval_ids) {
  json model{{"base_url", cfg.eval.model.base_url},
             {"completions_path", cfg.eval.model.completions_path},
             {"model", cfg.eval.model.model},
             {"temperature", cfg.eval.model.temperature},
             {"api_key_env", cfg.eval.model.api_key_env},
             {"max_attempts", cfg.eval.model.retry.max_attempts}};
  json out{{"mode", std::string(to_string(cfg.eval.mode))},
           {"model", model},
           {"budget", json{{"max_tokens", cfg.eval.budget.max_tokens},
                           {"chars_per_token", cfg.eval.budget.chars_per_token},
                           {"safety_margin", cfg.eval.budget.safety_margin}}},
           {"conll_phi", std::string(to_string(cfg.eval.conll_phi))},
           {"aggregation", cfg.aggregation},
           {"concurrency", cfg.eval.concurrency},
           {"include_unparseable", cfg.eval.include_unparseable},
           {"prompt_version", cfg.eval.prompt_template.version},
           {"cassette", cfg.eval.cassette_path.string()},
           {"exemplar_ids", cfg.exemplar_ids},
           {"evaluation_ids", eval_ids},
           {"notes", report.notes}};
  return out;
}

// Rebuilds a RunReport from a run directory (manifest.json + scores/*.json).
// Aggregation is recomputed from the stored numerator/denominator pairs, so a
// re-emitted report is byte-identical to the one the run wrote.
struct LoadedRun {
  RunReport report;
  std::string aggregation = "micro";
};

inline LoadedRun load_run_dir(const std::filesystem::path& run_dir) {
  const json manifest = json::parse(read_file(run_dir / "manifest.json"), nullptr, false);
  if (manifest.is_discarded() || !manifest.is_object()) {
    throw ConfigError("invalid manifest.json in " + run_dir.string());
  }
  LoadedRun out;
  out.aggregation = manifest.value("aggregation", "micro");
  out.report.mode = run_mode_from(manifest.value("mode", "replay"));
  if (manifest.contains("model") && manifest["model"].is_object()) {
    out.report.model = manifest["model"].value("model", "");
  }
  const std::string phi = manifest.value("conll_phi", "phi3");
  out.report.conll_phi = phi == "phi4" ? SimilarityKind::Phi4 : SimilarityKind::Phi3;
  if (manifest.contains("notes")) {
    for (const auto& n : manifest["notes"]) out.report.notes.push_back(n.get<std::string>());
  }

  const auto scores_dir = run_dir / "scores";
  if (!std::filesystem::is_directory(scores_dir)) {
    throw ConfigError("run directory has no scores/: " + run_dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(scores_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());

  std::vector<DocScores> scored;
  for (const auto& file : files) {
    const json d = json::parse(read_file(file), nullptr, false);
    if (d.is_discarded()) throw ConfigError("invalid score file: " + file.string());
    DocResult r;
    r.doc_id = d.at("doc_id").get<std::string>();
    r.responded = d.value("responded", false);
    if (d.contains("flags")) {
      for (const auto& f : d["flags"]) r.flags.push_back(f.get<std::string>());
    }
    if (d.contains("warnings")) {
      for (const auto& w : d["warnings"]) r.warnings.push_back(w.get<std::string>());
    }
    if (r.responded) {
      ++out.report.responded;
      r.exchange.doc_id = r.doc_id;
      r.exchange.consistency = consistency_from(d.at("consistency").get<std::string>());
      r.exchange.attempt_count = d.value("attempt_count", 0);
      r.exchange.latency_ms = d.value("latency_ms", 0L);
      if (d.contains("predicted")) r.exchange.parsed = clusters_from_json(d["predicted"]);
      switch (r.exchange.consistency) {
        case Consistency::Clean: ++out.report.clean; break;
        case Consistency::Recovered: ++out.report.recovered; break;
        case Consistency::Unparseable: ++out.report.unparseable; break;
      }
    } else if (std::find(r.flags.begin(), r.flags.end(), "no_mentions") != r.flags.end()) {
      ++out.report.skipped;
    } else {
      ++out.report.failed;
    }
    if (d.contains("scores")) {
      r.scores = doc_scores_from_json(d["scores"], out.report.conll_phi);
      scored.push_back(*r.scores);
    }
    out.report.documents.push_back(std::move(r));
  }
  if (out.report.responded > 0) {
    const double denom = static_cast<double>(out.report.responded);
    out.report.consistency_rate = static_cast<double>(out.report.clean) / denom;
    out.report.recovery_rate = static_cast<double>(out.report.recovered) / denom;
    out.report.unparseable_rate = static_cast<double>(out.report.unparseable) / denom;
  }
  if (!scored.empty()) out.report.corpus = aggregate_corpus(scored, out.report.conll_phi);
  return out;
}

// Writes manifest.json, scores/{doc_id}.json, report.json and report.csv.
// Replay runs contain no wall-clock data, so outputs are bit-identical across
// repetitions.
inline void write_run_outputs(const std::filesystem::path& run_dir, const RunFileConfig& cfg,
                              const RunReport& report) {
  std::vector<std::string> eval_ids;
  for (const DocResult& d : report.documents) eval_ids.push_back(d.doc_id);
  write_file(run_dir / "manifest.json", manifest_json(cfg, report, eval_ids).dump(2) + "\n");
  for (const DocResult& d : report.documents) {
    write_file(run_dir / "scores" / (d.doc_id + ".json"), doc_result_to_json(d).dump(2) + "\n");
  }
  write_file(run_dir / "report.json", run_report_to_json(report, cfg.aggregation).dump(2) + "\n");
  if (report.corpus) {
    write_file(run_dir / "report.csv",
               report_csv(*report.corpus, report.model, cfg.aggregation));
  }
}

}  // namespace vicoref::io
