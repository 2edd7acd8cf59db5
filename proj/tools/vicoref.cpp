// Command-line entry point for the coreference evaluation toolkit.
// Exit codes: 0 success, 1 findings or data errors, 2 configuration/usage errors.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "vicoref/io.hpp"
#include "vicoref/metrics.hpp"
#include "vicoref/response.hpp"
#include "vicoref/runner.hpp"
#include "vicoref/sacr.hpp"
#include "vicoref/transform.hpp"

namespace fs = std::filesystem;
using namespace vicoref;

namespace {

constexpr int kOk = 0;
constexpr int kFindings = 1;
constexpr int kConfig = 2;

int cmd_validate(const fs::path& dir, bool strict) {
  int status = kOk;
  const auto docs = io::load_corpus(dir, ParseMode::Lenient);
  if (docs.empty()) {
    std::cerr << "no corpus files (*.txt) in " << dir << "\n";
    return kConfig;
  }
  for (const auto& parsed : docs) {
    const auto& doc = parsed.doc;
    for (const auto& w : parsed.warnings) {
      if (strict || is_brace_warning(w.kind)) {
        std::cout << doc.doc_id << ":\t" << to_string(w.kind) << "\tbyte " << w.offset << "\t"
                  << w.detail << "\n";
        status = kFindings;
      }
    }
    for (const auto& f : lint_guidelines(doc)) {
      std::cout << doc.doc_id << ":\t" << f.kind << "\ttag_index " << f.tag_index << "\t"
                << f.detail << "\n";
      status = kFindings;
    }
  }
  std::cout << (status == kOk ? "clean" : "findings reported") << " (" << docs.size()
            << " documents)\n";
  return status;
}

int cmd_index(const fs::path& dir, fs::path out_dir, bool also_gold) {
  if (out_dir.empty()) out_dir = dir;
  const auto docs = io::load_corpus(dir, ParseMode::Lenient);
  if (docs.empty()) {
    std::cerr << "no corpus files (*.txt) in " << dir << "\n";
    return kConfig;
  }
  for (const auto& parsed : docs) {
    const IndexedDocument indexed = index_document(parsed.doc);
    io::write_file(out_dir / (parsed.doc.doc_id + ".indexed.txt"), indexed.indexed_text);
    if (also_gold) {
      const ClusterSet gold = build_gold_clusters(parsed.doc);
      io::write_file(out_dir / (parsed.doc.doc_id + ".gold.json"),
                     io::clusters_to_json(gold).dump() + "\n");
    }
  }
  std::cout << "wrote " << docs.size() << (also_gold ? " indexed+gold" : " indexed")
            << " document(s) to " << out_dir.string() << "\n";
  return kOk;
}

int cmd_stats(const fs::path& dir) {
  const auto parsed = io::load_corpus(dir, ParseMode::Lenient);
  std::vector<AnnotatedDocument> docs;
  for (const auto& p : parsed) docs.push_back(p.doc);
  const CorpusStats stats = corpus_stats(docs);
  std::cout << stats_header() << "\n" << stats_row(stats) << "\n";
  return kOk;
}

std::vector<AnnotatedDocument> load_exemplars(const io::RunFileConfig& cfg) {
  std::vector<AnnotatedDocument> exemplars;
  for (const auto& id : cfg.exemplar_ids) {
    const fs::path file = cfg.exemplar_dir / (id + ".txt");
    if (!fs::exists(file)) {
      throw ConfigError("exemplar document not found: " + file.string());
    }
    exemplars.push_back(io::load_document(file).doc);
  }
  return exemplars;
}

std::vector<AnnotatedDocument> load_eval_docs(const io::RunFileConfig& cfg) {
  const std::set<std::string> exemplar_ids(cfg.exemplar_ids.begin(), cfg.exemplar_ids.end());
  std::vector<AnnotatedDocument> eval_docs;
  for (auto& parsed : io::load_corpus(cfg.corpus_dir)) {
    // When exemplars live in the corpus directory they are not evaluation targets.
    if (fs::equivalent(cfg.corpus_dir, cfg.exemplar_dir) && exemplar_ids.count(parsed.doc.doc_id)) {
      continue;
    }
    eval_docs.push_back(std::move(parsed.doc));
  }
  return eval_docs;
}

int cmd_prompt(const fs::path& doc_file, const fs::path& config_file) {
  const io::RunFileConfig cfg = io::load_run_config(config_file);
  const auto exemplars = load_exemplars(cfg);
  std::vector<FewShotExemplar> shots;
  for (const auto& d : exemplars) {
    shots.push_back({index_document(d).indexed_text, build_gold_clusters(d)});
  }
  const std::string fewshot = build_fewshot_prompt(shots, cfg.eval.prompt_template);
  const auto target = io::load_document(doc_file);
  std::cout << build_final_prompt(fewshot, index_document(target.doc), cfg.eval.budget,
                                  cfg.eval.prompt_template)
            << "\n";
  return kOk;
}

void print_corpus_scores(const CorpusScores& scores, const RunReport* report) {
  auto line = [](const char* name, const MetricSummary& m) {
    std::printf("%-12s %9.3f %9.3f %9.3f %10.3f%s\n", name, m.micro.precision, m.micro.recall,
                m.micro.f1, m.macro_f1, m.micro.degenerate ? "  [degenerate 0/0 seen]" : "");
  };
  std::printf("%-12s %9s %9s %9s %10s\n", "metric", "P", "R", "F1", "macro-F1");
  line("MUC", scores.muc);
  line("B-Cubed", scores.b_cubed);
  line("CEAF(phi3)", scores.ceaf_phi3);
  line("CEAF(phi4)", scores.ceaf_phi4);
  std::printf("CoNLL F1 (ceaf=%s): micro %.3f  macro %.3f\n",
              std::string(to_string(scores.conll_phi)).c_str(), scores.conll_micro,
              scores.conll_macro);
  if (report) {
    std::printf("consistency: clean %zu/%zu (%.3f)  recovered %zu (%.3f)  unparseable %zu "
                "(%.3f)  failed %zu  skipped %zu\n",
                report->clean, report->responded, report->consistency_rate, report->recovered,
                report->recovery_rate, report->unparseable, report->unparseable_rate,
                report->failed, report->skipped);
  }
}

int cmd_run(const fs::path& config_file, const std::string& mode_override,
            int concurrency_override, const std::string& phi_override,
            const fs::path& output_override, const fs::path& cassette_override,
            const std::string& aggregation_override) {
  io::RunFileConfig cfg = io::load_run_config(config_file);
  if (!mode_override.empty()) cfg.eval.mode = run_mode_from(mode_override);
  if (concurrency_override > 0) cfg.eval.concurrency = concurrency_override;
  if (!phi_override.empty()) {
    if (phi_override == "phi3") {
      cfg.eval.conll_phi = SimilarityKind::Phi3;
    } else if (phi_override == "phi4") {
      cfg.eval.conll_phi = SimilarityKind::Phi4;
    } else {
      throw ConfigError("--phi must be phi3 or phi4");
    }
  }
  if (!output_override.empty()) cfg.output_dir = output_override;
  if (!cassette_override.empty()) cfg.eval.cassette_path = cassette_override;
  if (!aggregation_override.empty()) {
    if (aggregation_override != "micro" && aggregation_override != "macro") {
      throw ConfigError("--aggregation must be micro or macro");
    }
    cfg.aggregation = aggregation_override;
  }

  const auto exemplars = load_exemplars(cfg);
  const auto eval_docs = load_eval_docs(cfg);
  const RunReport report = run_evaluation(exemplars, eval_docs, cfg.eval);
  io::write_run_outputs(cfg.output_dir, cfg, report);

  std::cout << "run complete: " << report.documents.size() << " documents ("
            << std::string(to_string(cfg.eval.mode)) << " mode), outputs in "
            << cfg.output_dir.string() << "\n";
  if (report.corpus) print_corpus_scores(*report.corpus, &report);
  return kOk;
}

int cmd_score(const fs::path& gold_dir, const fs::path& pred_dir, const fs::path& out_dir,
              const std::string& phi) {
  const SimilarityKind kind = phi == "phi4" ? SimilarityKind::Phi4 : SimilarityKind::Phi3;
  std::vector<fs::path> gold_files;
  for (const auto& entry : fs::directory_iterator(gold_dir)) {
    if (entry.is_regular_file() && entry.path().filename().string().ends_with(".gold.json")) {
      gold_files.push_back(entry.path());
    }
  }
  std::sort(gold_files.begin(), gold_files.end());
  if (gold_files.empty()) {
    std::cerr << "no *.gold.json files in " << gold_dir << "\n";
    return kConfig;
  }

  std::vector<DocScores> per_doc;
  for (const auto& gold_file : gold_files) {
    std::string id = gold_file.filename().string();
    id.erase(id.size() - std::string(".gold.json").size());
    const ClusterSet gold = io::load_clusters(gold_file);
    if (gold.n_mentions == 0) {
      std::cerr << id << ": no mentions, skipped\n";
      continue;
    }

    fs::path pred_file = pred_dir / (id + ".pred.json");
    if (!fs::exists(pred_file)) pred_file = pred_dir / (id + ".json");
    if (!fs::exists(pred_file)) pred_file = pred_dir / (id + ".gold.json");
    if (!fs::exists(pred_file)) {
      std::cerr << "no prediction for document '" << id << "' in " << pred_dir.string() << "\n";
      return kFindings;
    }
    const ClusterSet pred_raw = io::load_clusters(pred_file, gold.n_mentions);
    const NormalizedPrediction pred = normalize_prediction(pred_raw.clusters, gold.n_mentions);
    for (const auto& w : pred.warnings) std::cerr << id << ": " << w << "\n";
    per_doc.push_back(score_document(id, gold, pred.clusters, kind));
  }

  if (per_doc.empty()) {
    std::cerr << "no scorable documents (all gold sets were empty)\n";
    return kFindings;
  }
  const CorpusScores scores = aggregate_corpus(per_doc, kind);
  print_corpus_scores(scores, nullptr);
  if (!out_dir.empty()) {
    io::write_file(out_dir / "report.csv", io::report_csv(scores, "scored", "micro"));
    nlohmann::json docs = nlohmann::json::array();
    for (const auto& d : per_doc) docs.push_back(io::doc_scores_to_json(d));
    nlohmann::json out{{"metrics", io::corpus_scores_to_json(scores)}, {"documents", docs}};
    io::write_file(out_dir / "report.json", out.dump(2) + "\n");
  }
  return kOk;
}

int cmd_report(const fs::path& run_dir) {
  const io::LoadedRun loaded = io::load_run_dir(run_dir);
  io::write_file(run_dir / "report.json",
                 io::run_report_to_json(loaded.report, loaded.aggregation).dump(2) + "\n");
  if (loaded.report.corpus) {
    const std::string csv =
        io::report_csv(*loaded.report.corpus, loaded.report.model, loaded.aggregation);
    io::write_file(run_dir / "report.csv", csv);
    std::cout << csv;
  } else {
    std::cout << "no scored documents in " << run_dir.string() << "\n";
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Vietnamese coreference evaluation toolkit"};
  app.require_subcommand(1);

  std::string dir, gold_dir, pred_dir, doc_file, config_file, run_dir;
  std::string out_dir, mode, phi, aggregation, cassette;
  int concurrency = 0;
  bool strict = false;

  auto* validate = app.add_subcommand("validate", "Parse and lint a corpus directory");
  validate->add_option("dir", dir, "corpus directory")->required();
  validate->add_flag("--strict", strict, "also report non-brace parse warnings");

  auto* index = app.add_subcommand("index", "Emit {doc_id}.indexed.txt for each document");
  index->add_option("dir", dir, "corpus directory")->required();
  index->add_option("-o,--output", out_dir, "output directory (default: corpus directory)");

  auto* gold = app.add_subcommand("gold", "Emit indexed text and gold cluster files");
  gold->add_option("dir", dir, "corpus directory")->required();
  gold->add_option("-o,--output", out_dir, "output directory (default: corpus directory)");

  auto* stats = app.add_subcommand("stats", "Corpus statistics in the corpus-table shape");
  stats->add_option("dir", dir, "corpus directory")->required();

  auto* prompt = app.add_subcommand("prompt", "Print the final prompt for one document");
  prompt->add_option("doc", doc_file, "annotated document file")->required();
  prompt->add_option("-c,--config", config_file, "run configuration file")->required();

  auto* run = app.add_subcommand("run", "Run the full evaluation from a config file");
  run->add_option("config", config_file, "run configuration file")->required();
  run->add_option("--mode", mode, "live|replay|record (overrides config)");
  run->add_option("--concurrency", concurrency, "parallel in-flight requests");
  run->add_option("--phi", phi, "phi3|phi4 for the CoNLL CEAF term");
  run->add_option("--output", out_dir, "run output directory");
  run->add_option("--cassette", cassette, "cassette file (overrides config)");
  run->add_option("--aggregation", aggregation, "micro|macro headline aggregation");

  auto* score = app.add_subcommand("score", "Score predictions against gold cluster files");
  score->add_option("gold-dir", gold_dir, "directory of {doc_id}.gold.json")->required();
  score->add_option("pred-dir", pred_dir, "directory of {doc_id}.pred.json")->required();
  score->add_option("-o,--output", out_dir, "also write report.csv/report.json here");
  score->add_option("--phi", phi, "phi3|phi4 for the CoNLL CEAF term");

  auto* report = app.add_subcommand("report", "Re-emit report.csv/report.json from a run dir");
  report->add_option("run-dir", run_dir, "run output directory")->required();

  try {
    app.parse(argc, argv);
    if (app.got_subcommand(validate)) return cmd_validate(dir, strict);
    if (app.got_subcommand(index)) return cmd_index(dir, out_dir, false);
    if (app.got_subcommand(gold)) return cmd_index(dir, out_dir, true);
    if (app.got_subcommand(stats)) return cmd_stats(dir);
    if (app.got_subcommand(prompt)) return cmd_prompt(doc_file, config_file);
    if (app.got_subcommand(run)) {
      return cmd_run(config_file, mode, concurrency, phi, out_dir, cassette, aggregation);
    }
    if (app.got_subcommand(score)) return cmd_score(gold_dir, pred_dir, out_dir, phi);
    if (app.got_subcommand(report)) return cmd_report(run_dir);
    return kConfig;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? kOk : kConfig;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kConfig;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFindings;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFindings;
  }
}
