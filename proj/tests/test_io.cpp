#include <catch2/catch_amalgamated.hpp>

#include <filesystem>

#include "vicoref/io.hpp"
#include "vicoref/utf8.hpp"

namespace fs = std::filesystem;
using namespace vicoref;

namespace {

fs::path temp_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "vicoref_io_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("utf8 helpers count code points, not bytes") {
  const std::string s = "Mẹ của tôi";  // 10 code points
  REQUIRE(utf8::length(s) == 10);
  REQUIRE(utf8::slice(s, 0, 2) == "Mẹ");
  REQUIRE(utf8::slice(s, 7, 10) == "tôi");
  REQUIRE(utf8::slice(s, 10, 10).empty());
  REQUIRE(utf8::byte_offset(s, 0) == 0);
  REQUIRE(utf8::byte_offset(s, 10) == s.size());
  REQUIRE(utf8::length("") == 0);
}

TEST_CASE("cluster files round-trip through JSON") {
  const auto dir = temp_dir("clusters");
  const ClusterSet cs = canonicalize({{1, 5}, {2, 3, 6}, {4, 7}}, 7);
  io::write_file(dir / "d.gold.json", io::clusters_to_json(cs).dump() + "\n");
  REQUIRE(io::load_clusters(dir / "d.gold.json") == cs);
  // explicit n_mentions overrides the max-index default
  REQUIRE(io::load_clusters(dir / "d.gold.json", 9).n_mentions == 9);
}

TEST_CASE("cluster file errors carry the offending path") {
  const auto dir = temp_dir("bad_clusters");
  io::write_file(dir / "notjson.json", "not json at all");
  io::write_file(dir / "notlist.json", "{\"a\":1}");
  io::write_file(dir / "notint.json", "[[1,\"x\"]]");
  io::write_file(dir / "overlap.json", "[[1,2],[2,3]]");
  for (const char* name : {"notjson.json", "notlist.json", "notint.json", "overlap.json"}) {
    try {
      io::load_clusters(dir / name);
      FAIL("expected ConfigError for " << name);
    } catch (const ConfigError& e) {
      if (std::string(name) != "notjson.json") {
        REQUIRE(std::string(e.what()).find(name) != std::string::npos);
      }
    }
  }
  REQUIRE_THROWS_AS(io::load_clusters(dir / "absent.json"), ConfigError);
}

TEST_CASE("corpus loading skips derived files and sorts by doc id") {
  const auto dir = temp_dir("corpus");
  io::write_file(dir / "b.txt", "{M1 Bé} ngủ.");
  io::write_file(dir / "a.txt", "{M1 Anh} cười.");
  io::write_file(dir / "a.indexed.txt", "[Anh]#1 cười.");
  io::write_file(dir / "notes.md", "ignored");
  const auto docs = io::load_corpus(dir);
  REQUIRE(docs.size() == 2);
  REQUIRE(docs[0].doc.doc_id == "a");
  REQUIRE(docs[1].doc.doc_id == "b");
  REQUIRE_THROWS_AS(io::load_corpus(dir / "missing"), ConfigError);
}

TEST_CASE("strict corpus loading propagates parse errors") {
  const auto dir = temp_dir("strict");
  io::write_file(dir / "bad.txt", "{M1 open");
  REQUIRE_NOTHROW(io::load_corpus(dir, ParseMode::Lenient));
  REQUIRE_THROWS_AS(io::load_corpus(dir, ParseMode::Strict), UnterminatedAnnotationError);
}

TEST_CASE("run config validation names the missing or bad field") {
  const auto dir = temp_dir("config");
  auto write_cfg = [&](const std::string& name, const nlohmann::json& j) {
    io::write_file(dir / name, j.dump());
    return dir / name;
  };
  REQUIRE_THROWS_AS(io::load_run_config(write_cfg("no_corpus.json", {{"exemplar_ids", {"a"}}})),
                    ConfigError);
  REQUIRE_THROWS_AS(
      io::load_run_config(write_cfg("no_exemplars.json", {{"corpus_dir", "c"}})),
      ConfigError);
  REQUIRE_THROWS_AS(
      io::load_run_config(write_cfg(
          "bad_phi.json",
          {{"corpus_dir", "c"}, {"exemplar_ids", {"a"}}, {"phi", "phi5"}})),
      ConfigError);
  REQUIRE_THROWS_AS(
      io::load_run_config(write_cfg(
          "bad_agg.json",
          {{"corpus_dir", "c"}, {"exemplar_ids", {"a"}}, {"aggregation", "median"}})),
      ConfigError);
  REQUIRE_THROWS_AS(
      io::load_run_config(write_cfg(
          "bad_mode.json",
          {{"corpus_dir", "c"}, {"exemplar_ids", {"a"}}, {"mode", "offline"}})),
      ConfigError);
  REQUIRE_THROWS_AS(io::load_run_config(dir / "missing.json"), ConfigError);
}

TEST_CASE("run config resolves relative paths against its own directory") {
  const auto dir = temp_dir("relative");
  nlohmann::json j{{"corpus_dir", "corpus"},
                   {"exemplar_ids", {"f01"}},
                   {"cassette", "cas.jsonl"},
                   {"model", {{"temperature", 0.5}, {"max_tokens", 64}}},
                   {"budget", {{"max_tokens", 1234}}},
                   {"concurrency", 3}};
  io::write_file(dir / "cfg.json", j.dump());
  const io::RunFileConfig cfg = io::load_run_config(dir / "cfg.json");
  REQUIRE(cfg.corpus_dir == dir / "corpus");
  REQUIRE(cfg.exemplar_dir == dir / "corpus");  // defaults to corpus_dir
  REQUIRE(cfg.eval.cassette_path == dir / "cas.jsonl");
  REQUIRE(cfg.eval.model.temperature == 0.5);
  REQUIRE(cfg.eval.model.max_tokens == 64);
  REQUIRE(cfg.eval.budget.max_tokens == 1234);
  REQUIRE(cfg.eval.concurrency == 3);
}

TEST_CASE("prf values survive the JSON round trip exactly") {
  const PRF prf = make_prf(1, 3, 2, 7);
  const PRF back = io::prf_from_json(io::prf_to_json(prf));
  REQUIRE(back.precision == prf.precision);
  REQUIRE(back.recall == prf.recall);
  REQUIRE(back.f1 == prf.f1);
  REQUIRE(back.degenerate == prf.degenerate);
}

TEST_CASE("metrics reject cluster sets over different mention counts") {
  const ClusterSet a = canonicalize({{1, 2}}, 2);
  const ClusterSet b = canonicalize({{1, 2}}, 3);
  REQUIRE_THROWS_AS(muc(a, b), InvariantError);
  REQUIRE_THROWS_AS(b_cubed(a, b), InvariantError);
  REQUIRE_THROWS_AS(ceaf(a, b), InvariantError);
}
