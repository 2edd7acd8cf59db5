#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

#include "vicoref/client.hpp"
#include "vicoref/io.hpp"
#include "vicoref/prompt.hpp"
#include "vicoref/transform.hpp"

namespace fs = std::filesystem;
using namespace vicoref;

namespace {

const fs::path kFixtures = VICOREF_FIXTURE_DIR;
const std::string kCli = VICOREF_CLI_PATH;

struct CommandResult {
  int status = -1;
  std::string output;
};

CommandResult run_command(const std::string& args) {
  const std::string command = kCli + " " + args + " 2>&1";
  FILE* pipe = popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  CommandResult result;
  std::array<char, 4096> buffer;
  while (std::size_t n = fread(buffer.data(), 1, buffer.size(), pipe)) {
    result.output.append(buffer.data(), n);
  }
  const int raw = pclose(pipe);
  result.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return result;
}

fs::path temp_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "vicoref_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("cli gold emits the worked example's cluster file") {
  const auto out = temp_dir("gold");
  const auto result =
      run_command("gold " + (kFixtures / "corpus").string() + " -o " + out.string());
  REQUIRE(result.status == 0);
  REQUIRE(io::read_file(out / "a03.gold.json") == "[[1,5],[2,3,6],[4,7]]\n");
  const std::string indexed = io::read_file(out / "a03.indexed.txt");
  REQUIRE(indexed.find("[Em]#1 trân trọng [hai người bạn]#2") != std::string::npos);
}

TEST_CASE("cli commands are idempotent over unchanged inputs") {
  const auto out = temp_dir("idempotent");
  REQUIRE(run_command("gold " + (kFixtures / "corpus").string() + " -o " + out.string())
              .status == 0);
  const std::string first = io::read_file(out / "a03.gold.json") +
                            io::read_file(out / "a06.indexed.txt");
  REQUIRE(run_command("gold " + (kFixtures / "corpus").string() + " -o " + out.string())
              .status == 0);
  const std::string second = io::read_file(out / "a03.gold.json") +
                             io::read_file(out / "a06.indexed.txt");
  REQUIRE(first == second);
}

TEST_CASE("cli score of gold against itself is perfect") {
  const auto out = temp_dir("score");
  REQUIRE(run_command("gold " + (kFixtures / "corpus").string() + " -o " + out.string())
              .status == 0);
  const auto result = run_command("score " + out.string() + " " + out.string());
  REQUIRE(result.status == 0);
  REQUIRE(result.output.find("CoNLL F1") != std::string::npos);
  REQUIRE(result.output.find("micro 1.000") != std::string::npos);
}

TEST_CASE("cli stats prints the hand-counted corpus row") {
  const auto result = run_command("stats " + (kFixtures / "corpus").string());
  REQUIRE(result.status == 0);
  REQUIRE(result.output.find("total\tavg_length_tokens\tavg_mentions\tavg_entities") !=
          std::string::npos);
  REQUIRE(result.output.find("8\t17.6\t3.1\t2") != std::string::npos);
}

TEST_CASE("cli validate reports lint findings with status 1") {
  const auto dir = temp_dir("validate");
  io::write_file(dir / "bad.txt", "{M1 bạn {M2 tôi}} nói chuyện.\n");
  const auto result = run_command("validate " + dir.string());
  REQUIRE(result.status == 1);
  REQUIRE(result.output.find("NESTED_WITHOUT_POSSESSIVE") != std::string::npos);

  const auto clean_dir = temp_dir("validate_clean");
  io::write_file(clean_dir / "good.txt", "{M1 Anh} cười.\n");
  const auto clean = run_command("validate " + clean_dir.string());
  REQUIRE(clean.status == 0);
  REQUIRE(clean.output.find("clean") != std::string::npos);
}

TEST_CASE("cli usage and configuration errors exit with status 2") {
  REQUIRE(run_command("no-such-command").status == 2);
  REQUIRE(run_command("stats /no/such/dir").status == 2);
  REQUIRE(run_command("run /no/such/config.json").status == 2);
}

TEST_CASE("cli run in replay mode writes the full run directory") {
  const auto base = temp_dir("run");
  const auto run_dir = base / "out";
  const auto cassette = base / "cassette.jsonl";

  // Build the cassette with the same prompts the run will construct.
  std::vector<FewShotExemplar> shots;
  std::vector<AnnotatedDocument> exemplars;
  for (const auto& parsed : io::load_corpus(kFixtures / "replay" / "fewshot")) {
    exemplars.push_back(parsed.doc);
    shots.push_back({index_document(parsed.doc).indexed_text, build_gold_clusters(parsed.doc)});
  }
  const std::string fewshot = build_fewshot_prompt(shots);
  const std::map<std::string, std::string> responses = {
      {"e01", "[[1,2]]"},
      {"e02", "[[1,2],[3]]"},
      {"e03", "[[1,2],[3]]"},
      {"e04", "Sure! Here is the result: [(1, 3), (2, 4)] Hope it helps."},
      {"e05", "Xin lỗi, tôi không thể giúp việc này."},
  };
  for (const auto& parsed : io::load_corpus(kFixtures / "replay" / "eval")) {
    const std::string prompt =
        build_final_prompt(fewshot, index_document(parsed.doc), TokenBudget{});
    Cassette::append_to_file(cassette, {prompt_digest(prompt), prompt,
                                        responses.at(parsed.doc.doc_id), "fake", 1, 0});
  }

  nlohmann::json config{{"corpus_dir", (kFixtures / "replay" / "eval").string()},
                        {"exemplar_dir", (kFixtures / "replay" / "fewshot").string()},
                        {"exemplar_ids", {"f01", "f02", "f03"}},
                        {"output_dir", run_dir.string()},
                        {"mode", "replay"},
                        {"cassette", cassette.string()},
                        {"model", {{"model", "fake"}}}};
  const auto config_file = base / "config.json";
  io::write_file(config_file, config.dump(2));

  const auto result = run_command("run " + config_file.string());
  INFO(result.output);
  REQUIRE(result.status == 0);
  REQUIRE(fs::exists(run_dir / "manifest.json"));
  REQUIRE(fs::exists(run_dir / "report.json"));
  REQUIRE(fs::exists(run_dir / "report.csv"));
  REQUIRE(fs::exists(run_dir / "scores" / "e01.json"));
  REQUIRE(result.output.find("consistency: clean 3/5 (0.600)") != std::string::npos);

  // CSV rows carry the oracle-derived corpus values (micro, 3 decimals).
  REQUIRE(io::read_file(run_dir / "report.csv") ==
          "Metric,fake\n"
          "CoNLL F1,0.825\n"
          "MUC F1,0.727\n"
          "B-Cubed F1,0.891\n"
          "CEAF F1,0.857\n");

  // `report` re-emits the same bytes from the run directory.
  const std::string report_json = io::read_file(run_dir / "report.json");
  const std::string report_csv = io::read_file(run_dir / "report.csv");
  const auto reemit = run_command("report " + run_dir.string());
  REQUIRE(reemit.status == 0);
  REQUIRE(io::read_file(run_dir / "report.json") == report_json);
  REQUIRE(io::read_file(run_dir / "report.csv") == report_csv);
  REQUIRE(reemit.output.find("CoNLL F1,") != std::string::npos);
}

TEST_CASE("cli prompt prints a final prompt ending with Output:") {
  const auto base = temp_dir("prompt");
  nlohmann::json config{{"corpus_dir", (kFixtures / "replay" / "eval").string()},
                        {"exemplar_dir", (kFixtures / "replay" / "fewshot").string()},
                        {"exemplar_ids", {"f01"}}};
  const auto config_file = base / "config.json";
  io::write_file(config_file, config.dump(2));
  const auto result = run_command(
      "prompt " + (kFixtures / "replay" / "eval" / "e01.txt").string() + " -c " +
      config_file.string());
  REQUIRE(result.status == 0);
  REQUIRE(result.output.find("Input: [Cô ấy]#1 là giáo viên.") != std::string::npos);
  REQUIRE(result.output.find("Output:\n") != std::string::npos);
}
