#pragma once

#include <chrono>
#include <cstdio>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "vicoref/errors.hpp"

namespace vicoref {

enum class RunMode { Live, Replay, Record };

inline std::string_view to_string(RunMode m) {
  switch (m) {
    case RunMode::Live: return "live";
    case RunMode::Replay: return "replay";
    case RunMode::Record: return "record";
  }
  return "unknown";
}

inline RunMode run_mode_from(std::string_view s) {
  if (s == "live") return RunMode::Live;
  if (s == "replay") return RunMode::Replay;
  if (s == "record") return RunMode::Record;
  throw ConfigError("unknown run mode '" + std::string(s) + "' (expected live|replay|record)");
}

struct RetryPolicy {
  int max_attempts = 3;
  int initial_backoff_ms = 500;
  double backoff_multiplier = 2.0;
  int jitter_ms = 250;
};

struct ModelConfig {
  std::string base_url = "https://api.openai.com";
  std::string completions_path = "/v1/chat/completions";
  std::string model = "gpt-4";
  double temperature = 0.0;  // deterministic sampling by default
  std::optional<int> max_tokens;
  std::string api_key_env = "OPENAI_API_KEY";
  RetryPolicy retry;
  int timeout_seconds = 120;
};

struct CompletionResult {
  std::string text;
  int attempt_count = 1;
  long latency_ms = 0;
};

// FNV-1a 64-bit, hex encoded. Cassette lookups verify the full prompt on a
// digest hit, so hash collisions cannot replay the wrong exchange.
inline std::string prompt_digest(std::string_view prompt) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : prompt) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

struct CassetteRecord {
  std::string digest;
  std::string prompt;
  std::string response;
  std::string model;
  int attempt_count = 1;
  long latency_ms = 0;
};

// Append-only store of recorded prompt/response exchanges (JSONL on disk).
class Cassette {
 public:
  Cassette() = default;

  static Cassette load(const std::filesystem::path& file) {
    Cassette cassette;
    std::ifstream in(file);
    if (!in) return cassette;  // absent cassette = empty cassette
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
      if (j.is_discarded() || !j.is_object()) {
        throw ConfigError("cassette " + file.string() + ": line " + std::to_string(line_no) +
                          " is not a JSON record");
      }
      CassetteRecord rec;
      rec.prompt = j.value("prompt", "");
      rec.digest = j.value("digest", prompt_digest(rec.prompt));
      rec.response = j.value("response", "");
      rec.model = j.value("model", "");
      rec.attempt_count = j.value("attempt_count", 1);
      rec.latency_ms = j.value("latency_ms", 0L);
      cassette.add(std::move(rec));
    }
    return cassette;
  }

  void add(CassetteRecord rec) {
    by_digest_.emplace(rec.digest, records_.size());
    records_.push_back(std::move(rec));
  }

  // Returns the most recently appended record for the prompt (re-recording a
  // prompt appends; replay then sees the fresh exchange).
  std::optional<CassetteRecord> find(std::string_view prompt) const {
    const std::string digest = prompt_digest(prompt);
    auto [lo, hi] = by_digest_.equal_range(digest);
    const CassetteRecord* latest = nullptr;
    std::size_t latest_index = 0;
    for (auto it = lo; it != hi; ++it) {
      const CassetteRecord& rec = records_[it->second];
      if (rec.prompt == prompt && (!latest || it->second > latest_index)) {
        latest = &rec;
        latest_index = it->second;
      }
    }
    if (!latest) return std::nullopt;
    return *latest;
  }

  std::size_t size() const { return records_.size(); }
  const std::vector<CassetteRecord>& records() const { return records_; }

  static nlohmann::json to_json(const CassetteRecord& rec) {
    return nlohmann::json{{"digest", rec.digest},
                          {"prompt", rec.prompt},
                          {"response", rec.response},
                          {"model", rec.model},
                          {"attempt_count", rec.attempt_count},
                          {"latency_ms", rec.latency_ms}};
  }

  static void append_to_file(const std::filesystem::path& file, const CassetteRecord& rec) {
    if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
    std::ofstream out(file, std::ios::app);
    if (!out) throw ConfigError("cannot open cassette for append: " + file.string());
    out << to_json(rec).dump() << "\n";
  }

 private:
  std::unordered_multimap<std::string, std::size_t> by_digest_;
  std::vector<CassetteRecord> records_;
};

// Chat-completions client with three modes: live (HTTP with retry/backoff),
// replay (recorded responses only, fully offline and deterministic), and
// record (live + append every exchange to the cassette file).
class ModelClient {
 public:
  ModelClient(ModelConfig cfg, RunMode mode, std::filesystem::path cassette_path = {})
      : cfg_(std::move(cfg)), mode_(mode), cassette_path_(std::move(cassette_path)),
        rng_(std::random_device{}()) {
    if (mode_ != RunMode::Live) {
      if (cassette_path_.empty()) {
        throw ConfigError("replay/record mode requires a cassette path");
      }
      cassette_ = Cassette::load(cassette_path_);
    }
    if (mode_ != RunMode::Replay) {
      const char* key = std::getenv(cfg_.api_key_env.c_str());
      if (!key || !*key) {
        throw ConfigError("API key environment variable '" + cfg_.api_key_env +
                          "' is not set");
      }
      api_key_ = key;
    }
  }

  CompletionResult complete(const std::string& prompt) {
    if (mode_ == RunMode::Replay) {
      std::lock_guard<std::mutex> lock(mutex_);
      auto rec = cassette_.find(prompt);
      if (!rec) {
        throw CassetteMissError("no recorded response for prompt digest " +
                                prompt_digest(prompt) + " in " + cassette_path_.string());
      }
      return {rec->response, rec->attempt_count, rec->latency_ms};
    }
    CompletionResult result = complete_live(prompt);
    if (mode_ == RunMode::Record) {
      CassetteRecord rec{prompt_digest(prompt), prompt,        result.text,
                         cfg_.model,            result.attempt_count, result.latency_ms};
      std::lock_guard<std::mutex> lock(mutex_);
      cassette_.add(rec);
      Cassette::append_to_file(cassette_path_, rec);
    }
    return result;
  }

  const Cassette& cassette() const { return cassette_; }
  const ModelConfig& config() const { return cfg_; }
  RunMode mode() const { return mode_; }

 private:
  static bool retryable_status(int status) {
    return status == 408 || status == 429 || (status >= 500 && status < 600);
  }

  long backoff_ms(int attempt) {
    double base = static_cast<double>(cfg_.retry.initial_backoff_ms);
    for (int i = 1; i < attempt; ++i) base *= cfg_.retry.backoff_multiplier;
    long jitter = 0;
    if (cfg_.retry.jitter_ms > 0) {
      std::lock_guard<std::mutex> lock(mutex_);
      jitter = std::uniform_int_distribution<long>(0, cfg_.retry.jitter_ms)(rng_);
    }
    return static_cast<long>(base) + jitter;
  }

  CompletionResult complete_live(const std::string& prompt) {
    nlohmann::json body{{"model", cfg_.model},
                        {"messages", nlohmann::json::array({nlohmann::json{
                                         {"role", "user"}, {"content", prompt}}})},
                        {"temperature", cfg_.temperature}};
    if (cfg_.max_tokens) body["max_tokens"] = *cfg_.max_tokens;
    const std::string payload = body.dump();

    const auto start = std::chrono::steady_clock::now();
    std::string last_error;
    const int max_attempts = std::max(1, cfg_.retry.max_attempts);
    for (int attempt = 1; attempt <= max_attempts; ++attempt) {
      httplib::Client client(cfg_.base_url);
      client.set_connection_timeout(cfg_.timeout_seconds, 0);
      client.set_read_timeout(cfg_.timeout_seconds, 0);
      client.set_bearer_token_auth(api_key_);

      auto res = client.Post(cfg_.completions_path, payload, "application/json");
      if (res && res->status == 200) {
        nlohmann::json reply = nlohmann::json::parse(res->body, nullptr, false);
        if (reply.is_discarded() || !reply.contains("choices") || reply["choices"].empty()) {
          throw TransportError("malformed completion response from " + cfg_.base_url);
        }
        const auto& message = reply["choices"][0];
        std::string text;
        if (message.contains("message") && message["message"].contains("content") &&
            message["message"]["content"].is_string()) {
          text = message["message"]["content"].get<std::string>();
        } else if (message.contains("text") && message["text"].is_string()) {
          text = message["text"].get<std::string>();  // legacy completions shape
        } else {
          throw TransportError("completion response carries no content from " + cfg_.base_url);
        }
        const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                                 std::chrono::steady_clock::now() - start)
                                 .count();
        return {std::move(text), attempt, static_cast<long>(elapsed)};
      }

      if (res && !retryable_status(res->status)) {
        throw TransportError("endpoint " + cfg_.base_url + " returned status " +
                             std::to_string(res->status));
      }
      last_error = res ? "status " + std::to_string(res->status)
                       : "transport failure (" + httplib::to_string(res.error()) + ")";
      if (attempt < max_attempts) {
        std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms(attempt)));
      }
    }
    throw TransportError("request to " + cfg_.base_url + " failed after " +
                         std::to_string(max_attempts) + " attempts: " + last_error);
  }

  ModelConfig cfg_;
  RunMode mode_;
  std::filesystem::path cassette_path_;
  std::string api_key_;
  Cassette cassette_;
  std::mutex mutex_;
  std::mt19937 rng_;
};

}  // namespace vicoref
