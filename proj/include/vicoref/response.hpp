#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vicoref/core.hpp"
#include "vicoref/errors.hpp"
#include "vicoref/sacr.hpp"
#include "vicoref/transform.hpp"

namespace vicoref {

// How much recovery a model reply needed. CLEAN: the whole body is the cluster
// list. RECOVERED: the list was found inside wrapper text, or clusters were
// rebuilt from annotated-text markup. UNPARSEABLE: nothing usable.
enum class Consistency { Clean, Recovered, Unparseable };

inline std::string_view to_string(Consistency c) {
  switch (c) {
    case Consistency::Clean: return "CLEAN";
    case Consistency::Recovered: return "RECOVERED";
    case Consistency::Unparseable: return "UNPARSEABLE";
  }
  return "UNKNOWN";
}

inline Consistency consistency_from(std::string_view s) {
  if (s == "CLEAN") return Consistency::Clean;
  if (s == "RECOVERED") return Consistency::Recovered;
  if (s == "UNPARSEABLE") return Consistency::Unparseable;
  throw ConfigError("unknown consistency class '" + std::string(s) + "'");
}

struct ResponseParse {
  std::optional<ClusterSet> clusters;  // present iff consistency != Unparseable
  Consistency consistency = Consistency::Unparseable;
  std::vector<std::string> warnings;
};

namespace detail {

inline void skip_ws(std::string_view s, std::size_t& pos) {
  while (pos < s.size() && is_ascii_space(s[pos])) ++pos;
}

inline std::optional<long> parse_int(std::string_view s, std::size_t& pos) {
  skip_ws(s, pos);
  std::size_t p = pos;
  bool neg = false;
  if (p < s.size() && (s[p] == '-' || s[p] == '+')) {
    neg = s[p] == '-';
    ++p;
  }
  std::size_t digits = p;
  long value = 0;
  while (p < s.size() && std::isdigit(static_cast<unsigned char>(s[p]))) {
    if (p - digits > 9) return std::nullopt;
    value = value * 10 + (s[p] - '0');
    ++p;
  }
  if (p == digits) return std::nullopt;
  pos = p;
  return neg ? -value : value;
}

// One group: (1, 5) or [1, 5]; empty groups allowed and dropped later.
inline std::optional<std::vector<int>> parse_group(std::string_view s, std::size_t& pos) {
  skip_ws(s, pos);
  if (pos >= s.size() || (s[pos] != '(' && s[pos] != '[')) return std::nullopt;
  const char close = s[pos] == '(' ? ')' : ']';
  ++pos;
  std::vector<int> group;
  skip_ws(s, pos);
  if (pos < s.size() && s[pos] == close) {
    ++pos;
    return group;
  }
  while (true) {
    auto value = parse_int(s, pos);
    if (!value) return std::nullopt;
    group.push_back(static_cast<int>(*value));
    skip_ws(s, pos);
    if (pos < s.size() && s[pos] == ',') {
      ++pos;
      skip_ws(s, pos);
      if (pos < s.size() && s[pos] == close) {  // trailing comma, e.g. (1,)
        ++pos;
        return group;
      }
      continue;
    }
    if (pos < s.size() && s[pos] == close) {
      ++pos;
      return group;
    }
    return std::nullopt;
  }
}

// A bracketed list of integer groups: [(1,5),(2,3,6)] or [[1,5],[2,3]].
// An all-bare-integer list [1,5] reads as one cluster (a tuple body); bare
// integers mixed among groups read as singletons.
inline std::optional<std::vector<std::vector<int>>> parse_cluster_list(std::string_view s,
                                                                       std::size_t& pos) {
  skip_ws(s, pos);
  if (pos >= s.size() || s[pos] != '[') return std::nullopt;
  ++pos;
  std::vector<std::vector<int>> groups;
  std::vector<int> bare;
  bool saw_group = false;
  skip_ws(s, pos);
  if (pos < s.size() && s[pos] == ']') {
    ++pos;
    return groups;
  }
  while (true) {
    skip_ws(s, pos);
    if (pos < s.size() && (s[pos] == '(' || s[pos] == '[')) {
      auto group = parse_group(s, pos);
      if (!group) return std::nullopt;
      groups.push_back(std::move(*group));
      saw_group = true;
    } else {
      auto value = parse_int(s, pos);
      if (!value) return std::nullopt;
      bare.push_back(static_cast<int>(*value));
    }
    skip_ws(s, pos);
    if (pos < s.size() && s[pos] == ',') {
      ++pos;
      skip_ws(s, pos);
      if (pos < s.size() && s[pos] == ']') {
        ++pos;
        break;
      }
      continue;
    }
    if (pos < s.size() && s[pos] == ']') {
      ++pos;
      break;
    }
    return std::nullopt;
  }
  if (!bare.empty()) {
    if (saw_group) {
      for (int v : bare) groups.push_back({v});
    } else {
      groups.push_back(std::move(bare));
    }
  }
  return groups;
}

inline bool contains_sacr_markup(std::string_view s) {
  for (std::size_t i = 0; i + 2 < s.size(); ++i) {
    if (s[i] == '{' && s[i + 1] == 'M' && std::isdigit(static_cast<unsigned char>(s[i + 2]))) {
      return true;
    }
  }
  return false;
}

inline bool contains_indexed_markup(std::string_view s) {
  for (std::size_t i = 0; i + 2 < s.size(); ++i) {
    if (s[i] == ']' && s[i + 1] == '#' && std::isdigit(static_cast<unsigned char>(s[i + 2]))) {
      return true;
    }
  }
  return false;
}

// Groups reading-order positions 1..m by label.
inline std::vector<std::vector<int>> group_positions(const std::vector<int>& labels) {
  std::vector<std::pair<int, int>> by_label;  // (label, position)
  for (std::size_t i = 0; i < labels.size(); ++i) {
    by_label.emplace_back(labels[i], static_cast<int>(i) + 1);
  }
  std::stable_sort(by_label.begin(), by_label.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::vector<int>> out;
  int current_label = 0;
  bool first = true;
  for (const auto& [label, position] : by_label) {
    if (first || label != current_label) {
      out.emplace_back();
      current_label = label;
      first = false;
    }
    out.back().push_back(position);
  }
  return out;
}

}  // namespace detail

struct NormalizedPrediction {
  ClusterSet clusters;
  std::vector<std::string> warnings;
};

// Normalizes a raw predicted cluster list over 1..n: out-of-range indices are
// dropped, an index in several clusters stays with the first-listed one,
// missing indices are completed as singletons. One warning per repair.
inline NormalizedPrediction normalize_prediction(const std::vector<std::vector<int>>& raw,
                                                 int n) {
  NormalizedPrediction out;
  std::vector<char> seen(static_cast<std::size_t>(n) + 1, 0);
  std::vector<std::vector<int>> kept;
  for (const auto& cluster : raw) {
    std::vector<int> members;
    for (int idx : cluster) {
      if (idx < 1 || idx > n) {
        out.warnings.push_back("dropped out-of-range mention index " + std::to_string(idx));
        continue;
      }
      if (seen[static_cast<std::size_t>(idx)]) {
        out.warnings.push_back("mention index " + std::to_string(idx) +
                               " listed more than once; kept in its first cluster");
        continue;
      }
      seen[static_cast<std::size_t>(idx)] = 1;
      members.push_back(idx);
    }
    if (!members.empty()) kept.push_back(std::move(members));
  }
  for (int i = 1; i <= n; ++i) {
    if (!seen[static_cast<std::size_t>(i)]) {
      out.warnings.push_back("mention index " + std::to_string(i) +
                             " missing from the response; completed as a singleton");
      kept.push_back({i});
    }
  }
  out.clusters = canonicalize(std::move(kept), n);
  return out;
}

// Parses a raw model reply into clusters over 1..n_mentions via a strategy
// cascade: (1) the whole trimmed body is a cluster list -> CLEAN; (2) the first
// balanced cluster list found anywhere in the body -> RECOVERED; (3) clusters
// rebuilt from {M<k> ...} or [...]#k markup -> RECOVERED; (4) UNPARSEABLE.
inline ResponseParse parse_response(std::string_view raw, int n_mentions) {
  if (n_mentions < 1) throw RangeError("parse_response requires n_mentions >= 1");
  ResponseParse out;

  auto finish = [&](std::vector<std::vector<int>> groups, Consistency consistency) {
    NormalizedPrediction norm = normalize_prediction(groups, n_mentions);
    out.clusters = std::move(norm.clusters);
    out.consistency = consistency;
    for (auto& w : norm.warnings) out.warnings.push_back(std::move(w));
  };

  // Strategy 1: the whole trimmed body.
  {
    std::size_t pos = 0;
    auto groups = detail::parse_cluster_list(raw, pos);
    if (groups) {
      detail::skip_ws(raw, pos);
      if (pos == raw.size()) {
        finish(std::move(*groups), Consistency::Clean);
        return out;
      }
    }
  }

  // Strategy 2: first balanced cluster list anywhere in the body.
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] != '[') continue;
    std::size_t pos = i;
    auto groups = detail::parse_cluster_list(raw, pos);
    if (groups && !groups->empty()) {
      finish(std::move(*groups), Consistency::Recovered);
      return out;
    }
  }

  // Strategy 3: annotated-text fallback.
  if (detail::contains_sacr_markup(raw)) {
    SacrParseResult parsed = parse_sacr(raw);
    if (!parsed.doc.mentions.empty()) {
      std::vector<int> labels;
      for (const Mention& m : parsed.doc.mentions) labels.push_back(m.tag_number);
      finish(detail::group_positions(labels), Consistency::Recovered);
      out.warnings.push_back("clusters rebuilt from annotated full text in the response");
      return out;
    }
  }
  if (detail::contains_indexed_markup(raw)) {
    IndexedParseResult parsed = parse_indexed(raw);
    if (!parsed.mentions.empty()) {
      std::vector<int> labels;
      for (const IndexedMention& m : parsed.mentions) labels.push_back(m.marker);
      finish(detail::group_positions(labels), Consistency::Recovered);
      out.warnings.push_back("clusters rebuilt from indexed markup in the response");
      return out;
    }
  }

  out.consistency = Consistency::Unparseable;
  out.warnings.push_back("no cluster structure found in the response");
  return out;
}

// All-singleton prediction used when a reply is unparseable or missing.
inline ClusterSet singleton_fallback(int n_mentions) {
  std::vector<std::vector<int>> clusters;
  clusters.reserve(static_cast<std::size_t>(n_mentions));
  for (int i = 1; i <= n_mentions; ++i) clusters.push_back({i});
  return canonicalize(std::move(clusters), n_mentions);
}

}  // namespace vicoref
