#pragma once

#include <cctype>
#include <cstdio>
#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "vicoref/core.hpp"
#include "vicoref/errors.hpp"
#include "vicoref/sacr.hpp"

namespace vicoref {

// Renders a document in the indexed prompt form: every mention becomes
// [surface]#tag_index, nested mentions keep their markers inside the outer
// brackets. Stripping the markup reproduces the plain text.
inline IndexedDocument index_document(const AnnotatedDocument& doc) {
  validate_document(doc);
  IndexedDocument out;
  out.doc_id = doc.doc_id;
  out.indexed_text = detail::render_markup(
      doc, [](const Mention&) { return std::string("["); },
      [](const Mention& m) { return "]#" + std::to_string(m.tag_index); });
  out.mention_table.reserve(doc.mentions.size());
  for (const Mention& m : doc.mentions) {
    out.mention_table.push_back({m.tag_index, m.surface, m.tag_number});
  }
  return out;
}

struct IndexedMention {
  int marker = 0;  // the k of ]#k
  Span span;
  std::string surface;
};

struct IndexedParseResult {
  std::string plain_text;
  std::vector<IndexedMention> mentions;  // reading order (outer before inner on ties)
  std::vector<ParseWarning> warnings;
};

// Lenient parser for the [surface]#k grammar. Unmatched markup is kept as
// literal text. Used for the index/parse round-trip property and to recover
// clusters from model replies that echo annotated text.
inline IndexedParseResult parse_indexed(std::string_view text) {
  struct Token {
    enum Type { Literal, Open, Close } type;
    std::string text;
    int marker = 0;
    std::size_t offset = 0;
  };
  std::vector<Token> tokens;
  auto append_literal = [&](std::string_view s, std::size_t offset) {
    if (!tokens.empty() && tokens.back().type == Token::Literal) {
      tokens.back().text += s;
    } else {
      tokens.push_back({Token::Literal, std::string(s), 0, offset});
    }
  };

  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (c == '[') {
      tokens.push_back({Token::Open, "[", 0, i});
      ++i;
    } else if (c == ']' && i + 1 < text.size() && text[i + 1] == '#' && i + 2 < text.size() &&
               std::isdigit(static_cast<unsigned char>(text[i + 2]))) {
      std::size_t j = i + 2;
      while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      int marker = 0;
      if (j - (i + 2) <= 9) {
        for (std::size_t k = i + 2; k < j; ++k) marker = marker * 10 + (text[k] - '0');
      }
      tokens.push_back({Token::Close, std::string(text.substr(i, j - i)), marker, i});
      i = j;
    } else {
      std::size_t run = i;
      while (run < text.size() && text[run] != '[' && text[run] != ']') ++run;
      if (run == i) ++run;  // lone ']'
      append_literal(text.substr(i, run - i), i);
      i = run;
    }
  }

  IndexedParseResult out;
  std::vector<std::size_t> open_stack;
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    if (tokens[t].type == Token::Open) {
      open_stack.push_back(t);
    } else if (tokens[t].type == Token::Close) {
      if (open_stack.empty() || tokens[t].marker < 1) {
        out.warnings.push_back({WarningKind::UnmatchedCloseBrace, tokens[t].offset,
                                "']#k' without matching '[' treated as literal text"});
        tokens[t].type = Token::Literal;
      } else {
        open_stack.pop_back();
      }
    }
  }
  for (std::size_t t : open_stack) {
    out.warnings.push_back({WarningKind::UnterminatedAnnotation, tokens[t].offset,
                            "'[' never closed; treated as literal text"});
    tokens[t].type = Token::Literal;
  }

  struct RawIndexed {
    std::size_t start_cp;
    std::size_t end_cp = 0;
    int marker = 0;
  };
  std::string plain;
  std::size_t cp = 0;
  std::vector<RawIndexed> raw;
  std::vector<std::size_t> stack;
  for (auto& tok : tokens) {
    switch (tok.type) {
      case Token::Literal:
        plain += tok.text;
        cp += utf8::length(tok.text);
        break;
      case Token::Open:
        raw.push_back({cp, 0, 0});
        stack.push_back(raw.size() - 1);
        break;
      case Token::Close:
        raw[stack.back()].end_cp = cp;
        raw[stack.back()].marker = tok.marker;
        stack.pop_back();
        break;
    }
  }
  for (const RawIndexed& r : raw) {
    if (r.start_cp >= r.end_cp) continue;
    out.mentions.push_back(
        {r.marker, {r.start_cp, r.end_cp},
         std::string(utf8::slice(plain, r.start_cp, r.end_cp))});
  }
  out.plain_text = std::move(plain);
  return out;
}

// Groups tag_index values by tag_number. The result is canonical and, for a
// valid document, covers every mention (singletons included).
inline ClusterSet build_gold_clusters(const AnnotatedDocument& doc) {
  std::map<int, std::vector<int>> by_tag;
  for (const Mention& m : doc.mentions) by_tag[m.tag_number].push_back(m.tag_index);
  std::vector<std::vector<int>> raw;
  raw.reserve(by_tag.size());
  for (auto& [tag, indices] : by_tag) raw.push_back(std::move(indices));
  return canonicalize(std::move(raw), static_cast<int>(doc.mentions.size()));
}

struct CorpusStats {
  std::size_t total_documents = 0;
  double avg_length_tokens = 0;  // whitespace-delimited tokens of the plain text
  double avg_mentions = 0;
  double avg_entities = 0;       // distinct tag_numbers per document
};

inline std::size_t token_count(std::string_view text) {
  std::size_t n = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && detail::is_ascii_space(text[i])) ++i;
    if (i < text.size()) {
      ++n;
      while (i < text.size() && !detail::is_ascii_space(text[i])) ++i;
    }
  }
  return n;
}

inline CorpusStats corpus_stats(const std::vector<AnnotatedDocument>& docs) {
  if (docs.empty()) throw EmptyCorpusError("corpus_stats requires at least one document");
  CorpusStats stats;
  stats.total_documents = docs.size();
  double tokens = 0, mentions = 0, entities = 0;
  for (const AnnotatedDocument& doc : docs) {
    tokens += static_cast<double>(token_count(doc.plain_text));
    mentions += static_cast<double>(doc.mentions.size());
    std::vector<int> tags;
    for (const Mention& m : doc.mentions) tags.push_back(m.tag_number);
    std::sort(tags.begin(), tags.end());
    tags.erase(std::unique(tags.begin(), tags.end()), tags.end());
    entities += static_cast<double>(tags.size());
  }
  const double n = static_cast<double>(docs.size());
  stats.avg_length_tokens = tokens / n;
  stats.avg_mentions = mentions / n;
  stats.avg_entities = entities / n;
  return stats;
}

// One-decimal display with a trailing ".0" trimmed ("31.0" prints as "31",
// matching the corpus table in the source data).
inline std::string format_average(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.1f", v);
  std::string s(buf);
  if (s.size() >= 2 && s.compare(s.size() - 2, 2, ".0") == 0) s.erase(s.size() - 2);
  return s;
}

inline std::string stats_header() {
  return "total\tavg_length_tokens\tavg_mentions\tavg_entities";
}

inline std::string stats_row(const CorpusStats& s) {
  return std::to_string(s.total_documents) + "\t" + format_average(s.avg_length_tokens) + "\t" +
         format_average(s.avg_mentions) + "\t" + format_average(s.avg_entities);
}

}  // namespace vicoref
