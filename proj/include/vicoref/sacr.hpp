#pragma once

#include <cctype>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "vicoref/core.hpp"
#include "vicoref/errors.hpp"
#include "vicoref/utf8.hpp"

// The SACR-style export format: a mention is wrapped as {M<tag_number> content},
// where content mixes literal text and nested annotations. The opener is exactly
// `{M`, one or more digits, and a single whitespace character.
namespace vicoref {

enum class ParseMode { Strict, Lenient };

struct SacrParseOptions {
  ParseMode mode = ParseMode::Lenient;
  std::string doc_id;
};

enum class WarningKind {
  StrayOpenBrace,          // '{' that does not attempt a tag (brace class)
  MalformedTag,            // '{M' prefix failing the tag grammar (brace class)
  UnmatchedCloseBrace,     // '}' with no open annotation (brace class)
  UnterminatedAnnotation,  // annotation still open at end of input (brace class)
  EmptyAnnotation,         // zero-length content, mention dropped
  DuplicateSpan,           // same span as the enclosing mention, inner dropped
};

// Brace-class warnings are exactly the conditions strict mode rejects.
inline bool is_brace_warning(WarningKind k) {
  return k == WarningKind::StrayOpenBrace || k == WarningKind::MalformedTag ||
         k == WarningKind::UnmatchedCloseBrace || k == WarningKind::UnterminatedAnnotation;
}

inline std::string_view to_string(WarningKind k) {
  switch (k) {
    case WarningKind::StrayOpenBrace: return "STRAY_OPEN_BRACE";
    case WarningKind::MalformedTag: return "MALFORMED_TAG";
    case WarningKind::UnmatchedCloseBrace: return "UNMATCHED_CLOSE_BRACE";
    case WarningKind::UnterminatedAnnotation: return "UNTERMINATED_ANNOTATION";
    case WarningKind::EmptyAnnotation: return "EMPTY_ANNOTATION";
    case WarningKind::DuplicateSpan: return "DUPLICATE_SPAN";
  }
  return "UNKNOWN";
}

struct ParseWarning {
  WarningKind kind;
  std::size_t offset = 0;  // byte offset into the raw input
  std::string detail;
};

struct SacrParseResult {
  AnnotatedDocument doc;
  std::vector<ParseWarning> warnings;
};

namespace detail {

struct SacrToken {
  enum Type { Literal, Open, Close } type;
  std::string text;    // literal text, or the full opener markup for Open
  int tag_number = 0;  // Open only
  std::size_t offset = 0;
};

inline bool is_ascii_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

// Tries to read `{M<digits><ws>` at position i. On success fills the token and
// returns the position past the opener; otherwise returns i and sets `attempted_tag`
// when the text started with `{M` (malformed tag vs. plain stray brace).
inline std::size_t match_opener(std::string_view text, std::size_t i, SacrToken& tok,
                                bool& attempted_tag) {
  attempted_tag = false;
  std::size_t j = i + 1;
  if (j >= text.size() || text[j] != 'M') return i;
  attempted_tag = true;
  ++j;
  std::size_t digits_begin = j;
  while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
  const std::size_t n_digits = j - digits_begin;
  if (n_digits == 0 || n_digits > 9) return i;
  if (j >= text.size() || !is_ascii_space(text[j])) return i;
  int tag = 0;
  for (std::size_t k = digits_begin; k < j; ++k) tag = tag * 10 + (text[k] - '0');
  if (tag < 1) return i;
  ++j;  // the single whitespace delimiter
  tok.type = SacrToken::Open;
  tok.text = std::string(text.substr(i, j - i));
  tok.tag_number = tag;
  tok.offset = i;
  return j;
}

}  // namespace detail

// Parses SACR markup into an AnnotatedDocument. Lenient mode (the default)
// never fails: markup that does not parse is kept as literal text and recorded
// as a warning. Strict mode throws for exactly the brace-class warnings.
inline SacrParseResult parse_sacr(std::string_view text, const SacrParseOptions& opts = {}) {
  using detail::SacrToken;
  std::vector<SacrToken> tokens;
  std::vector<ParseWarning> warnings;

  auto append_literal = [&](std::string_view s, std::size_t offset) {
    if (!tokens.empty() && tokens.back().type == SacrToken::Literal) {
      tokens.back().text += s;
    } else {
      tokens.push_back({SacrToken::Literal, std::string(s), 0, offset});
    }
  };

  // Tokenize.
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (c == '{') {
      SacrToken tok;
      bool attempted_tag = false;
      const std::size_t next = detail::match_opener(text, i, tok, attempted_tag);
      if (next != i) {
        tokens.push_back(std::move(tok));
        i = next;
      } else {
        warnings.push_back({attempted_tag ? WarningKind::MalformedTag
                                          : WarningKind::StrayOpenBrace,
                            i, "'{' treated as literal text"});
        append_literal(text.substr(i, 1), i);
        ++i;
      }
    } else if (c == '}') {
      tokens.push_back({SacrToken::Close, "}", 0, i});
      ++i;
    } else {
      std::size_t run = i;
      while (run < text.size() && text[run] != '{' && text[run] != '}') ++run;
      append_literal(text.substr(i, run - i), i);
      i = run;
    }
  }

  // Match braces; demote unmatched tokens to literals.
  std::vector<std::size_t> open_stack;
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    if (tokens[t].type == SacrToken::Open) {
      open_stack.push_back(t);
    } else if (tokens[t].type == SacrToken::Close) {
      if (open_stack.empty()) {
        warnings.push_back({WarningKind::UnmatchedCloseBrace, tokens[t].offset,
                            "'}' with no open annotation treated as literal text"});
        tokens[t].type = SacrToken::Literal;
      } else {
        open_stack.pop_back();
      }
    }
  }
  for (std::size_t t : open_stack) {
    warnings.push_back({WarningKind::UnterminatedAnnotation, tokens[t].offset,
                        "annotation '" + tokens[t].text + "' never closed; markup treated as "
                        "literal text"});
    tokens[t].type = SacrToken::Literal;
  }

  if (opts.mode == ParseMode::Strict) {
    const ParseWarning* first = nullptr;
    for (const auto& w : warnings) {
      if (is_brace_warning(w.kind) && (!first || w.offset < first->offset)) first = &w;
    }
    if (first) {
      const std::string msg = opts.doc_id.empty()
                                  ? first->detail + " at byte " + std::to_string(first->offset)
                                  : "document '" + opts.doc_id + "': " + first->detail +
                                        " at byte " + std::to_string(first->offset);
      switch (first->kind) {
        case WarningKind::MalformedTag: throw MalformedTagError(msg);
        case WarningKind::UnterminatedAnnotation: throw UnterminatedAnnotationError(msg);
        default: throw UnbalancedBraceError(msg);
      }
    }
  }

  // Build plain text and raw mentions (open order = reading order).
  struct RawMention {
    int tag_number;
    std::size_t start_cp;
    std::size_t end_cp = 0;
    int parent = -1;  // raw index
    std::size_t offset;
    bool closed = false;
  };
  std::string plain;
  std::size_t cp = 0;
  std::vector<RawMention> raw;
  std::vector<std::size_t> stack;
  for (auto& tok : tokens) {
    switch (tok.type) {
      case SacrToken::Literal:
        plain += tok.text;
        cp += utf8::length(tok.text);
        break;
      case SacrToken::Open:
        raw.push_back({tok.tag_number, cp, 0,
                       stack.empty() ? -1 : static_cast<int>(stack.back()), tok.offset, false});
        stack.push_back(raw.size() - 1);
        break;
      case SacrToken::Close:
        raw[stack.back()].end_cp = cp;
        raw[stack.back()].closed = true;
        stack.pop_back();
        break;
    }
  }

  // Drop degenerate mentions and compact indices.
  AnnotatedDocument doc;
  doc.doc_id = opts.doc_id;
  doc.plain_text = std::move(plain);
  std::vector<int> new_index(raw.size(), -1);
  for (std::size_t r = 0; r < raw.size(); ++r) {
    const RawMention& rm = raw[r];
    if (rm.start_cp >= rm.end_cp) {
      warnings.push_back({WarningKind::EmptyAnnotation, rm.offset,
                          "annotation with empty content dropped"});
      continue;
    }
    int anc = rm.parent;
    while (anc >= 0 && new_index[static_cast<std::size_t>(anc)] < 0) {
      anc = raw[static_cast<std::size_t>(anc)].parent;
    }
    const Mention* outer =
        anc >= 0 ? &doc.mentions[static_cast<std::size_t>(new_index[static_cast<std::size_t>(anc)]) - 1]
                 : nullptr;
    if (outer && outer->span.begin == rm.start_cp && outer->span.end == rm.end_cp) {
      warnings.push_back({WarningKind::DuplicateSpan, rm.offset,
                          "nested annotation spans exactly its parent; inner dropped"});
      continue;
    }
    Mention m;
    m.tag_number = rm.tag_number;
    m.tag_index = static_cast<int>(doc.mentions.size()) + 1;
    m.span = {rm.start_cp, rm.end_cp};
    m.surface = std::string(utf8::slice(doc.plain_text, rm.start_cp, rm.end_cp));
    if (outer) {
      m.parent = outer->tag_index;
      m.depth = outer->depth + 1;
    }
    new_index[r] = m.tag_index;
    doc.mentions.push_back(std::move(m));
  }

  return {std::move(doc), std::move(warnings)};
}

namespace detail {

struct MarkupEvent {
  std::size_t pos;
  bool open;
  std::size_t order;  // descending tiebreak value
  std::string text;
};

// Renders plain text with per-mention open/close marker strings inserted at
// span boundaries. At one position all closers come first (inner before outer),
// then openers (outer before inner).
template <typename OpenText, typename CloseText>
std::string render_markup(const AnnotatedDocument& doc, OpenText open_text,
                          CloseText close_text) {
  std::vector<MarkupEvent> events;
  events.reserve(doc.mentions.size() * 2);
  for (const Mention& m : doc.mentions) {
    events.push_back({m.span.begin, true, m.span.end, open_text(m)});
    events.push_back({m.span.end, false, m.span.begin, close_text(m)});
  }
  std::sort(events.begin(), events.end(), [](const MarkupEvent& a, const MarkupEvent& b) {
    if (a.pos != b.pos) return a.pos < b.pos;
    if (a.open != b.open) return !a.open;  // closers first
    return a.order > b.order;              // closers: inner first; openers: outer first
  });

  std::string out;
  out.reserve(doc.plain_text.size() + doc.mentions.size() * 8);
  std::size_t cp = 0, ev = 0, i = 0;
  const std::string& text = doc.plain_text;
  auto flush = [&](std::size_t pos) {
    while (ev < events.size() && events[ev].pos == pos) out += events[ev++].text;
  };
  while (i < text.size()) {
    flush(cp);
    out += text[i++];
    while (i < text.size() && utf8::is_continuation(static_cast<unsigned char>(text[i]))) {
      out += text[i++];
    }
    ++cp;
  }
  flush(cp);
  return out;
}

}  // namespace detail

// Re-emits the SACR markup for a valid document. parse_sacr(serialize_sacr(doc))
// reproduces `doc`. Throws InvariantError when the document invariants fail
// (e.g. partially overlapping spans).
inline std::string serialize_sacr(const AnnotatedDocument& doc) {
  validate_document(doc);
  return detail::render_markup(
      doc, [](const Mention& m) { return "{M" + std::to_string(m.tag_number) + " "; },
      [](const Mention&) { return std::string("}"); });
}

// Lint kinds for the machine-checkable annotation guidelines. Humanness, group
// membership and adjective exclusion are semantic judgements and are not checked.
inline constexpr std::string_view kNestedWithoutPossessive = "NESTED_WITHOUT_POSSESSIVE";
inline constexpr std::string_view kDeepNesting = "DEEP_NESTING";
inline constexpr std::string_view kEmptySurface = "EMPTY_SURFACE";
inline constexpr std::string_view kSurfaceWhitespace = "SURFACE_WHITESPACE";

inline std::vector<Finding> lint_guidelines(const AnnotatedDocument& doc) {
  validate_document(doc);
  std::vector<Finding> findings;

  auto is_all_space = [](std::string_view s) {
    for (char c : s) {
      if (!detail::is_ascii_space(c)) return false;
    }
    return true;
  };

  for (const Mention& m : doc.mentions) {
    if (is_all_space(m.surface)) {
      findings.push_back({std::string(kEmptySurface), m.tag_index,
                          "mention surface is whitespace only"});
      continue;
    }
    if (detail::is_ascii_space(m.surface.front()) || detail::is_ascii_space(m.surface.back())) {
      findings.push_back({std::string(kSurfaceWhitespace), m.tag_index,
                          "mention surface has leading or trailing whitespace"});
    }
    if (m.depth > 1) {
      findings.push_back({std::string(kDeepNesting), m.tag_index,
                          "nesting depth " + std::to_string(m.depth) + " exceeds 1"});
    }
    if (m.depth > 0) {
      // Nested mentions are only annotated in the explicit possessive form:
      // the text between the outer start and the inner start holds the word "của".
      const Mention& outer = doc.mentions[static_cast<std::size_t>(*m.parent) - 1];
      const std::string_view between =
          utf8::slice(doc.plain_text, outer.span.begin, m.span.begin);
      bool has_possessive = false;
      std::size_t p = 0;
      while (p < between.size()) {
        while (p < between.size() && detail::is_ascii_space(between[p])) ++p;
        std::size_t q = p;
        while (q < between.size() && !detail::is_ascii_space(between[q])) ++q;
        if (between.substr(p, q - p) == "của") {
          has_possessive = true;
          break;
        }
        p = q;
      }
      if (!has_possessive) {
        findings.push_back({std::string(kNestedWithoutPossessive), m.tag_index,
                            "nested mention without the possessive 'của' before it"});
      }
    }
  }
  return findings;
}

}  // namespace vicoref
