#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vicoref/errors.hpp"
#include "vicoref/utf8.hpp"

namespace vicoref {

// Half-open [begin, end) span in code points into a document's plain text.
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;

  bool operator==(const Span&) const = default;
  std::size_t size() const { return end - begin; }
  // Strict containment: covers `other` and is not equal to it.
  bool contains(const Span& other) const {
    return begin <= other.begin && other.end <= end && !(*this == other);
  }
};

// One annotated mention. tag_number identifies the entity; tag_index is the
// 1-based reading-order position of the mention within its document.
struct Mention {
  int tag_number = 0;
  int tag_index = 0;
  Span span;
  std::string surface;
  int depth = 0;               // 0 = top level
  std::optional<int> parent;   // tag_index of the enclosing mention, iff depth > 0

  bool operator==(const Mention&) const = default;
};

struct AnnotatedDocument {
  std::string doc_id;
  std::string plain_text;
  std::vector<Mention> mentions;  // ordered by tag_index

  bool operator==(const AnnotatedDocument&) const = default;
};

struct MentionRow {
  int tag_index = 0;
  std::string surface;
  int tag_number = 0;

  bool operator==(const MentionRow&) const = default;
};

struct IndexedDocument {
  std::string doc_id;
  std::string indexed_text;  // plain text with each mention rendered as [surface]#tag_index
  std::vector<MentionRow> mention_table;

  bool operator==(const IndexedDocument&) const = default;
};

// A family of pairwise-disjoint mention-index clusters over a document with
// n_mentions mentions. Canonical order: clusters sorted by smallest member,
// members ascending. A gold ClusterSet additionally covers every index.
struct ClusterSet {
  std::vector<std::vector<int>> clusters;
  int n_mentions = 0;

  bool operator==(const ClusterSet&) const = default;
};

// Precision/recall/F1 plus the numerator/denominator pairs needed for micro
// aggregation across documents. A zero denominator defines the affected value
// as 0 and sets `degenerate` (all-singleton documents must not abort a run).
struct PRF {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  double p_num = 0;
  double p_den = 0;
  double r_num = 0;
  double r_den = 0;
  bool degenerate = false;
};

inline PRF make_prf(double p_num, double p_den, double r_num, double r_den) {
  PRF prf;
  prf.p_num = p_num;
  prf.p_den = p_den;
  prf.r_num = r_num;
  prf.r_den = r_den;
  prf.degenerate = p_den == 0 || r_den == 0;
  prf.precision = p_den > 0 ? p_num / p_den : 0.0;
  prf.recall = r_den > 0 ? r_num / r_den : 0.0;
  const double sum = prf.precision + prf.recall;
  prf.f1 = sum > 0 ? 2.0 * prf.precision * prf.recall / sum : 0.0;
  return prf;
}

// A non-fatal observation about a document or cluster set.
struct Finding {
  std::string kind;
  int tag_index = 0;  // 0 when not tied to a particular mention
  std::string detail;
};

// Canonicalizes a raw cluster list: drops empty clusters, collapses duplicate
// indices within a cluster, sorts members ascending and clusters by smallest
// member. Throws RangeError for an index outside 1..n and OverlapError when an
// index occurs in two clusters.
inline ClusterSet canonicalize(std::vector<std::vector<int>> raw, int n) {
  if (n < 0) throw RangeError("n_mentions must be nonnegative, got " + std::to_string(n));
  std::vector<std::vector<int>> clusters;
  std::vector<char> used(static_cast<std::size_t>(n) + 1, 0);
  for (auto& cluster : raw) {
    std::sort(cluster.begin(), cluster.end());
    cluster.erase(std::unique(cluster.begin(), cluster.end()), cluster.end());
    if (cluster.empty()) continue;
    for (int idx : cluster) {
      if (idx < 1 || idx > n) {
        throw RangeError("mention index " + std::to_string(idx) + " outside 1.." +
                         std::to_string(n));
      }
      if (used[static_cast<std::size_t>(idx)]) {
        throw OverlapError("mention index " + std::to_string(idx) + " occurs in two clusters");
      }
      used[static_cast<std::size_t>(idx)] = 1;
    }
    clusters.push_back(std::move(cluster));
  }
  std::sort(clusters.begin(), clusters.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return ClusterSet{std::move(clusters), n};
}

// A gold cluster set covers 1..n_mentions; returns one finding per gap.
inline std::vector<Finding> validate_gold(const ClusterSet& cs) {
  std::vector<char> covered(static_cast<std::size_t>(cs.n_mentions) + 1, 0);
  for (const auto& cluster : cs.clusters) {
    for (int idx : cluster) covered[static_cast<std::size_t>(idx)] = 1;
  }
  std::vector<Finding> findings;
  for (int i = 1; i <= cs.n_mentions; ++i) {
    if (!covered[static_cast<std::size_t>(i)]) {
      findings.push_back({"UNCOVERED_INDEX", i, "mention index " + std::to_string(i) +
                                                   " belongs to no cluster"});
    }
  }
  return findings;
}

// The on-disk / in-prompt form: a list of lists of integers, e.g. [[1,5],[2,3,6],[4,7]].
inline std::string serialize_clusters(const ClusterSet& cs) {
  std::string out = "[";
  for (std::size_t c = 0; c < cs.clusters.size(); ++c) {
    if (c) out += ",";
    out += "[";
    for (std::size_t i = 0; i < cs.clusters[c].size(); ++i) {
      if (i) out += ",";
      out += std::to_string(cs.clusters[c][i]);
    }
    out += "]";
  }
  out += "]";
  return out;
}

// Checks every AnnotatedDocument invariant: tag_index sequence, span bounds,
// surface/slice agreement, disjoint-or-strictly-nested spans, parent/depth
// structure, positive tag numbers. Throws InvariantError on the first violation.
inline void validate_document(const AnnotatedDocument& doc) {
  const std::size_t n_cp = utf8::length(doc.plain_text);
  const auto& ms = doc.mentions;

  auto fail = [&](const std::string& what) {
    throw InvariantError("document '" + doc.doc_id + "': " + what);
  };

  for (std::size_t i = 0; i < ms.size(); ++i) {
    const Mention& m = ms[i];
    if (m.tag_index != static_cast<int>(i) + 1) {
      fail("tag_index values must be exactly 1..n in order; position " + std::to_string(i + 1) +
           " holds " + std::to_string(m.tag_index));
    }
    if (m.tag_number < 1) {
      fail("tag_number must be >= 1 at tag_index " + std::to_string(m.tag_index));
    }
    if (m.span.begin >= m.span.end || m.span.end > n_cp) {
      fail("bad span at tag_index " + std::to_string(m.tag_index));
    }
    if (m.surface != utf8::slice(doc.plain_text, m.span.begin, m.span.end)) {
      fail("surface does not match plain text slice at tag_index " +
           std::to_string(m.tag_index));
    }
    if (i > 0) {
      const Mention& prev = ms[i - 1];
      const bool ordered = prev.span.begin < m.span.begin ||
                           (prev.span.begin == m.span.begin && prev.span.end > m.span.end);
      if (!ordered) {
        fail("mentions must be ordered by span start, outer first on ties; violated at "
             "tag_index " +
             std::to_string(m.tag_index));
      }
    }
  }

  // Nesting structure via a sweep: mentions are sorted by start, so the open
  // enclosing mention is always the top of the stack.
  std::vector<const Mention*> stack;
  for (const Mention& m : ms) {
    while (!stack.empty() && stack.back()->span.end <= m.span.begin) stack.pop_back();
    if (!stack.empty()) {
      const Mention& outer = *stack.back();
      if (!outer.span.contains(m.span)) {
        fail("spans partially overlap at tag_index " + std::to_string(m.tag_index));
      }
      if (!m.parent || *m.parent != outer.tag_index ||
          m.depth != static_cast<int>(stack.size())) {
        fail("parent/depth do not match nesting at tag_index " + std::to_string(m.tag_index));
      }
    } else if (m.parent || m.depth != 0) {
      fail("top-level mention with parent or nonzero depth at tag_index " +
           std::to_string(m.tag_index));
    }
    stack.push_back(&m);
  }
}

}  // namespace vicoref
