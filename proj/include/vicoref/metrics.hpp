#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "vicoref/assignment.hpp"
#include "vicoref/core.hpp"
#include "vicoref/errors.hpp"

namespace vicoref {

// Cluster similarity for CEAF: phi3(A,B) = |A n B|, phi4(A,B) = 2|A n B| / (|A|+|B|).
enum class SimilarityKind { Phi3, Phi4 };

inline std::string_view to_string(SimilarityKind k) {
  return k == SimilarityKind::Phi3 ? "phi3" : "phi4";
}

namespace detail {

inline void check_compatible(const ClusterSet& gold, const ClusterSet& pred) {
  if (gold.n_mentions != pred.n_mentions) {
    throw InvariantError("gold and predicted cluster sets cover different mention counts (" +
                         std::to_string(gold.n_mentions) + " vs " +
                         std::to_string(pred.n_mentions) + ")");
  }
}

// Clusters with uncovered mentions completed as singletons.
inline std::vector<std::vector<int>> completed(const ClusterSet& cs) {
  std::vector<char> covered(static_cast<std::size_t>(cs.n_mentions) + 1, 0);
  std::vector<std::vector<int>> out = cs.clusters;
  for (const auto& cluster : out) {
    for (int i : cluster) covered[static_cast<std::size_t>(i)] = 1;
  }
  for (int i = 1; i <= cs.n_mentions; ++i) {
    if (!covered[static_cast<std::size_t>(i)]) out.push_back({i});
  }
  return out;
}

// cluster id per mention index (0 unused), over the completed cluster list.
inline std::vector<int> cluster_ids(const std::vector<std::vector<int>>& clusters, int n) {
  std::vector<int> id(static_cast<std::size_t>(n) + 1, -1);
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    for (int i : clusters[c]) id[static_cast<std::size_t>(i)] = static_cast<int>(c);
  }
  return id;
}

inline std::size_t intersection_size(const std::vector<int>& a, const std::vector<int>& b) {
  std::size_t n = 0, i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) {
      ++i;
    } else if (a[i] > b[j]) {
      ++j;
    } else {
      ++n;
      ++i;
      ++j;
    }
  }
  return n;
}

}  // namespace detail

// MUC (Vilain et al.): link-based recall and precision in the partition form.
// For each key cluster K, the other side splits K into p(K) parts (clusters
// intersecting K, uncovered members counting as implied singletons); the side
// contributes |K| - p(K) correct links out of |K| - 1. This equals the
// classic L_correct / L_gold and L_correct / L_predicted link counts.
inline PRF muc(const ClusterSet& gold, const ClusterSet& pred) {
  detail::check_compatible(gold, pred);
  const int n = gold.n_mentions;
  const auto gold_clusters = detail::completed(gold);
  const auto pred_clusters = detail::completed(pred);
  const auto gold_id = detail::cluster_ids(gold_clusters, n);
  const auto pred_id = detail::cluster_ids(pred_clusters, n);

  auto side = [](const std::vector<std::vector<int>>& key, const std::vector<int>& other_id) {
    double num = 0, den = 0;
    std::vector<int> parts;
    for (const auto& cluster : key) {
      parts.clear();
      for (int i : cluster) parts.push_back(other_id[static_cast<std::size_t>(i)]);
      std::sort(parts.begin(), parts.end());
      parts.erase(std::unique(parts.begin(), parts.end()), parts.end());
      num += static_cast<double>(cluster.size() - parts.size());
      den += static_cast<double>(cluster.size() - 1);
    }
    return std::pair<double, double>(num, den);
  };

  const auto [r_num, r_den] = side(gold_clusters, pred_id);
  const auto [p_num, p_den] = side(pred_clusters, gold_id);
  return make_prf(p_num, p_den, r_num, r_den);
}

// B-Cubed (Bagga & Baldwin): per-mention precision |C_i n G_i| / |C_i| and
// recall |C_i n G_i| / |G_i|, averaged over all mentions.
inline PRF b_cubed(const ClusterSet& gold, const ClusterSet& pred) {
  detail::check_compatible(gold, pred);
  const int n = gold.n_mentions;
  if (n == 0) throw EmptyDocumentError("b_cubed is undefined for a document with no mentions");
  const auto gold_clusters = detail::completed(gold);
  const auto pred_clusters = detail::completed(pred);
  const auto gold_id = detail::cluster_ids(gold_clusters, n);
  const auto pred_id = detail::cluster_ids(pred_clusters, n);

  double precision_sum = 0, recall_sum = 0;
  for (int i = 1; i <= n; ++i) {
    const auto& c = pred_clusters[static_cast<std::size_t>(pred_id[static_cast<std::size_t>(i)])];
    const auto& g = gold_clusters[static_cast<std::size_t>(gold_id[static_cast<std::size_t>(i)])];
    const double inter = static_cast<double>(detail::intersection_size(c, g));
    precision_sum += inter / static_cast<double>(c.size());
    recall_sum += inter / static_cast<double>(g.size());
  }
  return make_prf(precision_sum, n, recall_sum, n);
}

inline double phi(SimilarityKind kind, const std::vector<int>& a, const std::vector<int>& b) {
  const double inter = static_cast<double>(detail::intersection_size(a, b));
  if (kind == SimilarityKind::Phi3) return inter;
  return 2.0 * inter / static_cast<double>(a.size() + b.size());
}

// CEAF (Luo 2005): an optimal one-to-one alignment between predicted and gold
// clusters under phi. precision = total / sum phi(C_i, C_i); recall =
// total / sum phi(G_i, G_i).
inline PRF ceaf(const ClusterSet& gold, const ClusterSet& pred,
                SimilarityKind kind = SimilarityKind::Phi3) {
  detail::check_compatible(gold, pred);
  if (gold.n_mentions == 0) {
    throw EmptyDocumentError("ceaf is undefined for a document with no mentions");
  }
  const auto gold_clusters = detail::completed(gold);
  const auto pred_clusters = detail::completed(pred);

  std::vector<std::vector<double>> matrix(pred_clusters.size(),
                                          std::vector<double>(gold_clusters.size(), 0));
  for (std::size_t i = 0; i < pred_clusters.size(); ++i) {
    for (std::size_t j = 0; j < gold_clusters.size(); ++j) {
      matrix[i][j] = phi(kind, pred_clusters[i], gold_clusters[j]);
    }
  }
  const double total = optimal_assignment(matrix).total;

  double p_den = 0, r_den = 0;
  for (const auto& c : pred_clusters) p_den += phi(kind, c, c);
  for (const auto& g : gold_clusters) r_den += phi(kind, g, g);
  return make_prf(total, p_den, total, r_den);
}

// CoNLL F1: the arithmetic mean of the MUC, B-Cubed and CEAF F1 scores.
inline double conll_f1(double muc_f1, double b3_f1, double ceaf_f1) {
  for (double v : {muc_f1, b3_f1, ceaf_f1}) {
    if (!(v >= 0.0 && v <= 1.0)) throw RangeError("F1 scores must lie in [0, 1]");
  }
  return (muc_f1 + b3_f1 + ceaf_f1) / 3.0;
}

struct DocScores {
  std::string doc_id;
  int n_mentions = 0;
  PRF muc;
  PRF b_cubed;
  PRF ceaf_phi3;
  PRF ceaf_phi4;
  double conll = 0;  // uses the configured CEAF variant
};

inline DocScores score_document(const std::string& doc_id, const ClusterSet& gold,
                                const ClusterSet& pred,
                                SimilarityKind conll_phi = SimilarityKind::Phi3) {
  DocScores s;
  s.doc_id = doc_id;
  s.n_mentions = gold.n_mentions;
  s.muc = muc(gold, pred);
  s.b_cubed = b_cubed(gold, pred);
  s.ceaf_phi3 = ceaf(gold, pred, SimilarityKind::Phi3);
  s.ceaf_phi4 = ceaf(gold, pred, SimilarityKind::Phi4);
  const PRF& chosen = conll_phi == SimilarityKind::Phi3 ? s.ceaf_phi3 : s.ceaf_phi4;
  s.conll = conll_f1(s.muc.f1, s.b_cubed.f1, chosen.f1);
  return s;
}

// Micro: numerators/denominators summed across documents, then P/R/F1.
// Macro: mean of the per-document F1 scores.
struct MetricSummary {
  PRF micro;
  double macro_f1 = 0;
};

struct CorpusScores {
  std::size_t documents = 0;
  MetricSummary muc;
  MetricSummary b_cubed;
  MetricSummary ceaf_phi3;
  MetricSummary ceaf_phi4;
  SimilarityKind conll_phi = SimilarityKind::Phi3;
  double conll_micro = 0;
  double conll_macro = 0;
};

inline CorpusScores aggregate_corpus(const std::vector<DocScores>& per_doc,
                                     SimilarityKind conll_phi = SimilarityKind::Phi3) {
  if (per_doc.empty()) throw EmptyCorpusError("aggregate_corpus requires at least one document");
  auto summarize = [&](auto select) {
    MetricSummary s;
    double p_num = 0, p_den = 0, r_num = 0, r_den = 0, f1_sum = 0;
    for (const DocScores& d : per_doc) {
      const PRF& prf = select(d);
      p_num += prf.p_num;
      p_den += prf.p_den;
      r_num += prf.r_num;
      r_den += prf.r_den;
      f1_sum += prf.f1;
    }
    s.micro = make_prf(p_num, p_den, r_num, r_den);
    s.macro_f1 = f1_sum / static_cast<double>(per_doc.size());
    return s;
  };

  CorpusScores out;
  out.documents = per_doc.size();
  out.conll_phi = conll_phi;
  out.muc = summarize([](const DocScores& d) -> const PRF& { return d.muc; });
  out.b_cubed = summarize([](const DocScores& d) -> const PRF& { return d.b_cubed; });
  out.ceaf_phi3 = summarize([](const DocScores& d) -> const PRF& { return d.ceaf_phi3; });
  out.ceaf_phi4 = summarize([](const DocScores& d) -> const PRF& { return d.ceaf_phi4; });
  const MetricSummary& ceaf_chosen =
      conll_phi == SimilarityKind::Phi3 ? out.ceaf_phi3 : out.ceaf_phi4;
  out.conll_micro = conll_f1(out.muc.micro.f1, out.b_cubed.micro.f1, ceaf_chosen.micro.f1);
  out.conll_macro = conll_f1(out.muc.macro_f1, out.b_cubed.macro_f1, ceaf_chosen.macro_f1);
  return out;
}

}  // namespace vicoref
