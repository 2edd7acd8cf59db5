#pragma once

// Independent brute-force oracles for the metric implementations. These follow
// the textbook definitions directly (explicit link counts, per-mention double
// loops, exhaustive alignment search) and share no code with the library's
// computation paths.

#include <algorithm>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include "vicoref/core.hpp"

namespace oracles {

struct PR {
  double p_num = 0, p_den = 0, r_num = 0, r_den = 0;
};

// Completes a cluster set over 1..n with singletons for uncovered mentions.
inline std::vector<std::set<int>> as_sets(const vicoref::ClusterSet& cs) {
  std::vector<std::set<int>> out;
  std::set<int> covered;
  for (const auto& c : cs.clusters) {
    out.emplace_back(c.begin(), c.end());
    covered.insert(c.begin(), c.end());
  }
  for (int i = 1; i <= cs.n_mentions; ++i) {
    if (!covered.count(i)) out.push_back({i});
  }
  return out;
}

// MUC by direct link counting: a cluster of size s carries s-1 links; the
// correct links are those of the meet partition (all nonempty pairwise
// intersections between gold and prediction).
inline PR muc_links(const vicoref::ClusterSet& gold, const vicoref::ClusterSet& pred) {
  const auto g = as_sets(gold);
  const auto p = as_sets(pred);
  double gold_links = 0, pred_links = 0, correct_links = 0;
  for (const auto& c : g) gold_links += static_cast<double>(c.size()) - 1;
  for (const auto& c : p) pred_links += static_cast<double>(c.size()) - 1;
  for (const auto& gc : g) {
    for (const auto& pc : p) {
      std::vector<int> inter;
      std::set_intersection(gc.begin(), gc.end(), pc.begin(), pc.end(),
                            std::back_inserter(inter));
      if (!inter.empty()) correct_links += static_cast<double>(inter.size()) - 1;
    }
  }
  return {correct_links, pred_links, correct_links, gold_links};
}

// B-Cubed by the per-mention double loop over explicit membership sets.
inline PR b_cubed_loop(const vicoref::ClusterSet& gold, const vicoref::ClusterSet& pred) {
  const auto g = as_sets(gold);
  const auto p = as_sets(pred);
  const int n = gold.n_mentions;
  auto cluster_of = [](const std::vector<std::set<int>>& clusters, int m) {
    for (const auto& c : clusters) {
      if (c.count(m)) return c;
    }
    return std::set<int>{m};
  };
  double prec = 0, rec = 0;
  for (int m = 1; m <= n; ++m) {
    const std::set<int> cm = cluster_of(p, m);
    const std::set<int> gm = cluster_of(g, m);
    double inter = 0;
    for (int x : cm) {
      if (gm.count(x)) inter += 1;
    }
    prec += inter / static_cast<double>(cm.size());
    rec += inter / static_cast<double>(gm.size());
  }
  return {prec, static_cast<double>(n), rec, static_cast<double>(n)};
}

inline double phi_oracle(bool phi4, const std::set<int>& a, const std::set<int>& b) {
  double inter = 0;
  for (int x : a) {
    if (b.count(x)) inter += 1;
  }
  if (!phi4) return inter;
  return 2.0 * inter / static_cast<double>(a.size() + b.size());
}

// CEAF by exhaustive search over all injections of the smaller cluster family
// into the larger one.
inline PR ceaf_exhaustive(const vicoref::ClusterSet& gold, const vicoref::ClusterSet& pred,
                          bool phi4) {
  const auto g = as_sets(gold);
  const auto p = as_sets(pred);
  const std::size_t small = std::min(g.size(), p.size());
  const std::size_t large = std::max(g.size(), p.size());
  std::vector<std::size_t> pick(large);
  std::iota(pick.begin(), pick.end(), 0);
  double best = 0;
  // Permute the larger family; the first `small` slots align to the smaller.
  std::sort(pick.begin(), pick.end());
  do {
    double total = 0;
    for (std::size_t i = 0; i < small; ++i) {
      const auto& a = g.size() <= p.size() ? g[i] : g[pick[i]];
      const auto& b = g.size() <= p.size() ? p[pick[i]] : p[i];
      total += phi_oracle(phi4, a, b);
    }
    best = std::max(best, total);
  } while (std::next_permutation(pick.begin(), pick.end()));
  double p_den = 0, r_den = 0;
  for (const auto& c : p) p_den += phi_oracle(phi4, c, c);
  for (const auto& c : g) r_den += phi_oracle(phi4, c, c);
  return {best, p_den, best, r_den};
}

// Max-weight matching by exhaustive search over all injections.
inline double assignment_exhaustive(const std::vector<std::vector<double>>& score) {
  const std::size_t rows = score.size();
  const std::size_t cols = rows ? score[0].size() : 0;
  if (rows == 0 || cols == 0) return 0;
  if (rows <= cols) {
    std::vector<std::size_t> pick(cols);
    std::iota(pick.begin(), pick.end(), 0);
    double best = 0;
    do {
      double total = 0;
      for (std::size_t i = 0; i < rows; ++i) total += score[i][pick[i]];
      best = std::max(best, total);
    } while (std::next_permutation(pick.begin(), pick.end()));
    return best;
  }
  std::vector<std::size_t> pick(rows);
  std::iota(pick.begin(), pick.end(), 0);
  double best = 0;
  do {
    double total = 0;
    for (std::size_t j = 0; j < cols; ++j) total += score[pick[j]][j];
    best = std::max(best, total);
  } while (std::next_permutation(pick.begin(), pick.end()));
  return best;
}

// Uniform random partition of 1..n (allocation by random cluster label).
inline vicoref::ClusterSet random_partition(std::mt19937& rng, int n) {
  std::uniform_int_distribution<int> label(0, std::max(0, n - 1));
  std::vector<std::vector<int>> buckets(static_cast<std::size_t>(std::max(1, n)));
  for (int i = 1; i <= n; ++i) buckets[static_cast<std::size_t>(label(rng))].push_back(i);
  buckets.erase(std::remove_if(buckets.begin(), buckets.end(),
                               [](const auto& b) { return b.empty(); }),
                buckets.end());
  return vicoref::canonicalize(buckets, n);
}

inline double f1_of(const PR& pr) {
  const double p = pr.p_den > 0 ? pr.p_num / pr.p_den : 0;
  const double r = pr.r_den > 0 ? pr.r_num / pr.r_den : 0;
  return p + r > 0 ? 2 * p * r / (p + r) : 0;
}

}  // namespace oracles
