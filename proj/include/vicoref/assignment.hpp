#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>
#include <vector>

#include "vicoref/errors.hpp"

namespace vicoref {

struct Assignment {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (row, col), row-ascending
  double total = 0;
};

// Maximum-weight one-to-one matching between the rows and columns of a
// rectangular nonnegative score matrix (Kuhn-Munkres with potentials, O(n^3)).
// The matrix is padded to square with zeros and solved as a min-cost perfect
// matching on (max_entry - score); zero-score pairs against padding drop out.
inline Assignment optimal_assignment(const std::vector<std::vector<double>>& score) {
  const std::size_t rows = score.size();
  const std::size_t cols = rows ? score[0].size() : 0;
  double max_entry = 0;
  for (const auto& row : score) {
    if (row.size() != cols) throw InvariantError("score matrix must be rectangular");
    for (double v : row) {
      if (!std::isfinite(v) || v < 0) {
        throw RangeError("score matrix entries must be finite and nonnegative");
      }
      max_entry = std::max(max_entry, v);
    }
  }
  Assignment result;
  if (rows == 0 || cols == 0) return result;

  const std::size_t n = std::max(rows, cols);
  auto cost = [&](std::size_t i, std::size_t j) {
    return (i < rows && j < cols) ? max_entry - score[i][j] : max_entry;
  };

  constexpr double inf = std::numeric_limits<double>::infinity();
  // 1-based arrays; p[j] = row matched to column j, column 0 is the virtual root.
  std::vector<double> u(n + 1, 0), v(n + 1, 0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  for (std::size_t j = 1; j <= n; ++j) {
    const std::size_t i = p[j];
    if (i >= 1 && i <= rows && j <= cols) {
      result.pairs.emplace_back(i - 1, j - 1);
      result.total += score[i - 1][j - 1];
    }
  }
  std::sort(result.pairs.begin(), result.pairs.end());
  return result;
}

}  // namespace vicoref
