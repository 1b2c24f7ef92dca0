#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "tml/scoring.hpp"

namespace tml {

struct Assignment {
  std::size_t row = 0;
  std::size_t col = 0;
  friend bool operator==(const Assignment&, const Assignment&) = default;
};

namespace detail {

/// Kuhn-Munkres with row/column potentials on a dense square cost matrix
/// (row-major, n*n). Returns the column assigned to each row.
inline std::vector<std::size_t> min_cost_square(const std::vector<double>& cost, std::size_t n) {
  const double inf = std::numeric_limits<double>::infinity();
  // 1-based working arrays; index 0 is the virtual start column.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> owner(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    owner[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = owner[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
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
          u[owner[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (owner[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      owner[j0] = owner[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> col_of_row(n, 0);
  for (std::size_t j = 1; j <= n; ++j)
    if (owner[j] != 0) col_of_row[owner[j] - 1] = j - 1;
  return col_of_row;
}

}  // namespace detail

/// Maximum-total-score one-to-one assignment over the non-forbidden entries of
/// a rows x cols table. Among all assignments of maximum cardinality, the one
/// with the highest score sum is returned, ordered by row.
///
/// `score(r, c)` returns an optional score; nullopt forbids the pair. The
/// problem is solved as a min-cost square assignment on (max_score - score),
/// with padding and forbidden cells priced above any complete set of real
/// pairs so that cardinality takes precedence.
template <class ScoreFn>
std::vector<Assignment> max_score_assignment(std::size_t rows, std::size_t cols, ScoreFn&& score) {
  std::vector<std::optional<double>> table(rows * cols);
  double hi = -std::numeric_limits<double>::infinity();
  double lo = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const std::optional<double> s = score(r, c);
      table[r * cols + c] = s;
      if (!s) continue;
      hi = std::max(hi, *s);
      lo = std::min(lo, *s);
    }
  }
  if (hi < lo) return {};  // nothing feasible

  const std::size_t n = std::max(rows, cols);
  const double range = hi - lo;
  const double blocked = (static_cast<double>(n) + 1.0) * range + 1.0;
  std::vector<double> cost(n * n, blocked);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c)
      if (const auto& s = table[r * cols + c]) cost[r * n + c] = hi - *s;

  const auto col_of_row = detail::min_cost_square(cost, n);
  std::vector<Assignment> out;
  for (std::size_t r = 0; r < rows; ++r) {
    const auto c = col_of_row[r];
    if (c < cols && table[r * cols + c]) out.push_back({r, c});
  }
  return out;
}

inline std::vector<Assignment> max_score_assignment(const AssociationMatrix& m) {
  return max_score_assignment(m.rows(), m.cols(),
                              [&](std::size_t r, std::size_t c) { return m.at(r, c); });
}

}  // namespace tml
