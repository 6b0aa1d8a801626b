#include "corelink/assignment.hpp"

#include <cassert>
#include <limits>
#include <vector>

namespace corelink {

namespace {

// Min-cost assignment of every row to a distinct column, rows <= cols.
// Classic shortest-augmenting-path formulation with row/column potentials.
double min_cost_full_rows(const Matrix& a) {
  const int n = a.rows, m = a.cols;
  assert(n <= m);
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<int> match(m + 1, 0), way(m + 1, 0);

  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(m + 1, inf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = match[j0];
      int j1 = -1;
      double delta = inf;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = a(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0);
  }

  double cost = 0.0;
  for (int j = 1; j <= m; ++j)
    if (match[j] != 0) cost += a(match[j] - 1, j - 1);
  return cost;
}

}  // namespace

double max_weight_assignment(const Matrix& weights) {
  if (weights.rows == 0 || weights.cols == 0) return 0.0;
  // Negate to minimize; transpose so rows <= cols.
  const bool flip = weights.rows > weights.cols;
  const int n = flip ? weights.cols : weights.rows;
  const int m = flip ? weights.rows : weights.cols;
  Matrix cost(n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) {
      const double w = flip ? weights(j, i) : weights(i, j);
      assert(w >= 0.0);
      cost(i, j) = -w;
    }
  return -min_cost_full_rows(cost);
}

}  // namespace corelink
