#include "common/hungarian.hpp"

#include <algorithm>
#include <limits>

#include "core/error.hpp"

namespace intentsim {

namespace {

// Price of leaving one row or column out of the matching. Larger than any
// admissible pairing cost so cardinality is maximized first, yet small enough
// that sums of them stay far below kUnassignable.
constexpr double kSkipCost = 1e6;

}  // namespace

std::vector<int> solve_assignment(const std::vector<double>& cost, int rows, int cols) {
  if (rows < 0 || cols < 0 || cost.size() != static_cast<std::size_t>(rows) * cols)
    throw Error(Error::Code::InvalidArgument, "assignment: cost matrix shape mismatch");
  if (rows == 0 || cols == 0) return std::vector<int>(rows, -1);

  // Square augmented matrix: real rows get dummy columns and vice versa, so
  // every unit can opt out at kSkipCost and the matrix is always feasible.
  const int n = rows + cols;
  auto at = [&](int r, int c) -> double {
    if (r < rows && c < cols) {
      const double v = cost[static_cast<std::size_t>(r) * cols + c];
      return v >= kUnassignable ? kUnassignable : v;
    }
    if (r < rows) return (c - cols == r) ? kSkipCost : kUnassignable;
    if (c < cols) return (r - rows == c) ? kSkipCost : kUnassignable;
    return 0.0;
  };

  // Jonker-Volgenant style shortest augmenting paths with dual potentials.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> matchCol(n + 1, 0);  // matchCol[c] = row matched to column c (1-based)
  std::vector<int> way(n + 1, 0);

  for (int i = 1; i <= n; ++i) {
    matchCol[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, false);
    do {
      used[j0] = true;
      const int i0 = matchCol[j0];
      double delta = inf;
      int j1 = -1;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = at(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[matchCol[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (matchCol[j0] != 0);
    do {
      const int j1 = way[j0];
      matchCol[j0] = matchCol[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> result(rows, -1);
  for (int c = 1; c <= n; ++c) {
    const int r = matchCol[c];
    if (r >= 1 && r <= rows && c <= cols &&
        cost[static_cast<std::size_t>(r - 1) * cols + (c - 1)] < kUnassignable)
      result[r - 1] = c - 1;
  }
  return result;
}

}  // namespace intentsim
