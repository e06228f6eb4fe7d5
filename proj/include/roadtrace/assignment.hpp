#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace roadtrace {

// Minimum-cost assignment of rows to columns (Kuhn-Munkres with row/column
// potentials, O(n^3)). Rectangular inputs are padded to square with zeros,
// which leaves the argmin unchanged. Returns, for every row, its column or
// -1 when the row is left unassigned (only possible when rows > cols).
template <typename Derived>
std::vector<long> hungarian(const Eigen::MatrixBase<Derived> &cost) {
  using Scalar = typename Derived::Scalar;
  const long rows = cost.rows(), cols = cost.cols();
  if (!cost.allFinite()) throw std::invalid_argument("cost matrix has non-finite entries");
  const long n = std::max(rows, cols);
  if (n == 0) return {};
  const auto at = [&](long i, long j) -> Scalar {
    return i < rows && j < cols ? cost(i, j) : Scalar(0);
  };

  // 1-based potentials; column 0 is a sentinel.
  const Scalar inf = std::numeric_limits<Scalar>::infinity();
  std::vector<Scalar> u(n + 1, Scalar(0)), v(n + 1, Scalar(0));
  std::vector<long> p(n + 1, 0), way(n + 1, 0);
  for (long i = 1; i <= n; ++i) {
    p[0] = i;
    long j0 = 0;
    std::vector<Scalar> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const long i0 = p[j0];
      Scalar delta = inf;
      long j1 = 0;
      for (long j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const Scalar cur = at(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (long j = 0; j <= n; ++j) {
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
      const long j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<long> col_of_row(static_cast<std::size_t>(rows), -1);
  for (long j = 1; j <= n; ++j)
    if (p[j] - 1 < rows && j - 1 < cols) col_of_row[static_cast<std::size_t>(p[j] - 1)] = j - 1;
  return col_of_row;
}

// Sum of cost(i, assignment[i]) over assigned rows, in row order.
template <typename Derived>
typename Derived::Scalar assignment_cost(const Eigen::MatrixBase<Derived> &cost,
                                         const std::vector<long> &assignment) {
  typename Derived::Scalar sum(0);
  for (std::size_t i = 0; i < assignment.size(); ++i)
    if (assignment[i] >= 0) sum += cost(static_cast<long>(i), assignment[i]);
  return sum;
}

}  // namespace roadtrace
