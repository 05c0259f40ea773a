#include "stck/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace stck {

namespace {
// Stand-in for forbidden pairs inside the solver; large enough to dominate any
// sum of finite costs at desk scale, small enough to keep the arithmetic exact.
constexpr double kBig = 1e9;
}  // namespace

std::vector<std::pair<int, int>> hungarian(const std::vector<double>& cost, int n, int m) {
  if (n < 0 || m < 0) throw std::invalid_argument("hungarian: negative dimensions");
  if (static_cast<std::size_t>(n) * static_cast<std::size_t>(m) != cost.size())
    throw std::invalid_argument("hungarian: cost size does not match dimensions");
  if (n == 0 || m == 0) return {};

  const int s = std::max(n, m);
  auto a = [&](int i, int j) -> double {
    if (i >= n || j >= m) return kBig;  // padding
    const double c = cost[static_cast<std::size_t>(i) * m + j];
    if (std::isnan(c)) throw std::invalid_argument("hungarian: NaN cost");
    return std::isinf(c) ? kBig : c;
  };

  // Potentials-based shortest augmenting path, 1-indexed.
  std::vector<double> u(static_cast<std::size_t>(s) + 1, 0.0), v(static_cast<std::size_t>(s) + 1, 0.0);
  std::vector<int> p(static_cast<std::size_t>(s) + 1, 0), way(static_cast<std::size_t>(s) + 1, 0);
  for (int i = 1; i <= s; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(static_cast<std::size_t>(s) + 1, std::numeric_limits<double>::infinity());
    std::vector<char> used(static_cast<std::size_t>(s) + 1, 0);
    do {
      used[static_cast<std::size_t>(j0)] = 1;
      const int i0 = p[static_cast<std::size_t>(j0)];
      int j1 = -1;
      double delta = std::numeric_limits<double>::infinity();
      for (int j = 1; j <= s; ++j) {
        if (used[static_cast<std::size_t>(j)]) continue;
        const double cur = a(i0 - 1, j - 1) - u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
        if (cur < minv[static_cast<std::size_t>(j)]) {
          minv[static_cast<std::size_t>(j)] = cur;
          way[static_cast<std::size_t>(j)] = j0;
        }
        if (minv[static_cast<std::size_t>(j)] < delta) {
          delta = minv[static_cast<std::size_t>(j)];
          j1 = j;
        }
      }
      for (int j = 0; j <= s; ++j) {
        if (used[static_cast<std::size_t>(j)]) {
          u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
          v[static_cast<std::size_t>(j)] -= delta;
        } else {
          minv[static_cast<std::size_t>(j)] -= delta;
        }
      }
      j0 = j1;
    } while (p[static_cast<std::size_t>(j0)] != 0);
    do {
      const int j1 = way[static_cast<std::size_t>(j0)];
      p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<std::pair<int, int>> result;
  for (int j = 1; j <= s; ++j) {
    const int i = p[static_cast<std::size_t>(j)];
    if (i == 0) continue;
    const int row = i - 1, col = j - 1;
    if (row >= n || col >= m) continue;
    const double c = cost[static_cast<std::size_t>(row) * m + col];
    if (std::isinf(c)) continue;
    result.emplace_back(row, col);
  }
  std::sort(result.begin(), result.end());
  return result;
}

}  // namespace stck
