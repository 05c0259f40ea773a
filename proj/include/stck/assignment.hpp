#pragma once

#include <utility>
#include <vector>

namespace stck {

// Minimum-cost one-to-one assignment on an n x m row-major cost matrix.
// Infinite entries are forbidden pairs. Returns min(n,m)-or-fewer (row, col)
// pairs: maximum-cardinality matching over finite cells, minimum total cost
// among those. Deterministic for a given input.
std::vector<std::pair<int, int>> hungarian(const std::vector<double>& cost, int n, int m);

}  // namespace stck
