#pragma once

#include "corelink/matrix.hpp"

namespace corelink {

// Maximum-weight injective assignment between rows and columns of a
// rectangular nonnegative weight matrix (Kuhn-Munkres with potentials,
// O(n^2 m)). Exactly min(rows, cols) pairs are matched; with nonnegative
// weights that is always an optimal injective matching.
double max_weight_assignment(const Matrix& weights);

}  // namespace corelink
