#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

namespace bwmr::detail {

// Sum that does not depend on the order of the terms: the terms are sorted by
// magnitude first, so any permutation of the input gives a bit-identical
// result and negating every term negates the sum exactly.
// `terms` is used as scratch and left sorted.
inline double ordered_sum(std::vector<double>& terms) {
  std::sort(terms.begin(), terms.end(), [](double x, double y) {
    const double ax = std::fabs(x), ay = std::fabs(y);
    return ax < ay || (ax == ay && x < y);
  });
  double s = 0.0;
  for (double t : terms) s += t;
  return s;
}

}  // namespace bwmr::detail
