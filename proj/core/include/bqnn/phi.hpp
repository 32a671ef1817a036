#pragma once

#include <cmath>

#include "bqnn/types.hpp"

namespace bqnn {

// phi1(z) = (e^z - 1)/z with phi1(0) = 1.  The series switch keeps the value
// accurate through z = 0, which is where the naive quotient cancels.
inline cd phi1(cd z) {
  if (std::abs(z) < 0.5) {
    // sum_{k>=0} z^k/(k+1)!
    cd term(1.0, 0.0);
    cd sum(1.0, 0.0);
    for (int k = 1; k < 24; ++k) {
      term *= z / static_cast<double>(k + 1);
      sum += term;
      if (std::abs(term) < 1e-20 * std::abs(sum)) break;
    }
    return sum;
  }
  return (std::exp(z) - 1.0) / z;
}

inline cd cexpm1(cd z) {
  if (std::abs(z) < 0.5) return z * phi1(z);
  return std::exp(z) - 1.0;
}

// d/dz phi1(z) = (e^z (z - 1) + 1)/z^2, series sum_{k>=1} k z^{k-1}/(k+1)!.
inline cd phi1_prime(cd z) {
  if (std::abs(z) < 0.5) {
    cd pow(1.0, 0.0);  // z^{k-1}
    cd sum(0.5, 0.0);  // k = 1 term
    double factorial = 2.0;  // (k+1)!
    for (int k = 2; k < 26; ++k) {
      pow *= z;
      factorial *= static_cast<double>(k + 1);
      cd term = pow * (static_cast<double>(k) / factorial);
      sum += term;
      if (std::abs(term) < 1e-20 * std::abs(sum)) break;
    }
    return sum;
  }
  return (std::exp(z) * (z - 1.0) + 1.0) / (z * z);
}

// Divided difference (phi1(u) - phi1(v))/(u - v), continuous at u = v.
// The midpoint-derivative switch is second-order accurate and avoids the
// cancellation of the direct quotient for close arguments.
inline cd phi1_divided_difference(cd u, cd v) {
  double scale = std::max({1.0, std::abs(u), std::abs(v)});
  if (std::abs(u - v) <= 1e-3 * scale) return phi1_prime(0.5 * (u + v));
  return (phi1(u) - phi1(v)) / (u - v);
}

}  // namespace bqnn
