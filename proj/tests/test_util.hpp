#pragma once

// Shared test scaffolding: deterministic random inputs and brute-force
// reference implementations kept independent of the library's own algorithms.

#include <cmath>
#include <complex>
#include <functional>
#include <random>
#include <vector>

#include "bqnn/gaussian_state.hpp"
#include "bqnn/system_params.hpp"
#include "bqnn/types.hpp"

namespace bqnn::test {

inline MatC random_symmetric(int n, std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  MatC b(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      b(i, j) = cd(u(rng), u(rng));
      b(j, i) = b(i, j);
    }
  return b;
}

// Every matching-with-loops enumerated explicitly: the lowest remaining index
// either takes a loop or pairs with one of the others.  No memoization, each
// matching contributes exactly one product term.
inline cd matchings_with_loops(const MatC& b, std::vector<int> remaining) {
  if (remaining.empty()) return cd(1.0, 0.0);
  const int i = remaining.front();
  std::vector<int> rest(remaining.begin() + 1, remaining.end());
  cd total = b(i, i) * matchings_with_loops(b, rest);
  for (std::size_t t = 0; t < rest.size(); ++t) {
    std::vector<int> next = rest;
    next.erase(next.begin() + static_cast<std::ptrdiff_t>(t));
    total += b(i, rest[t]) * matchings_with_loops(b, next);
  }
  return total;
}

inline cd matchings_with_loops(const MatC& b) {
  std::vector<int> all(static_cast<std::size_t>(b.rows()));
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
  return matchings_with_loops(b, std::move(all));
}

// Stable working point: couplings strictly dominate the squeezing so every
// drift eigenvalue keeps Re lambda <= -min(kappa)/2 margin in practice.
inline SystemParams random_stable_params(int modes, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  SystemParams p = SystemParams::zero(modes);
  for (int k = 0; k < modes; ++k) {
    p.delta[k] = 0.4 * (u(rng) - 0.5);
    p.eps[k] = cd(0.6 * (u(rng) - 0.5), 0.6 * (u(rng) - 0.5));
    p.kappa[k] = 0.15 + 0.25 * u(rng);
  }
  const int pairs = SystemParams::pair_count(modes);
  for (int q = 0; q < pairs; ++q) {
    p.g[q] = 1.0 + 0.5 * u(rng);
    const double angle = 2.0 * kPi * u(rng);
    p.gs[q] = 0.15 * u(rng) * cd(std::cos(angle), std::sin(angle));
  }
  return p;
}

inline double central_diff(const std::function<double(double)>& f, double x, double h = 1e-6) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

}  // namespace bqnn::test
