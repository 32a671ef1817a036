#include <doctest.h>

#include <complex>
#include <random>

#include "bqnn/phi.hpp"

using namespace bqnn;

namespace {

// high-precision reference via the series with many terms at long double
cd phi1_reference(cd z) {
  std::complex<long double> zl(z.real(), z.imag());
  std::complex<long double> term(1.0L, 0.0L), sum(1.0L, 0.0L);
  for (int k = 1; k < 64; ++k) {
    term *= zl / static_cast<long double>(k + 1);
    sum += term;
  }
  return cd(static_cast<double>(sum.real()), static_cast<double>(sum.imag()));
}

}  // namespace

TEST_CASE("phi1 matches the long-double series across the branch switch") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    const cd z(u(rng), u(rng));
    const cd got = phi1(z);
    const cd want = phi1_reference(z);
    CHECK(std::abs(got - want) <= 1e-13 * std::max(1.0, std::abs(want)));
  }
}

TEST_CASE("phi1 limit values") {
  CHECK(phi1(cd(0.0, 0.0)) == cd(1.0, 0.0));
  // phi1(1) = e - 1
  CHECK(std::abs(phi1(cd(1.0, 0.0)) - cd(std::exp(1.0) - 1.0, 0.0)) < 1e-14);
  // tiny argument stays near 1 + z/2
  const cd z(1e-9, -2e-9);
  CHECK(std::abs(phi1(z) - (cd(1.0, 0.0) + 0.5 * z)) < 1e-15);
}

TEST_CASE("cexpm1 agrees with exp(z) - 1 and is accurate near zero") {
  const cd big(1.3, -0.7);
  CHECK(std::abs(cexpm1(big) - (std::exp(big) - 1.0)) < 1e-14);
  const cd tiny(1e-12, 3e-13);
  // naive exp(z) - 1 loses ~12 digits here, the series keeps them
  CHECK(std::abs(cexpm1(tiny) - tiny) < 1e-24);
}

TEST_CASE("phi1_prime matches a central difference of phi1") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    const cd z(u(rng), u(rng));
    const double h = 1e-5;
    const cd fd = (phi1(z + cd(h, 0.0)) - phi1(z - cd(h, 0.0))) / (2.0 * h);
    CHECK(std::abs(phi1_prime(z) - fd) < 1e-8);
  }
}

TEST_CASE("phi1_prime series and quotient branches agree at the switch radius") {
  // probe just inside and outside |z| = 0.5
  for (double phase = 0.1; phase < 6.2; phase += 0.7) {
    const cd dir(std::cos(phase), std::sin(phase));
    const cd inside = 0.499 * dir;
    const cd outside = 0.501 * dir;
    const cd quotient_inside = (std::exp(inside) * (inside - 1.0) + 1.0) / (inside * inside);
    CHECK(std::abs(phi1_prime(inside) - quotient_inside) < 1e-12);
    CHECK(std::abs(phi1_prime(inside) - phi1_prime(outside)) < 1e-2);
  }
}

TEST_CASE("phi1_divided_difference is continuous through coincidence") {
  const cd u(0.3, -0.2);
  SUBCASE("exact coincidence returns the derivative") {
    CHECK(std::abs(phi1_divided_difference(u, u) - phi1_prime(u)) < 1e-15);
  }
  SUBCASE("well-separated arguments use the quotient") {
    const cd v(-1.1, 0.4);
    const cd want = (phi1(u) - phi1(v)) / (u - v);
    CHECK(std::abs(phi1_divided_difference(u, v) - want) < 1e-14);
  }
  SUBCASE("no jump across the midpoint switch") {
    // spacing straddling the 1e-3 threshold
    const cd step(2.1e-3, 0.0);
    const cd just_above = phi1_divided_difference(u + step, u);
    const cd step2(0.9e-3, 0.0);
    const cd just_below = phi1_divided_difference(u + step2, u);
    CHECK(std::abs(just_above - just_below) < 1e-3);
    // both near the true derivative
    CHECK(std::abs(just_below - phi1_prime(u)) < 1e-3);
  }
}
