#include <doctest.h>

#include <cmath>

#include "bqnn/clamping.hpp"
#include "bqnn/errors.hpp"

using namespace bqnn;

TEST_CASE("coupling projection") {
  VecR g(4);
  g << -0.5, 1.0, 2.0, 7.0;
  const int moved = clamp_coupling_magnitudes(g, 1.0, 5.0);
  CHECK(moved == 2);
  CHECK(g[0] == 1.0);  // sign flip lands on the floor, never reflects
  CHECK(g[1] == 1.0);
  CHECK(g[2] == 2.0);
  CHECK(g[3] == 5.0);
  CHECK(clamp_coupling_magnitudes(g, 1.0, 5.0) == 0);
}

TEST_CASE("squeezing projection preserves the phase") {
  VecC gs(3);
  gs << cd(3.0, 4.0), cd(0.1, -0.2), cd(0.0, 0.0);
  const int moved = clamp_squeezing_magnitudes(gs, 1.0);
  CHECK(moved == 1);
  CHECK(std::abs(gs[0]) == doctest::Approx(1.0));
  CHECK(std::arg(gs[0]) == doctest::Approx(std::atan2(4.0, 3.0)));
  CHECK(gs[1] == cd(0.1, -0.2));
  CHECK(gs[2] == cd(0.0, 0.0));
}

TEST_CASE("midpoint of the unstable ordering") {
  VecR g(2);
  g << 2.0, 3.0;
  VecC gs(2);
  gs << cd(0.0, 5.0), cd(1.0, 0.0);
  // max |gs| = 5, min g = 2
  CHECK(midpoint_limit(g, gs) == doctest::Approx(3.5));
  // applying midpoint as a squeezing cap and coupling floor restores order
  const double mid = midpoint_limit(g, gs);
  clamp_squeezing_magnitudes(gs, mid);
  clamp_coupling_magnitudes(g, mid, 100.0);
  CHECK(g.minCoeff() >= std::abs(gs[0]) - 1e-15);
  CHECK(g.minCoeff() >= std::abs(gs[1]) - 1e-15);
}

TEST_CASE("encoded squeezing amplitude coefficients") {
  EncodingSpec spec;
  spec.target = EncodingTarget::gs;
  spec.kind = EncodingKind::amplitude;
  spec.dim = 2;
  ClampLimits limits;
  limits.gs_max = 2.0;

  EncodingParams p = EncodingParams::zero(spec);
  p.theta0[0] = cd(1.5, 0.0);
  p.theta_bias[0] = cd(1.2, 0.0);  // 1.5 + 1.2 escapes at x = 1
  p.theta0[1] = cd(-0.4, 0.0);     // negative slope flips to zero
  p.theta_bias[1] = cd(0.3, 0.0);
  const int moved = clamp_encoded_coefficients(spec, p, limits);
  CHECK(moved == 2);
  CHECK(p.theta0[0].real() == 1.5);
  CHECK(p.theta_bias[0].real() == doctest::Approx(0.5));  // gs_max - theta0
  CHECK(p.theta0[1].real() == 0.0);
  CHECK(p.theta_bias[1].real() == 0.3);
  CHECK_NOTHROW(verify_encoded_range(spec, p, limits));
}

TEST_CASE("encoded squeezing phase coefficients clamp only the magnitude") {
  EncodingSpec spec;
  spec.target = EncodingTarget::gs;
  spec.kind = EncodingKind::phase;
  spec.dim = 2;
  ClampLimits limits;
  limits.gs_max = 1.0;

  EncodingParams p = EncodingParams::zero(spec);
  p.theta0[0] = cd(2.5, 0.0);
  p.theta0[1] = cd(0.7, 0.0);
  p.phi0[0] = 12.0;  // angles are unconstrained
  p.phi_bias[1] = -9.0;
  const int moved = clamp_encoded_coefficients(spec, p, limits);
  CHECK(moved == 1);
  CHECK(p.theta0[0].real() == 1.0);
  CHECK(p.theta0[1].real() == 0.7);
  CHECK(p.phi0[0] == 12.0);
  CHECK(p.phi_bias[1] == -9.0);
  CHECK_NOTHROW(verify_encoded_range(spec, p, limits));
}

TEST_CASE("encoded coupling amplitude splits slope and floor budgets") {
  EncodingSpec spec;
  spec.target = EncodingTarget::g;
  spec.kind = EncodingKind::amplitude;
  spec.dim = 1;
  ClampLimits limits;
  limits.g_min = 1.0;
  limits.g_max = 4.0;
  limits.gs_max = 1.0;

  EncodingParams p = EncodingParams::zero(spec);
  p.theta0[0] = cd(5.0, 0.0);      // slope capped at g_max - g_min
  p.theta_bias[0] = cd(0.2, 0.0);  // bias already inside [0, g_min]
  const int moved = clamp_encoded_coefficients(spec, p, limits);
  CHECK(moved == 1);
  CHECK(p.theta0[0].real() == doctest::Approx(3.0));
  CHECK(p.theta_bias[0].real() == doctest::Approx(0.2));
  // value range is [0.2, 3.2], inside [0, g_max]
  CHECK_NOTHROW(verify_encoded_range(spec, p, limits));

  CHECK_THROWS_AS(clamp_encoded_coefficients(
                      [] {
                        EncodingSpec s;
                        s.target = EncodingTarget::g;
                        s.kind = EncodingKind::phase;
                        s.dim = 1;
                        return s;
                      }(),
                      p, limits),
                  std::invalid_argument);
}

TEST_CASE("eps encodings are never clamped") {
  EncodingSpec spec;
  spec.target = EncodingTarget::eps;
  spec.kind = EncodingKind::amplitude;
  spec.dim = 2;
  EncodingParams p = EncodingParams::zero(spec);
  p.theta0[0] = cd(1e6, -1e6);
  ClampLimits limits;
  limits.gs_max = 1.0;
  CHECK(clamp_encoded_coefficients(spec, p, limits) == 0);
  CHECK(p.theta0[0] == cd(1e6, -1e6));
  CHECK_NOTHROW(verify_encoded_range(spec, p, limits));
}

TEST_CASE("range verification catches an escaped map") {
  EncodingSpec spec;
  spec.target = EncodingTarget::gs;
  spec.kind = EncodingKind::amplitude;
  spec.dim = 1;
  ClampLimits limits;
  limits.gs_max = 1.0;
  EncodingParams p = EncodingParams::zero(spec);
  p.theta0[0] = cd(0.8, 0.0);
  p.theta_bias[0] = cd(0.5, 0.0);  // escapes for x > 0.625
  CHECK_THROWS_AS(verify_encoded_range(spec, p, limits), NumericalResidue);
  p.theta_bias[0] = cd(0.2, 0.0);
  CHECK_NOTHROW(verify_encoded_range(spec, p, limits));
}
