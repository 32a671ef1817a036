#pragma once

#include "bqnn/encoding.hpp"
#include "bqnn/types.hpp"

namespace bqnn {

/// Coupling limits in internal units.  g_min keeps the beamsplitter couplings
/// strong enough to dominate the squeezing drive (stability margin); gs_max
/// caps the squeezing; g_max caps the couplings from above.
struct ClampLimits {
  double g_min = 0.0;
  double g_max = 0.0;
  double gs_max = 0.0;
};

/// Projection of the real couplings into [g_min, g_max].  The lower limit is
/// never negative, so a sign flip from the optimizer lands on the floor.
/// Returns the number of components moved.
int clamp_coupling_magnitudes(VecR& g, double g_min, double g_max);

/// Projection of |gs_p| below gs_max, phase preserved.
int clamp_squeezing_magnitudes(VecC& gs, double gs_max);

/// When plain couplings and squeezings drift into the unstable ordering
/// max|gs| > min g, both limits collapse onto the midpoint
/// (max|gs| + min g) / 2; applying it restores min g >= max|gs| and is a
/// no-op when the ordering already holds.
double midpoint_limit(const VecR& g, const VecC& gs);

/// Per-branch projection of encoding coefficients so the encoded class value
/// respects the limits for every input in [0, 1]:
///   gs phase:      theta0_i in [0, gs_max] (the map has no bias term)
///   gs amplitude:  theta0_i in [0, gs_max], theta_bias_i in [0, gs_max - theta0_i]
///   g amplitude:   theta0_i in [0, g_max - g_min], theta_bias_i in [0, g_min]
/// eps targets are unconstrained.  Phase angles are never clamped.
int clamp_encoded_coefficients(const EncodingSpec& spec, EncodingParams& p,
                               const ClampLimits& limits);

/// Safety net: evaluates the encoded class value on a 101-point input grid
/// and throws NumericalResidue if any point escapes the clamped range.
void verify_encoded_range(const EncodingSpec& spec, const EncodingParams& p,
                          const ClampLimits& limits);

}  // namespace bqnn
