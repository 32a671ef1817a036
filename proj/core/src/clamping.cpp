#include "bqnn/clamping.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bqnn/errors.hpp"

namespace bqnn {

namespace {

/// Rescale z to the target magnitude, keeping the phase.  A zero value with a
/// positive floor becomes real positive.
bool project_magnitude(cd& z, double lo, double hi) {
  const double mag = std::abs(z);
  const double target = std::clamp(mag, lo, hi);
  if (target == mag) return false;
  z = (mag > 0.0) ? z * (target / mag) : cd(target, 0.0);
  return true;
}

bool project_real(cd& z, double lo, double hi) {
  const cd before = z;
  z = cd(std::clamp(z.real(), lo, hi), 0.0);
  return z != before;
}

}  // namespace

int clamp_coupling_magnitudes(VecR& g, double g_min, double g_max) {
  int moved = 0;
  for (int p = 0; p < g.size(); ++p) {
    const double target = std::clamp(g[p], g_min, g_max);
    if (target != g[p]) {
      g[p] = target;
      ++moved;
    }
  }
  return moved;
}

int clamp_squeezing_magnitudes(VecC& gs, double gs_max) {
  int moved = 0;
  for (int p = 0; p < gs.size(); ++p) moved += project_magnitude(gs[p], 0.0, gs_max);
  return moved;
}

double midpoint_limit(const VecR& g, const VecC& gs) {
  double max_gs = 0.0, min_g = 0.0;
  for (int p = 0; p < gs.size(); ++p) max_gs = std::max(max_gs, std::abs(gs[p]));
  for (int p = 0; p < g.size(); ++p) min_g = (p == 0) ? g[p] : std::min(min_g, g[p]);
  return 0.5 * (max_gs + min_g);
}

int clamp_encoded_coefficients(const EncodingSpec& spec, EncodingParams& p,
                               const ClampLimits& limits) {
  if (spec.target == EncodingTarget::eps) return 0;
  int moved = 0;
  if (spec.target == EncodingTarget::gs) {
    if (spec.kind == EncodingKind::phase) {
      // Pure phase rotation: |gs(x)| = theta0 for every input.
      for (int i = 0; i < spec.dim; ++i)
        moved += project_real(p.theta0[i], 0.0, limits.gs_max);
    } else {
      for (int i = 0; i < spec.dim; ++i) {
        moved += project_real(p.theta0[i], 0.0, limits.gs_max);
        moved += project_real(p.theta_bias[i], 0.0, limits.gs_max - p.theta0[i].real());
      }
    }
    return moved;
  }
  // g target: amplitude only (phase maps into g are rejected at model build)
  if (spec.kind != EncodingKind::amplitude)
    throw std::invalid_argument("clamp: phase encoding into g is not supported");
  for (int i = 0; i < spec.dim; ++i) {
    moved += project_real(p.theta0[i], 0.0, limits.g_max - limits.g_min);
    moved += project_real(p.theta_bias[i], 0.0, limits.g_min);
  }
  return moved;
}

void verify_encoded_range(const EncodingSpec& spec, const EncodingParams& p,
                          const ClampLimits& limits) {
  if (spec.target == EncodingTarget::eps) return;
  const double tol = 1e-9 * std::max(1.0, std::max(limits.g_max, limits.gs_max));
  for (int i = 0; i < spec.dim; ++i)
    for (int s = 0; s <= 100; ++s) {
      const double x = s / 100.0;
      const cd v = encoded_value(spec, p, i, x);
      if (spec.target == EncodingTarget::gs) {
        if (std::abs(v) > limits.gs_max + tol)
          throw NumericalResidue("clamped squeezing map escapes its limit");
      } else {
        if (std::abs(v.imag()) > tol || v.real() < -tol || v.real() > limits.g_max + tol)
          throw NumericalResidue("clamped coupling map escapes its range");
      }
    }
}

}  // namespace bqnn
