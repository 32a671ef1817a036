#pragma once

#include <string>

#include "bqnn/types.hpp"

namespace bqnn {

/// Physical parameters of M parametrically coupled bosonic modes, in internal
/// (renormalized) units.  Pair-coupled quantities (g, gs) are stored for the
/// ordered pairs (k, l), k < l, in row-major upper-triangle order:
/// (0,1), (0,2), ..., (0,M-1), (1,2), ...
struct SystemParams {
  VecR delta;   ///< detunings of the photon-conversion tones, length M
  VecC eps;     ///< coherent drive amplitudes, length M
  VecR kappa;   ///< cavity loss rates, length M, strictly positive
  VecR g;       ///< photon-conversion (beamsplitter) rates, length M(M-1)/2;
                ///< real amplitudes, conversion-tone phases are not trained
  VecC gs;      ///< two-mode-squeezing rates, length M(M-1)/2
                ///< squeezing-tone detunings are frame-fixed, never stored

  int modes() const { return static_cast<int>(delta.size()); }

  static int pair_count(int m) { return m * (m - 1) / 2; }

  /// Index of the pair (k, l), k < l, in the flattened pair order.
  static int pair_index(int m, int k, int l);

  /// Inverse of pair_index.
  static std::pair<int, int> pair_modes(int m, int index);

  static SystemParams zero(int modes);

  /// Throws std::invalid_argument on inconsistent sizes or kappa <= 0.
  void validate() const;
};

}  // namespace bqnn
