#pragma once

#include "bqnn/types.hpp"

namespace bqnn {

/// Gaussian state of M modes in the doubled basis A = (a_1..a_M, a_1^+..a_M^+):
/// first-moment vector alpha (alpha[M+k] == conj(alpha[k])) and the symmetrized
/// covariance sigma_{kl} = (<A_k A_l^+> + <A_l^+ A_k>)/2 - alpha_k conj(alpha_l),
/// which is Hermitian and equals identity/2 in vacuum.
struct GaussianState {
  VecC alpha;  ///< length 2M
  MatC sigma;  ///< 2M x 2M Hermitian

  int modes() const { return static_cast<int>(alpha.size()) / 2; }

  static GaussianState vacuum(int modes);

  /// Throws NumericalResidue if the conjugate-pair or Hermiticity structure is
  /// violated beyond tol.
  void validate(double tol = 1e-9) const;
};

}  // namespace bqnn
