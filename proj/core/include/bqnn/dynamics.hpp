#pragma once

#include "bqnn/gaussian_state.hpp"
#include "bqnn/system_params.hpp"
#include "bqnn/types.hpp"

namespace bqnn {

/// Degeneracy policy for the drift eigendecomposition.
///  - value_only: accept any cleanly diagonalizable spectrum (checked via the
///    reconstruction residual).  Evolution and the propagator tangents only
///    need diagonalizability: their kernels are divided differences of phi1,
///    regular at coincident eigenvalues, and zero-detuning working points are
///    exactly degenerate.
///  - required: additionally demand all eigenvalue gaps above min_gap, for
///    formulas that divide by gaps (eigenvector sensitivities).
enum class DegeneracyGuard { value_only, required };

inline constexpr double kDefaultMinGap = 1e-6;

/// Drift matrix F' = L - K/2 of the Heisenberg-Langevin mean-field equations
/// in the doubled basis, built from detunings, photon-conversion and
/// two-mode-squeezing rates and the loss rates.  Shape 2M x 2M.
MatC build_coupling_matrix(const SystemParams& params);

/// Eigendecomposition of the drift matrix plus everything t-independent that
/// the closed-form propagator needs.
struct DriftSpectrum {
  MatC fprime;      ///< 2M x 2M drift matrix
  MatC u;           ///< eigenvectors (columns)
  MatC uinv;
  VecC lambda;      ///< eigenvalues
  MatC p;           ///< uinv * K * uinv^dagger, K = diag(kappa, kappa)
  VecR sqrt_kappa;  ///< per-row sqrt of K, length 2M
  VecC drive;       ///< sqrt(K) * (eps, conj(eps)), length 2M
  double min_gap = 0.0;  ///< smallest |lambda_i - lambda_j|, i != j

  int size() const { return static_cast<int>(lambda.size()); }
};

DriftSpectrum decompose_drift(const SystemParams& params,
                              DegeneracyGuard guard = DegeneracyGuard::required,
                              double min_gap = kDefaultMinGap);

/// Closed-form propagator over a segment of length dt:
///   alpha(dt) = F alpha(0) + U diag(i1) U^-1 drive
///   sigma(dt) = F sigma(0) F^+ + (1/2) U i2 U^+
/// with F = U diag(e^{lambda dt}) U^-1, i1 the diagonal drive integral and i2
/// the noise integral (i2)_{ij} = p_{ij} (e^{(l_i + conj l_j) dt} - 1)/(l_i + conj l_j).
struct Propagator {
  DriftSpectrum spec;
  double dt = 0.0;
  MatC f_t;   ///< exp(F' dt)
  VecC i1;    ///< (e^{lambda dt} - 1)/lambda, elementwise
  MatC i2;
};

Propagator make_propagator(const DriftSpectrum& spec, double dt);
Propagator make_propagator(const SystemParams& params, double dt,
                           DegeneracyGuard guard = DegeneracyGuard::required);

/// One closed-form evolution step.  Enforces (and checks) the Hermiticity and
/// conjugate-pair structure of the result.
GaussianState evolve_segment(const GaussianState& state, const Propagator& prop);
GaussianState evolve_segment(const GaussianState& state, const SystemParams& params,
                             double dt,
                             DegeneracyGuard guard = DegeneracyGuard::value_only);

/// <N_k> = sigma_kk - 1/2 + |alpha_k|^2, with tiny negative residue clipped.
double mean_photon_number(const GaussianState& state, int mode);

/// Mode-averaged photon number of a state.
double mean_photon_number_avg(const GaussianState& state);

/// Time- and mode-averaged photon number over [0, dt], uniform grid including
/// both endpoints.
double time_averaged_photon_number(const GaussianState& state0,
                                   const SystemParams& params, double dt,
                                   int samples = 21,
                                   DegeneracyGuard guard = DegeneracyGuard::value_only);

/// Largest real part of the drift spectrum; > 0 means photon numbers diverge.
double max_re_lambda(const DriftSpectrum& spec);

}  // namespace bqnn
