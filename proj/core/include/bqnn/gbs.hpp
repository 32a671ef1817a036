#pragma once

#include <cstdint>
#include <vector>

#include "bqnn/gaussian_state.hpp"
#include "bqnn/loop_hafnian.hpp"
#include "bqnn/types.hpp"

namespace bqnn {

/// Matrices of the Gaussian boson sampling probability formula for a state
/// with displacement:
///   P(nbar) = prefactor / prod(n_k!) * lhaf(A_{nbar+nbar} with diag -> gamma)
///   A = T (I - sigma_q^-1), gamma = alpha^dagger sigma_q^-1,
///   prefactor = exp(-alpha^dagger sigma_q^-1 alpha / 2) / sqrt(det sigma_q),
/// with T the block swap matrix pairing each mode with its conjugate copy.
struct GbsMatrices {
  MatC sigma_q;
  MatC sigma_q_inv;
  MatC a;       ///< complex symmetric
  VecC gamma;   ///< length 2M
  cd det;       ///< det(sigma_q)
  cd quad;      ///< alpha^dagger sigma_q^-1 alpha
  cd prefactor;
};

GbsMatrices build_gbs_matrices(const GaussianState& state);

/// Single-mode reduced Gaussian state (rows/cols k and k+M).
GaussianState marginal_mode(const GaussianState& state, int mode);

/// The matrix passed to the loop hafnian for pattern nbar: rows/cols k and
/// k+M repeated n_k times each, diagonal replaced by the matching gamma
/// entries.  Exposed for tests of the repetition structure.
MatC repeated_matrix(const GbsMatrices& m, const std::vector<int>& nbar);
VecC repeated_gamma(const GbsMatrices& m, const std::vector<int>& nbar);

/// Joint Fock probability P(n_1..n_M).  Throws CapacityExceeded when
/// 2 * sum(nbar) exceeds the subset-recursion cap and NumericalResidue if the
/// imaginary residue of the result exceeds 1e-6.
double fock_probability_joint(const GaussianState& state, const std::vector<int>& nbar,
                              int cap = kHafnianCap);

/// Marginal Fock probability P_k(n) through the collapsed repeated-pair
/// recursion (O(n^2), usable far beyond the joint cap).
double fock_probability_single(const GaussianState& state, int mode, int n);

inline constexpr int kSingleModePhotonCap = 64;

/// Probabilities of a set of Fock-measurement outcomes.  mode >= 0 entries
/// are single-mode marginals P_mode(photons[0]); mode == -1 entries are joint
/// patterns over all modes.
struct FockDistribution {
  struct Entry {
    int mode = -1;
    std::vector<int> photons;
    double probability = 0.0;
  };
  std::vector<Entry> entries;
  int truncation = 0;  ///< largest photon number represented
};

/// Marginal distribution P_mode(0..n_max).
FockDistribution single_mode_distribution(const GaussianState& state, int mode, int n_max);

/// Empirical estimate of each entry from independent per-observable counting:
/// probability -> Binomial(shots, p)/shots, seeded and reproducible.
FockDistribution sample_shots(const FockDistribution& dist, std::int64_t shots,
                              std::uint64_t seed);

}  // namespace bqnn
