#pragma once

#include <vector>

#include <Eigen/SparseCore>

#include "bqnn/system_params.hpp"
#include "bqnn/types.hpp"

namespace bqnn {

using SparseC = Eigen::SparseMatrix<cd>;

struct FockOracleOptions {
  int n_max = 10;                ///< highest photon number kept per mode
  double steps_per_rate = 50.0;  ///< RK4 step <= 1 / (steps_per_rate * fastest rate)
  int min_steps = 10;
  double leak_tol = 1e-6;    ///< max allowed population in the top Fock level
  double trace_tol = 1e-8;
};

/// Brute-force reference: the same open-system dynamics integrated as a
/// Lindblad master equation in a truncated number basis,
///   drho/dt = -i [H, rho] + sum_k kappa_k (a_k rho a_k^dag - {a_k^dag a_k, rho}/2),
///   H = -sum_k delta_k a_k^dag a_k
///       + sum_{k<l} (g_kl a_k^dag a_l + gs_kl a_k^dag a_l^dag + h.c.)
///       + sum_k i sqrt(kappa_k) (eps_k a_k^dag - conj(eps_k) a_k),
/// with fixed-step RK4.  Exact up to truncation and step error, so it makes no
/// Gaussian assumption; restricted to at most two modes to keep the density
/// matrix small.  All rates and times in internal units.
class FockOracle {
 public:
  explicit FockOracle(const SystemParams& params, FockOracleOptions opts = {});

  int modes() const { return modes_; }
  int n_max() const { return opts_.n_max; }
  int dim() const { return dim_; }
  double max_rate() const { return max_rate_; }
  int step_count(double dt) const;

  MatC vacuum() const;

  /// RK4 integration over [0, dt].  Checks trace drift and top-level leak on
  /// the result (NumericalResidue / TruncationLeak).
  MatC evolve(const MatC& rho, double dt) const;

  /// P_mode(0..n_max) from the diagonal.
  VecR marginal_distribution(const MatC& rho, int mode) const;
  double joint_probability(const MatC& rho, const std::vector<int>& nbar) const;
  double mean_photon_number(const MatC& rho, int mode) const;

  void check_truncation(const MatC& rho) const;

 private:
  MatC liouvillian(const MatC& rho) const;
  int joint_index(const std::vector<int>& nbar) const;

  int modes_;
  int dim_;
  FockOracleOptions opts_;
  double max_rate_ = 0.0;
  VecR kappa_;
  SparseC h_;                   ///< Hamiltonian
  std::vector<SparseC> a_;      ///< per-mode annihilation
  std::vector<SparseC> ad_;     ///< adjoints
  std::vector<SparseC> num_;    ///< a^dag a
  std::vector<int> stride_;     ///< basis index = sum_k n_k * stride_k
};

}  // namespace bqnn
