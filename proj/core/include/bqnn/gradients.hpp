#pragma once

#include <functional>
#include <string>
#include <vector>

#include "bqnn/dual.hpp"
#include "bqnn/dynamics.hpp"
#include "bqnn/gbs.hpp"
#include "bqnn/types.hpp"

namespace bqnn {

/// First-order response of the drift eigensystem to a perturbation dF':
///   d lambda_i = (U^-1 dF' U)_{ii}
///   dU = U C,  C_{ij} = (U^-1 dF' U)_{ij} / (lambda_j - lambda_i), C_{jj} = 0
/// (the zero-diagonal gauge).  Requires all eigenvalue gaps above min_gap.
struct EigSensitivity {
  VecC dlambda;
  MatC du;
};

EigSensitivity eig_sensitivity(const DriftSpectrum& spec, const MatC& dfprime,
                               double min_gap = kDefaultMinGap);

/// Sparse influence of one real trainable parameter on a segment: entries of
/// d F'/dp (at most a handful per parameter) and entries of d alpha_in/dp
/// (the drive vector before the sqrt(kappa) scaling).
struct ParamEffect {
  struct FprimeEntry {
    int row, col;
    cd w;
  };
  std::vector<FprimeEntry> fprime;
  std::vector<std::pair<int, cd>> alpha_in;
};

/// dvalue = d(class value)/d(parameter), complex chain coefficient.
void add_delta_effect(ParamEffect& e, int modes, int k, double dvalue);
void add_eps_effect(ParamEffect& e, int modes, int k, cd dvalue);
void add_g_effect(ParamEffect& e, int modes, int k, int l, cd dvalue);
void add_gs_effect(ParamEffect& e, int modes, int k, int l, cd dvalue);

/// Gaussian state bundled with forward-mode tangents for s real parameters.
/// dalpha column p is the tangent of alpha; dsigma stores the s tangent
/// matrices of sigma side by side (block p = columns [2M p, 2M (p+1))).
struct TangentState {
  GaussianState value;
  MatC dalpha;
  MatC dsigma;

  int tangents() const {
    return value.alpha.size() == 0 ? 0 : static_cast<int>(dalpha.cols());
  }
  static TangentState vacuum(int modes, int tangents);
  static TangentState from_state(const GaussianState& state, int tangents);

  Eigen::Ref<MatC> dsigma_block(int p) {
    const int n = static_cast<int>(value.alpha.size());
    return dsigma.middleCols(static_cast<Eigen::Index>(p) * n, n);
  }
  Eigen::Ref<const MatC> dsigma_block(int p) const {
    const int n = static_cast<int>(value.alpha.size());
    return dsigma.middleCols(static_cast<Eigen::Index>(p) * n, n);
  }

  /// Zero all tangents (truncate the differentiation history).
  void detach();
};

using FreshEffects = std::vector<std::pair<int, ParamEffect>>;

/// Closed-form segment evolution carried through the tangent batch.  `fresh`
/// lists parameters that act on this segment's generator/drive; all other
/// tangent columns are propagated linearly.  Uses the divided-difference form
/// of the eigenbasis perturbation, which is algebraically identical to the
/// eig_sensitivity route but never differentiates U explicitly.
TangentState evolve_segment_with_tangents(const TangentState& in, const DriftSpectrum& spec,
                                          double dt, const FreshEffects& fresh);
TangentState evolve_segment_with_tangents(const TangentState& in, const SystemParams& params,
                                          double dt, const FreshEffects& fresh);

/// A real scalar with its gradient over the tangent batch.
struct RealWithGrad {
  double value = 0.0;
  VecR grad;
};

/// Time- and mode-averaged photon number over [0, dt] from `start`, with
/// gradients; same uniform grid as time_averaged_photon_number.
RealWithGrad time_averaged_photon_number_with_tangents(const TangentState& start,
                                                       const SystemParams& params, double dt,
                                                       int samples, const FreshEffects& fresh);

/// Which marginal Fock probabilities form the feature vector.
struct MeasurementPlan {
  struct Probe {
    int mode;
    int photons;
  };
  std::vector<Probe> probes;

  int size() const { return static_cast<int>(probes.size()); }

  /// Canonical plan: P_k(n) for modes 0..measured_modes-1, n = 0..max_photons,
  /// ordered n-major: P_0(0), P_1(0), ..., P_0(1), ...
  static MeasurementPlan canonical(int measured_modes, int max_photons);
};

/// Feature probabilities and their Jacobian (features x tangents), computed
/// through the dual-number marginal GBS chain.
struct FeatureSet {
  VecR value;
  MatR jac;
};

FeatureSet measure_features(const TangentState& state, const MeasurementPlan& plan);
VecR measure_features_value(const GaussianState& state, const MeasurementPlan& plan);

/// Joint Fock probability as a dual scalar (value + tangents), through the
/// full 2M-mode dual GBS chain and the subset-recursion loop hafnian over
/// dual scalars.  Primary differentiation path for joint outcomes.
Dual fock_probability_joint_dual(const TangentState& state, const std::vector<int>& nbar,
                                 int cap = kHafnianCap);

/// Analytic derivative of the loop hafnian of a repeated matrix with loops:
///   d lhaf = 1/2 sum_{i != j} dA_{ij} lhaf(minus i,j) + sum_j dgamma_j lhaf(minus j)
/// `ws` must wrap the repeated matrix with its diagonal already replaced by
/// gamma; the diagonal of da_repeated is ignored (loops differentiate through
/// dgamma_repeated).  Independent cross-check of the dual-number path.
cd lhaf_gradient(LoopHafnianWorkspace& ws, const MatC& da_repeated, const VecC& dgamma_repeated);

/// Joint probability with its gradient via the analytic lhaf_gradient path.
struct ProbabilityGradient {
  double value = 0.0;
  VecR grad;
};

ProbabilityGradient gbs_probability_gradient(const TangentState& state,
                                             const std::vector<int>& nbar,
                                             int cap = kHafnianCap);

/// Central-difference audit of an analytic gradient.  `loss` is evaluated at
/// displaced points; rows that throw are recorded with a note and flag the
/// report unstable instead of aborting the check.
struct GradientReport {
  struct Row {
    std::string name;
    double analytic = 0.0;
    double fd = 0.0;
    double rel_err = 0.0;
    std::string note;
  };
  std::vector<Row> rows;
  double worst_rel_err = 0.0;  ///< over rows that evaluated cleanly
  bool unstable = false;
};

GradientReport finite_difference_check(const std::function<double(const VecR&)>& loss,
                                       const VecR& at, const VecR& analytic_grad,
                                       const std::vector<std::string>& names,
                                       double h = 1e-5);

}  // namespace bqnn
