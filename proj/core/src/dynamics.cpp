#include "bqnn/dynamics.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <sstream>

#include "bqnn/errors.hpp"
#include "bqnn/phi.hpp"

namespace bqnn {

namespace {

constexpr cd kI{0.0, 1.0};

void check_finite(const MatC& m, const char* label) {
  if (!m.allFinite()) throw NonFinite(std::string(label) + ": non-finite entries");
}

void check_finite(const VecC& v, const char* label) {
  if (!v.allFinite()) throw NonFinite(std::string(label) + ": non-finite entries");
}

}  // namespace

GaussianState GaussianState::vacuum(int modes) {
  GaussianState s;
  s.alpha = VecC::Zero(2 * modes);
  s.sigma = 0.5 * MatC::Identity(2 * modes, 2 * modes);
  return s;
}

void GaussianState::validate(double tol) const {
  const int m = modes();
  if (sigma.rows() != 2 * m || sigma.cols() != 2 * m)
    throw NumericalResidue("GaussianState: sigma shape mismatch");
  double scale = std::max(1.0, sigma.cwiseAbs().maxCoeff());
  if ((sigma - sigma.adjoint()).cwiseAbs().maxCoeff() > tol * scale)
    throw NumericalResidue("GaussianState: sigma not Hermitian within tolerance");
  double ascale = std::max(1.0, alpha.cwiseAbs().maxCoeff());
  for (int k = 0; k < m; ++k)
    if (std::abs(alpha[m + k] - std::conj(alpha[k])) > tol * ascale)
      throw NumericalResidue("GaussianState: alpha conjugate-pair structure violated");
}

MatC build_coupling_matrix(const SystemParams& params) {
  params.validate();
  const int m = params.modes();
  const int n = 2 * m;

  // G Hermitian with -delta_k on the diagonal and g_kl above it; Gs symmetric
  // with zero diagonal and gs_kl off it.  hbar cancels between the commutator
  // prefactor and the rates, so it never appears.
  MatC gmat = MatC::Zero(m, m);
  MatC gsmat = MatC::Zero(m, m);
  for (int k = 0; k < m; ++k) gmat(k, k) = cd(-params.delta[k], 0.0);
  for (int k = 0; k < m; ++k) {
    for (int l = k + 1; l < m; ++l) {
      const int idx = SystemParams::pair_index(m, k, l);
      gmat(k, l) = cd(params.g[idx], 0.0);
      gmat(l, k) = cd(params.g[idx], 0.0);
      gsmat(k, l) = params.gs[idx];
      gsmat(l, k) = params.gs[idx];
    }
  }

  MatC fprime(n, n);
  fprime.topLeftCorner(m, m) = -kI * gmat;
  fprime.topRightCorner(m, m) = -kI * gsmat;
  fprime.bottomLeftCorner(m, m) = kI * gsmat.adjoint();
  fprime.bottomRightCorner(m, m) = kI * gmat.transpose();
  for (int k = 0; k < m; ++k) {
    fprime(k, k) -= 0.5 * params.kappa[k];
    fprime(m + k, m + k) -= 0.5 * params.kappa[k];
  }
  return fprime;
}

DriftSpectrum decompose_drift(const SystemParams& params, DegeneracyGuard guard,
                              double min_gap) {
  DriftSpectrum spec;
  spec.fprime = build_coupling_matrix(params);
  const int m = params.modes();
  const int n = 2 * m;

  Eigen::ComplexEigenSolver<MatC> solver(spec.fprime, /*computeEigenvectors=*/true);
  if (solver.info() != Eigen::Success)
    throw NonFinite("decompose_drift: eigensolver failed to converge");
  spec.u = solver.eigenvectors();
  spec.lambda = solver.eigenvalues();
  check_finite(spec.u, "decompose_drift eigenvectors");
  check_finite(spec.lambda, "decompose_drift eigenvalues");

  Eigen::PartialPivLU<MatC> lu(spec.u);
  spec.uinv = lu.inverse();
  check_finite(spec.uinv, "decompose_drift inverse eigenvectors");

  // Diagonalizability check: the decomposition must actually reconstruct F'.
  MatC recon = spec.u * spec.lambda.asDiagonal() * spec.uinv;
  double fscale = std::max(1.0, spec.fprime.cwiseAbs().maxCoeff());
  if ((recon - spec.fprime).cwiseAbs().maxCoeff() > 1e-8 * fscale)
    throw DegenerateSpectrum("decompose_drift: drift matrix is not cleanly diagonalizable");

  spec.min_gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      spec.min_gap = std::min(spec.min_gap, std::abs(spec.lambda[i] - spec.lambda[j]));
  if (guard == DegeneracyGuard::required && spec.min_gap < min_gap) {
    std::ostringstream msg;
    msg << "decompose_drift: eigenvalue gap " << spec.min_gap << " below guard " << min_gap;
    throw DegenerateSpectrum(msg.str());
  }

  spec.sqrt_kappa.resize(n);
  for (int k = 0; k < m; ++k) {
    spec.sqrt_kappa[k] = std::sqrt(params.kappa[k]);
    spec.sqrt_kappa[m + k] = spec.sqrt_kappa[k];
  }
  VecR kpa(n);
  for (int k = 0; k < m; ++k) kpa[k] = kpa[m + k] = params.kappa[k];
  spec.p = spec.uinv * kpa.asDiagonal() * spec.uinv.adjoint();

  spec.drive.resize(n);
  for (int k = 0; k < m; ++k) {
    spec.drive[k] = spec.sqrt_kappa[k] * params.eps[k];
    spec.drive[m + k] = spec.sqrt_kappa[k] * std::conj(params.eps[k]);
  }
  return spec;
}

Propagator make_propagator(const DriftSpectrum& spec, double dt) {
  if (dt < 0.0) throw std::invalid_argument("make_propagator: dt must be >= 0");
  Propagator prop;
  prop.spec = spec;
  prop.dt = dt;

  const int n = spec.size();
  VecC exp_lt(n);
  prop.i1.resize(n);
  for (int i = 0; i < n; ++i) {
    const cd z = spec.lambda[i] * dt;
    exp_lt[i] = std::exp(z);
    prop.i1[i] = dt * phi1(z);  // (e^{lambda dt} - 1)/lambda, exact at lambda = 0
  }
  prop.f_t = spec.u * exp_lt.asDiagonal() * spec.uinv;

  prop.i2.resize(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const cd z = spec.lambda[i] + std::conj(spec.lambda[j]);
      prop.i2(i, j) = spec.p(i, j) * dt * phi1(z * dt);
    }

  check_finite(prop.f_t, "make_propagator F(t)");
  check_finite(prop.i1, "make_propagator i1");
  check_finite(prop.i2, "make_propagator i2");
  return prop;
}

Propagator make_propagator(const SystemParams& params, double dt, DegeneracyGuard guard) {
  return make_propagator(decompose_drift(params, guard), dt);
}

GaussianState evolve_segment(const GaussianState& state, const Propagator& prop) {
  const int n = prop.spec.size();
  if (state.alpha.size() != n)
    throw std::invalid_argument("evolve_segment: state/propagator mode mismatch");
  const int m = n / 2;

  GaussianState out;
  out.alpha = prop.f_t * state.alpha +
              prop.spec.u * (prop.i1.asDiagonal() * (prop.spec.uinv * prop.spec.drive));
  out.sigma = prop.f_t * state.sigma * prop.f_t.adjoint() +
              0.5 * (prop.spec.u * prop.i2 * prop.spec.u.adjoint());
  check_finite(out.alpha, "evolve_segment alpha");
  check_finite(out.sigma, "evolve_segment sigma");

  // The exact evolution preserves both structures; verify, then remove the
  // floating-point residue so it cannot accumulate across segments.
  out.validate(1e-9);
  out.sigma = 0.5 * (out.sigma + out.sigma.adjoint()).eval();
  for (int k = 0; k < m; ++k) out.alpha[m + k] = std::conj(out.alpha[k]);
  return out;
}

GaussianState evolve_segment(const GaussianState& state, const SystemParams& params,
                             double dt, DegeneracyGuard guard) {
  return evolve_segment(state, make_propagator(params, dt, guard));
}

double mean_photon_number(const GaussianState& state, int mode) {
  const int m = state.modes();
  if (mode < 0 || mode >= m) throw std::invalid_argument("mean_photon_number: mode out of range");
  double n = std::real(state.sigma(mode, mode)) - 0.5 + std::norm(state.alpha[mode]);
  if (n < 0.0) n = 0.0;  // clip the allowed -1e-9 residue band
  return n;
}

double mean_photon_number_avg(const GaussianState& state) {
  double sum = 0.0;
  for (int k = 0; k < state.modes(); ++k) sum += mean_photon_number(state, k);
  return sum / state.modes();
}

double time_averaged_photon_number(const GaussianState& state0, const SystemParams& params,
                                   double dt, int samples, DegeneracyGuard guard) {
  if (samples < 2) throw std::invalid_argument("time_averaged_photon_number: samples >= 2");
  const DriftSpectrum spec = decompose_drift(params, guard);
  double acc = 0.0;
  for (int s = 0; s < samples; ++s) {
    const double t = dt * static_cast<double>(s) / static_cast<double>(samples - 1);
    const GaussianState st = (s == 0) ? state0 : evolve_segment(state0, make_propagator(spec, t));
    acc += mean_photon_number_avg(st);
  }
  return acc / samples;
}

double max_re_lambda(const DriftSpectrum& spec) {
  double mx = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < spec.size(); ++i) mx = std::max(mx, spec.lambda[i].real());
  return mx;
}

}  // namespace bqnn
