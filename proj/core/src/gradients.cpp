#include "bqnn/gradients.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bqnn/errors.hpp"
#include "bqnn/phi.hpp"

namespace bqnn {

namespace {

constexpr cd kI{0.0, 1.0};

double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

}  // namespace

EigSensitivity eig_sensitivity(const DriftSpectrum& spec, const MatC& dfprime,
                               double min_gap) {
  if (spec.min_gap < min_gap)
    throw DegenerateSpectrum("eig_sensitivity: eigenvalue gaps below guard");
  const int n = spec.size();
  const MatC w = spec.uinv * dfprime * spec.u;
  EigSensitivity out;
  out.dlambda = w.diagonal();
  MatC c = MatC::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) c(i, j) = w(i, j) / (spec.lambda[j] - spec.lambda[i]);
  out.du = spec.u * c;
  return out;
}

void add_delta_effect(ParamEffect& e, int modes, int k, double dvalue) {
  // top-left diagonal carries +i delta, bottom-right -i delta
  e.fprime.push_back({k, k, kI * dvalue});
  e.fprime.push_back({modes + k, modes + k, -kI * dvalue});
}

void add_eps_effect(ParamEffect& e, int modes, int k, cd dvalue) {
  e.alpha_in.emplace_back(k, dvalue);
  e.alpha_in.emplace_back(modes + k, std::conj(dvalue));
}

void add_g_effect(ParamEffect& e, int modes, int k, int l, cd dvalue) {
  e.fprime.push_back({k, l, -kI * dvalue});
  e.fprime.push_back({l, k, -kI * std::conj(dvalue)});
  e.fprime.push_back({modes + k, modes + l, kI * std::conj(dvalue)});
  e.fprime.push_back({modes + l, modes + k, kI * dvalue});
}

void add_gs_effect(ParamEffect& e, int modes, int k, int l, cd dvalue) {
  e.fprime.push_back({k, modes + l, -kI * dvalue});
  e.fprime.push_back({l, modes + k, -kI * dvalue});
  e.fprime.push_back({modes + k, l, kI * std::conj(dvalue)});
  e.fprime.push_back({modes + l, k, kI * std::conj(dvalue)});
}

TangentState TangentState::vacuum(int modes, int tangents) {
  return from_state(GaussianState::vacuum(modes), tangents);
}

TangentState TangentState::from_state(const GaussianState& state, int tangents) {
  TangentState t;
  t.value = state;
  const int n = static_cast<int>(state.alpha.size());
  t.dalpha = MatC::Zero(n, tangents);
  t.dsigma = MatC::Zero(n, static_cast<Eigen::Index>(n) * tangents);
  return t;
}

void TangentState::detach() {
  dalpha.setZero();
  dsigma.setZero();
}

namespace {

/// t-dependent divided-difference kernels of one segment.
struct SegmentKernels {
  Propagator prop;
  MatC f_adj;           // F(t)^dagger
  MatC gamma_f;         // divided differences of e^{lambda t}
  MatC gamma_j1;        // divided differences of (e^{lambda t}-1)/lambda
  std::vector<MatC> theta;  // theta[i](k,j) = p(k,j) * psi_{ikj}
  VecC uinv_drive;      // U^-1 sqrt(K) alpha_in
  MatC j1;              // U diag(i1) U^-1
};

SegmentKernels make_kernels(const DriftSpectrum& spec, double dt, bool with_theta) {
  SegmentKernels ker;
  ker.prop = make_propagator(spec, dt);
  ker.f_adj = ker.prop.f_t.adjoint();
  const int n = spec.size();

  ker.gamma_f.resize(n, n);
  ker.gamma_j1.resize(n, n);
  VecC exp_lt(n);
  for (int i = 0; i < n; ++i) exp_lt[i] = std::exp(spec.lambda[i] * dt);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const cd diff = (spec.lambda[i] - spec.lambda[j]) * dt;
      ker.gamma_f(i, j) = dt * exp_lt[j] * phi1(diff);
      ker.gamma_j1(i, j) =
          dt * dt * phi1_divided_difference(spec.lambda[i] * dt, spec.lambda[j] * dt);
    }

  if (with_theta) {
    ker.theta.assign(n, MatC(n, n));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const cd zij = (spec.lambda[i] + std::conj(spec.lambda[j])) * dt;
        for (int k = 0; k < n; ++k) {
          const cd zkj = (spec.lambda[k] + std::conj(spec.lambda[j])) * dt;
          ker.theta[i](k, j) = spec.p(k, j) * dt * dt * phi1_divided_difference(zij, zkj);
        }
      }
  }

  ker.uinv_drive = spec.uinv * spec.drive;
  ker.j1 = spec.u * ker.prop.i1.asDiagonal() * spec.uinv;
  return ker;
}

TangentState evolve_tangent_core(const TangentState& in, const DriftSpectrum& spec,
                                 const SegmentKernels& ker, const FreshEffects& fresh) {
  const int n = spec.size();
  const int s = in.tangents();
  const MatC& f = ker.prop.f_t;

  TangentState out;
  out.value = evolve_segment(in.value, ker.prop);

  // Carried tangents: the evolution is linear in (alpha, sigma).
  out.dalpha.noalias() = f * in.dalpha;
  out.dsigma.resize(n, static_cast<Eigen::Index>(n) * s);
  if (s > 0) {
    MatC left = f * in.dsigma;  // multiplies every stacked block on the left
    for (int p = 0; p < s; ++p)
      out.dsigma_block(p).noalias() = left.middleCols(static_cast<Eigen::Index>(p) * n, n) * ker.f_adj;
  }

  if (!fresh.empty()) {
    const MatC sigma_u = spec.uinv * in.value.sigma;  // shared by all fresh params
    const VecC alpha_u = spec.uinv * in.value.alpha;

    for (const auto& [p, eff] : fresh) {
      if (p < 0 || p >= s) throw std::invalid_argument("evolve tangents: fresh index out of range");
      if (eff.fprime.empty() && eff.alpha_in.empty()) continue;

      if (!eff.fprime.empty()) {
        // W = U^-1 dF' U from the sparse entries, as rank-one updates.
        MatC w = MatC::Zero(n, n);
        for (const auto& entry : eff.fprime)
          w.noalias() += entry.w * (spec.uinv.col(entry.row) * spec.u.row(entry.col));

        // dF(t) alpha and dJ1 drive, both as vector chains.
        const MatC gw_f = ker.gamma_f.cwiseProduct(w);
        out.dalpha.col(p).noalias() += spec.u * (gw_f * alpha_u);
        out.dalpha.col(p).noalias() += spec.u * (ker.gamma_j1.cwiseProduct(w) * ker.uinv_drive);

        // dF sigma F^dagger and its Hermitian partner.
        MatC y = spec.u * (gw_f * sigma_u) * ker.f_adj;
        // Noise-integral response: X = U B U^dagger,
        // B(i,j) = sum_k W(i,k) theta_i(k,j).
        MatC b(n, n);
        for (int i = 0; i < n; ++i) b.row(i).noalias() = w.row(i) * ker.theta[i];
        MatC x = spec.u * b * spec.u.adjoint();
        out.dsigma_block(p).noalias() += y + y.adjoint() + 0.5 * (x + x.adjoint());
      }

      if (!eff.alpha_in.empty()) {
        VecC ddrive = VecC::Zero(n);
        for (const auto& [idx, wv] : eff.alpha_in) ddrive[idx] += spec.sqrt_kappa[idx] * wv;
        out.dalpha.col(p).noalias() += ker.j1 * ddrive;
      }
    }
  }

  if (!out.dalpha.allFinite() || !out.dsigma.allFinite())
    throw NonFinite("evolve_segment_with_tangents: non-finite tangents");
  return out;
}

}  // namespace

TangentState evolve_segment_with_tangents(const TangentState& in, const DriftSpectrum& spec,
                                          double dt, const FreshEffects& fresh) {
  const bool needs_theta = std::any_of(fresh.begin(), fresh.end(),
                                       [](const auto& pe) { return !pe.second.fprime.empty(); });
  return evolve_tangent_core(in, spec, make_kernels(spec, dt, needs_theta), fresh);
}

TangentState evolve_segment_with_tangents(const TangentState& in, const SystemParams& params,
                                          double dt, const FreshEffects& fresh) {
  return evolve_segment_with_tangents(in, decompose_drift(params, DegeneracyGuard::value_only),
                                      dt, fresh);
}

RealWithGrad time_averaged_photon_number_with_tangents(const TangentState& start,
                                                       const SystemParams& params, double dt,
                                                       int samples, const FreshEffects& fresh) {
  if (samples < 2)
    throw std::invalid_argument("time_averaged_photon_number_with_tangents: samples >= 2");
  const DriftSpectrum spec = decompose_drift(params, DegeneracyGuard::value_only);
  const int m = params.modes();
  const int s = start.tangents();

  RealWithGrad out;
  out.grad = VecR::Zero(s);
  for (int i = 0; i < samples; ++i) {
    const double t = dt * static_cast<double>(i) / static_cast<double>(samples - 1);
    const TangentState st =
        (i == 0) ? start : evolve_segment_with_tangents(start, spec, t, fresh);
    for (int k = 0; k < m; ++k) {
      out.value += mean_photon_number(st.value, k);
      for (int p = 0; p < s; ++p)
        out.grad[p] += std::real(st.dsigma_block(p)(k, k)) +
                       2.0 * std::real(std::conj(st.value.alpha[k]) * st.dalpha(k, p));
    }
  }
  const double norm = 1.0 / (static_cast<double>(samples) * m);
  out.value *= norm;
  out.grad *= norm;
  return out;
}

MeasurementPlan MeasurementPlan::canonical(int measured_modes, int max_photons) {
  MeasurementPlan plan;
  for (int n = 0; n <= max_photons; ++n)
    for (int k = 0; k < measured_modes; ++k) plan.probes.push_back({k, n});
  return plan;
}

namespace {

/// Dual-number marginal GBS chain for one mode: sigma_q inverse, gamma, A and
/// prefactor as 2x2 dual quantities, shared by all photon numbers probed on
/// that mode.
struct MarginalDualChain {
  Dual a00, a01, a11, g0, g1, pref;
};

MarginalDualChain build_marginal_dual_chain(const TangentState& ts, int mode) {
  const int m = ts.value.modes();
  const int s = ts.tangents();
  const int rows[2] = {mode, m + mode};

  Eigen::Matrix2cd sq;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) sq(i, j) = ts.value.sigma(rows[i], rows[j]);
  sq(0, 0) += 0.5;
  sq(1, 1) += 0.5;
  const cd det = sq(0, 0) * sq(1, 1) - sq(0, 1) * sq(1, 0);
  if (std::abs(det) < 1e-300) throw NumericalResidue("measure_features: singular sigma_q");
  Eigen::Matrix2cd inv;
  inv << sq(1, 1), -sq(0, 1), -sq(1, 0), sq(0, 0);
  inv /= det;

  const Eigen::Vector2cd al(ts.value.alpha[rows[0]], ts.value.alpha[rows[1]]);
  const Eigen::RowVector2cd adag = al.adjoint();
  const Eigen::RowVector2cd gam = adag * inv;
  const cd quad = (gam * al)(0, 0);

  // Tangents of everything above, parameter by parameter.
  Eigen::RowVectorXcd d_det(s), d_quad(s), d_a00(s), d_a01(s), d_a11(s), d_g0(s), d_g1(s);
  for (int p = 0; p < s; ++p) {
    Eigen::Matrix2cd dsq;
    auto block = ts.dsigma_block(p);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) dsq(i, j) = block(rows[i], rows[j]);
    const Eigen::Matrix2cd dinv = -inv * dsq * inv;
    d_det[p] = det * (inv * dsq).trace();

    const Eigen::Vector2cd dal(ts.dalpha(rows[0], p), ts.dalpha(rows[1], p));
    const Eigen::RowVector2cd ddag = dal.adjoint();
    const Eigen::RowVector2cd dgam = ddag * inv + adag * dinv;
    d_quad[p] = (dgam * al)(0, 0) + (gam * dal)(0, 0);
    d_g0[p] = dgam[0];
    d_g1[p] = dgam[1];
    // A = T (I - inv): row swap of -dinv; symmetrized like the value path.
    d_a00[p] = -dinv(1, 0);
    d_a11[p] = -dinv(0, 1);
    d_a01[p] = -0.5 * (dinv(1, 1) + dinv(0, 0));
  }

  MarginalDualChain c;
  c.a00 = Dual(-inv(1, 0), d_a00);
  c.a11 = Dual(-inv(0, 1), d_a11);
  c.a01 = Dual(1.0 - 0.5 * (inv(1, 1) + inv(0, 0)), d_a01);
  c.g0 = Dual(gam[0], d_g0);
  c.g1 = Dual(gam[1], d_g1);
  const Dual ddet(det, d_det);
  const Dual dquad(quad, d_quad);
  c.pref = exp(dquad * cd(-0.5, 0.0)) / sqrt(ddet);
  return c;
}

double checked_real(const Dual& prob, VecR* grad_out, const char* label) {
  const double scale = std::max(1.0, std::abs(prob.v.real()));
  if (std::abs(prob.v.imag()) >= 1e-6 * scale)
    throw NumericalResidue(std::string(label) + ": imaginary residue in probability");
  if (prob.v.real() < -1e-9 || prob.v.real() > 1.0 + 1e-9)
    throw NumericalResidue(std::string(label) + ": probability outside [0, 1]");
  if (grad_out) {
    grad_out->resize(prob.tangents());
    for (int p = 0; p < prob.tangents(); ++p) {
      if (std::abs(prob.d[p].imag()) >= 1e-6 * std::max(1.0, std::abs(prob.d[p].real())))
        throw NumericalResidue(std::string(label) + ": imaginary residue in gradient");
      (*grad_out)[p] = prob.d[p].real();
    }
  }
  return std::clamp(prob.v.real(), 0.0, 1.0);
}

}  // namespace

FeatureSet measure_features(const TangentState& state, const MeasurementPlan& plan) {
  const int s = state.tangents();
  FeatureSet out;
  out.value.resize(plan.size());
  out.jac.resize(plan.size(), s);

  for (int f = 0; f < plan.size(); ++f) {
    const auto& probe = plan.probes[f];
    if (probe.photons > kSingleModePhotonCap)
      throw CapacityExceeded("measure_features: photon number beyond cap");
  }

  // One dual chain per distinct measured mode, shared across photon numbers.
  std::vector<MarginalDualChain> chains(state.value.modes());
  std::vector<bool> built(state.value.modes(), false);
  for (int f = 0; f < plan.size(); ++f) {
    const auto& probe = plan.probes[f];
    if (probe.mode < 0 || probe.mode >= state.value.modes())
      throw std::invalid_argument("measure_features: probe mode out of range");
    if (!built[probe.mode]) {
      chains[probe.mode] = build_marginal_dual_chain(state, probe.mode);
      built[probe.mode] = true;
    }
    const MarginalDualChain& chain = chains[probe.mode];
    const Dual h = repeated_pair_loop_hafnian<Dual>(chain.a00, chain.a01, chain.a11, chain.g0,
                                                    chain.g1, probe.photons, Dual(cd(1.0), s));
    const Dual prob = chain.pref * h / factorial(probe.photons);
    VecR grad;
    out.value[f] = checked_real(prob, &grad, "measure_features");
    out.jac.row(f) = grad.transpose();
  }
  return out;
}

VecR measure_features_value(const GaussianState& state, const MeasurementPlan& plan) {
  VecR out(plan.size());
  for (int f = 0; f < plan.size(); ++f)
    out[f] = fock_probability_single(state, plan.probes[f].mode, plan.probes[f].photons);
  return out;
}

namespace {

/// Full-state dual GBS matrices: value path plus tangents of sigma_q^-1, A,
/// gamma, prefactor.
struct JointDualChain {
  GbsMatrices mats;
  std::vector<MatC> dinv;   // per parameter
  std::vector<VecC> dgamma;
  Eigen::RowVectorXcd dpref;
};

JointDualChain build_joint_dual_chain(const TangentState& ts) {
  JointDualChain c;
  c.mats = build_gbs_matrices(ts.value);
  const int s = ts.tangents();
  const MatC& inv = c.mats.sigma_q_inv;
  const VecC& al = ts.value.alpha;

  c.dinv.resize(s);
  c.dgamma.resize(s);
  c.dpref.resize(s);
  for (int p = 0; p < s; ++p) {
    const MatC dsq = ts.dsigma_block(p);
    c.dinv[p] = -inv * dsq * inv;
    const cd ddet = c.mats.det * (inv * dsq).trace();
    const VecC dal = ts.dalpha.col(p);
    c.dgamma[p] = (dal.adjoint() * inv + al.adjoint() * c.dinv[p]).transpose();
    const cd dquad = (dal.adjoint() * inv * al)(0, 0) + (al.adjoint() * c.dinv[p] * al)(0, 0) +
                     (al.adjoint() * inv * dal)(0, 0);
    // d[e^{-quad/2} det^{-1/2}]
    c.dpref[p] = c.mats.prefactor * (-0.5 * dquad - 0.5 * ddet / c.mats.det);
  }
  return c;
}

std::vector<int> repeated_index_map(int m, const std::vector<int>& nbar) {
  std::vector<int> idx;
  for (int k = 0; k < m; ++k)
    for (int c = 0; c < nbar[k]; ++c) idx.push_back(k);
  for (int k = 0; k < m; ++k)
    for (int c = 0; c < nbar[k]; ++c) idx.push_back(m + k);
  return idx;
}

}  // namespace

Dual fock_probability_joint_dual(const TangentState& state, const std::vector<int>& nbar,
                                 int cap) {
  const int m = state.value.modes();
  if (static_cast<int>(nbar.size()) != m)
    throw std::invalid_argument("fock_probability_joint_dual: pattern length mismatch");
  int total = 0;
  for (int nk : nbar) total += nk;
  if (2 * total > cap) throw CapacityExceeded("fock_probability_joint_dual: pattern beyond cap");

  const JointDualChain chain = build_joint_dual_chain(state);
  const int s = state.tangents();
  const auto idx = repeated_index_map(m, nbar);
  const int nrep = static_cast<int>(idx.size());

  // Dual repeated matrix: off-diagonal from A (tangent -T dinv, symmetrized),
  // diagonal from gamma.
  std::vector<Dual> entries(static_cast<std::size_t>(nrep) * nrep, Dual(cd(0.0), s));
  auto swap_row = [m](int i) { return i < m ? m + i : i - m; };
  for (int i = 0; i < nrep; ++i)
    for (int j = 0; j < nrep; ++j) {
      const int a = idx[i], b = idx[j];
      Eigen::RowVectorXcd d(s);
      if (i == j) {
        for (int p = 0; p < s; ++p) d[p] = chain.dgamma[p][a];
        entries[static_cast<std::size_t>(i) * nrep + j] = Dual(chain.mats.gamma[a], d);
      } else {
        for (int p = 0; p < s; ++p)
          d[p] = -0.5 * (chain.dinv[p](swap_row(a), b) + chain.dinv[p](swap_row(b), a));
        entries[static_cast<std::size_t>(i) * nrep + j] = Dual(chain.mats.a(a, b), d);
      }
    }

  LoopHafnianTable<Dual> table(nrep, std::move(entries), Dual(cd(1.0), s));
  Dual haf = table.full();

  double fact = 1.0;
  for (int nk : nbar) fact *= factorial(nk);
  const Dual pref(chain.mats.prefactor, chain.dpref);
  return pref * haf / fact;
}

cd lhaf_gradient(LoopHafnianWorkspace& ws, const MatC& da_repeated,
                 const VecC& dgamma_repeated) {
  const int n = ws.size();
  if (da_repeated.rows() != n || da_repeated.cols() != n ||
      static_cast<int>(dgamma_repeated.size()) != n)
    throw std::invalid_argument("lhaf_gradient: size mismatch");
  cd out = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      out += 0.5 * (da_repeated(i, j) + da_repeated(j, i)) * ws.minus(i, j);
  for (int j = 0; j < n; ++j) out += dgamma_repeated[j] * ws.minus(j);
  return out;
}

ProbabilityGradient gbs_probability_gradient(const TangentState& state,
                                             const std::vector<int>& nbar, int cap) {
  const int m = state.value.modes();
  if (static_cast<int>(nbar.size()) != m)
    throw std::invalid_argument("gbs_probability_gradient: pattern length mismatch");
  int total = 0;
  for (int nk : nbar) total += nk;
  if (2 * total > cap) throw CapacityExceeded("gbs_probability_gradient: pattern beyond cap");

  const JointDualChain chain = build_joint_dual_chain(state);
  const int s = state.tangents();
  const auto idx = repeated_index_map(m, nbar);
  const int nrep = static_cast<int>(idx.size());
  auto swap_row = [m](int i) { return i < m ? m + i : i - m; };

  LoopHafnianWorkspace ws(repeated_matrix(chain.mats, nbar), cap);
  const cd haf = ws.full();

  double fact = 1.0;
  for (int nk : nbar) fact *= factorial(nk);

  ProbabilityGradient out;
  out.grad.resize(s);
  const cd value = chain.mats.prefactor * haf / fact;
  if (std::abs(value.imag()) >= 1e-6 * std::max(1.0, std::abs(value.real())))
    throw NumericalResidue("gbs_probability_gradient: imaginary residue");
  if (value.real() < -1e-9 || value.real() > 1.0 + 1e-9)
    throw NumericalResidue("gbs_probability_gradient: probability outside [0, 1]");
  out.value = std::clamp(value.real(), 0.0, 1.0);

  for (int p = 0; p < s; ++p) {
    MatC da(nrep, nrep);
    VecC dg(nrep);
    for (int i = 0; i < nrep; ++i) {
      dg[i] = chain.dgamma[p][idx[i]];
      for (int j = 0; j < nrep; ++j) {
        const int a = idx[i], b = idx[j];
        da(i, j) = (i == j) ? cd(0.0)
                            : -0.5 * (chain.dinv[p](swap_row(a), b) + chain.dinv[p](swap_row(b), a));
      }
    }
    const cd dhaf = lhaf_gradient(ws, da, dg);
    const cd dp = (chain.dpref[p] * haf + chain.mats.prefactor * dhaf) / fact;
    out.grad[p] = dp.real();
  }
  return out;
}

GradientReport finite_difference_check(const std::function<double(const VecR&)>& loss,
                                       const VecR& at, const VecR& analytic_grad,
                                       const std::vector<std::string>& names, double h) {
  const int s = static_cast<int>(at.size());
  if (static_cast<int>(analytic_grad.size()) != s || static_cast<int>(names.size()) != s)
    throw std::invalid_argument("finite_difference_check: size mismatch");

  GradientReport report;
  report.rows.resize(s);
  for (int p = 0; p < s; ++p) {
    auto& row = report.rows[p];
    row.name = names[p];
    row.analytic = analytic_grad[p];
    try {
      VecR xp = at, xm = at;
      xp[p] += h;
      xm[p] -= h;
      row.fd = (loss(xp) - loss(xm)) / (2.0 * h);
      if (!std::isfinite(row.fd) || !std::isfinite(row.analytic)) {
        row.note = "non-finite";
        row.rel_err = std::numeric_limits<double>::quiet_NaN();
        report.unstable = true;
        continue;
      }
      row.rel_err = std::abs(row.analytic - row.fd) /
                    std::max({std::abs(row.analytic), std::abs(row.fd), 1e-8});
      report.worst_rel_err = std::max(report.worst_rel_err, row.rel_err);
    } catch (const std::exception& ex) {
      row.note = ex.what();
      row.fd = std::numeric_limits<double>::quiet_NaN();
      row.rel_err = std::numeric_limits<double>::quiet_NaN();
      report.unstable = true;
    }
  }
  return report;
}

}  // namespace bqnn
