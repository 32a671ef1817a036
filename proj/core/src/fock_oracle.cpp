#include "bqnn/fock_oracle.hpp"

#include <cmath>
#include <stdexcept>

#include <unsupported/Eigen/KroneckerProduct>

#include "bqnn/errors.hpp"

namespace bqnn {

namespace {

constexpr cd kI{0.0, 1.0};

SparseC single_mode_lowering(int dim) {
  SparseC a(dim, dim);
  a.reserve(Eigen::VectorXi::Constant(dim, 1));
  for (int n = 1; n < dim; ++n) a.insert(n - 1, n) = std::sqrt(static_cast<double>(n));
  a.makeCompressed();
  return a;
}

SparseC identity(int dim) {
  SparseC id(dim, dim);
  id.setIdentity();
  return id;
}

/// Lift a single-mode operator to the full tensor-product space at position k.
SparseC lift(const SparseC& op, int modes, int k, int dim) {
  SparseC out = (k == 0) ? op : identity(dim);
  for (int j = 1; j < modes; ++j) {
    const SparseC& factor = (j == k) ? op : identity(dim);
    out = Eigen::kroneckerProduct(out, factor).eval();
  }
  return out;
}

}  // namespace

FockOracle::FockOracle(const SystemParams& params, FockOracleOptions opts)
    : modes_(params.modes()), opts_(opts) {
  params.validate();
  if (modes_ > 2)
    throw std::invalid_argument("FockOracle: at most two modes (density matrix grows as (n_max+1)^2M)");
  if (opts_.n_max < 1 || opts_.n_max > 30)
    throw std::invalid_argument("FockOracle: n_max must be in [1, 30]");

  const int d = opts_.n_max + 1;
  dim_ = 1;
  for (int k = 0; k < modes_; ++k) dim_ *= d;

  stride_.resize(modes_);
  for (int k = 0; k < modes_; ++k) {
    int s = 1;
    for (int j = k + 1; j < modes_; ++j) s *= d;
    stride_[k] = s;
  }

  kappa_ = params.kappa;
  const SparseC a1 = single_mode_lowering(d);
  a_.resize(modes_);
  ad_.resize(modes_);
  num_.resize(modes_);
  for (int k = 0; k < modes_; ++k) {
    a_[k] = lift(a1, modes_, k, d);
    ad_[k] = SparseC(a_[k].adjoint());
    num_[k] = SparseC(ad_[k] * a_[k]);
  }

  h_ = SparseC(dim_, dim_);
  for (int k = 0; k < modes_; ++k) {
    h_ += SparseC(-params.delta[k] * num_[k]);
    const cd drive = kI * std::sqrt(params.kappa[k]) * params.eps[k];
    h_ += SparseC(drive * ad_[k]) + SparseC(std::conj(drive) * a_[k]);
    max_rate_ = std::max({max_rate_, params.kappa[k], std::abs(params.delta[k]),
                          std::sqrt(params.kappa[k]) * std::abs(params.eps[k])});
  }
  for (int k = 0; k < modes_; ++k)
    for (int l = k + 1; l < modes_; ++l) {
      const int p = SystemParams::pair_index(modes_, k, l);
      const cd g = params.g[p];
      const cd gs = params.gs[p];
      h_ += SparseC(g * (ad_[k] * a_[l])) + SparseC(std::conj(g) * (ad_[l] * a_[k]));
      h_ += SparseC(gs * (ad_[k] * ad_[l])) + SparseC(std::conj(gs) * (a_[l] * a_[k]));
      max_rate_ = std::max({max_rate_, std::abs(g), std::abs(gs)});
    }
  h_.makeCompressed();
}

int FockOracle::step_count(double dt) const {
  const double needed = std::ceil(dt * opts_.steps_per_rate * max_rate_);
  return std::max(static_cast<int>(needed), opts_.min_steps);
}

MatC FockOracle::vacuum() const {
  MatC rho = MatC::Zero(dim_, dim_);
  rho(0, 0) = 1.0;
  return rho;
}

MatC FockOracle::liouvillian(const MatC& rho) const {
  MatC out = -kI * (h_ * rho - rho * h_);
  for (int k = 0; k < modes_; ++k) {
    const MatC arho = a_[k] * rho;
    out.noalias() += kappa_[k] * (arho * ad_[k]);
    out.noalias() -= (0.5 * kappa_[k]) * (num_[k] * rho);
    out.noalias() -= (0.5 * kappa_[k]) * (rho * num_[k]);
  }
  return out;
}

MatC FockOracle::evolve(const MatC& rho0, double dt) const {
  if (rho0.rows() != dim_ || rho0.cols() != dim_)
    throw std::invalid_argument("FockOracle::evolve: density matrix size mismatch");
  const int steps = step_count(dt);
  const double h = dt / steps;

  MatC rho = rho0;
  for (int s = 0; s < steps; ++s) {
    const MatC k1 = liouvillian(rho);
    const MatC k2 = liouvillian(rho + (0.5 * h) * k1);
    const MatC k3 = liouvillian(rho + (0.5 * h) * k2);
    const MatC k4 = liouvillian(rho + h * k3);
    rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }

  if (!rho.allFinite()) throw NonFinite("FockOracle::evolve: non-finite density matrix");
  const double trace_err = std::abs(rho.trace() - cd(1.0));
  if (trace_err > opts_.trace_tol)
    throw NumericalResidue("FockOracle::evolve: trace drift " + std::to_string(trace_err));
  check_truncation(rho);
  return rho;
}

VecR FockOracle::marginal_distribution(const MatC& rho, int mode) const {
  if (mode < 0 || mode >= modes_)
    throw std::invalid_argument("FockOracle::marginal_distribution: mode out of range");
  const int d = opts_.n_max + 1;
  VecR p = VecR::Zero(d);
  for (int i = 0; i < dim_; ++i) {
    const int n = (i / stride_[mode]) % d;
    p[n] += rho(i, i).real();
  }
  return p;
}

double FockOracle::joint_probability(const MatC& rho, const std::vector<int>& nbar) const {
  const int i = joint_index(nbar);
  return rho(i, i).real();
}

double FockOracle::mean_photon_number(const MatC& rho, int mode) const {
  const VecR p = marginal_distribution(rho, mode);
  double n = 0.0;
  for (int k = 1; k < p.size(); ++k) n += k * p[k];
  return n;
}

void FockOracle::check_truncation(const MatC& rho) const {
  for (int k = 0; k < modes_; ++k) {
    const VecR p = marginal_distribution(rho, k);
    if (p[opts_.n_max] > opts_.leak_tol)
      throw TruncationLeak("FockOracle: top Fock level of mode " + std::to_string(k) +
                           " holds " + std::to_string(p[opts_.n_max]));
  }
}

int FockOracle::joint_index(const std::vector<int>& nbar) const {
  if (static_cast<int>(nbar.size()) != modes_)
    throw std::invalid_argument("FockOracle::joint_index: pattern length mismatch");
  int i = 0;
  for (int k = 0; k < modes_; ++k) {
    if (nbar[k] < 0 || nbar[k] > opts_.n_max)
      throw std::invalid_argument("FockOracle::joint_index: photon number out of range");
    i += nbar[k] * stride_[k];
  }
  return i;
}

}  // namespace bqnn
