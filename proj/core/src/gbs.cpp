#include "bqnn/gbs.hpp"

#include <cmath>
#include <random>

#include "bqnn/errors.hpp"

namespace bqnn {

namespace {

double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

double real_probability(cd value, const char* label) {
  if (!std::isfinite(value.real()) || !std::isfinite(value.imag()))
    throw NonFinite(std::string(label) + ": non-finite probability");
  if (std::abs(value.imag()) >= 1e-6 * std::max(1.0, std::abs(value.real())))
    throw NumericalResidue(std::string(label) + ": imaginary residue beyond tolerance");
  double p = value.real();
  if (p < -1e-9 || p > 1.0 + 1e-9)
    throw NumericalResidue(std::string(label) + ": probability out of [0,1]");
  return std::clamp(p, 0.0, 1.0);
}

}  // namespace

GbsMatrices build_gbs_matrices(const GaussianState& state) {
  const int m = state.modes();
  const int n = 2 * m;
  GbsMatrices out;
  out.sigma_q = state.sigma + 0.5 * MatC::Identity(n, n);

  Eigen::PartialPivLU<MatC> lu(out.sigma_q);
  const cd det = lu.determinant();
  if (std::abs(det) < 1e-300) throw NumericalResidue("build_gbs_matrices: sigma_q singular");
  out.sigma_q_inv = lu.inverse();
  if (!out.sigma_q_inv.allFinite()) throw NonFinite("build_gbs_matrices: sigma_q inverse");

  MatC one_minus = MatC::Identity(n, n) - out.sigma_q_inv;
  out.a.resize(n, n);
  out.a.topRows(m) = one_minus.bottomRows(m);
  out.a.bottomRows(m) = one_minus.topRows(m);
  // A is symmetric by construction of a physical sigma; fold in the rounding.
  out.a = 0.5 * (out.a + out.a.transpose()).eval();

  out.gamma = (state.alpha.adjoint() * out.sigma_q_inv).transpose();
  out.det = det;
  out.quad = (state.alpha.adjoint() * out.sigma_q_inv * state.alpha)(0, 0);
  out.prefactor = std::exp(-0.5 * out.quad) / std::sqrt(det);
  return out;
}

GaussianState marginal_mode(const GaussianState& state, int mode) {
  const int m = state.modes();
  if (mode < 0 || mode >= m) throw std::invalid_argument("marginal_mode: mode out of range");
  GaussianState out;
  out.alpha.resize(2);
  out.alpha << state.alpha[mode], state.alpha[m + mode];
  out.sigma.resize(2, 2);
  out.sigma << state.sigma(mode, mode), state.sigma(mode, m + mode),
      state.sigma(m + mode, mode), state.sigma(m + mode, m + mode);
  return out;
}

namespace {

std::vector<int> repeated_indices(int m, const std::vector<int>& nbar) {
  std::vector<int> idx;
  for (int k = 0; k < m; ++k)
    for (int c = 0; c < nbar[k]; ++c) idx.push_back(k);
  for (int k = 0; k < m; ++k)
    for (int c = 0; c < nbar[k]; ++c) idx.push_back(m + k);
  return idx;
}

}  // namespace

MatC repeated_matrix(const GbsMatrices& mat, const std::vector<int>& nbar) {
  const int m = static_cast<int>(mat.gamma.size()) / 2;
  if (static_cast<int>(nbar.size()) != m)
    throw std::invalid_argument("repeated_matrix: pattern length mismatch");
  const auto idx = repeated_indices(m, nbar);
  const int n = static_cast<int>(idx.size());
  MatC rep(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) rep(i, j) = mat.a(idx[i], idx[j]);
  for (int i = 0; i < n; ++i) rep(i, i) = mat.gamma[idx[i]];
  return rep;
}

VecC repeated_gamma(const GbsMatrices& mat, const std::vector<int>& nbar) {
  const int m = static_cast<int>(mat.gamma.size()) / 2;
  const auto idx = repeated_indices(m, nbar);
  VecC out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out[i] = mat.gamma[idx[i]];
  return out;
}

double fock_probability_joint(const GaussianState& state, const std::vector<int>& nbar,
                              int cap) {
  const int m = state.modes();
  if (static_cast<int>(nbar.size()) != m)
    throw std::invalid_argument("fock_probability_joint: pattern length mismatch");
  int total = 0;
  for (int nk : nbar) {
    if (nk < 0) throw std::invalid_argument("fock_probability_joint: negative photon number");
    total += nk;
  }
  if (2 * total > cap) throw CapacityExceeded("fock_probability_joint: pattern beyond cap");

  const GbsMatrices mat = build_gbs_matrices(state);
  const cd haf = loop_hafnian(repeated_matrix(mat, nbar), cap);
  double fact = 1.0;
  for (int nk : nbar) fact *= factorial(nk);
  return real_probability(mat.prefactor * haf / fact, "fock_probability_joint");
}

double fock_probability_single(const GaussianState& state, int mode, int n) {
  if (n < 0) throw std::invalid_argument("fock_probability_single: negative photon number");
  if (n > kSingleModePhotonCap)
    throw CapacityExceeded("fock_probability_single: photon number beyond cap");
  const GaussianState red = marginal_mode(state, mode);
  const GbsMatrices mat = build_gbs_matrices(red);
  const cd haf = repeated_pair_loop_hafnian<cd>(mat.a(0, 0), mat.a(0, 1), mat.a(1, 1),
                                                mat.gamma[0], mat.gamma[1], n, cd(1.0, 0.0));
  return real_probability(mat.prefactor * haf / factorial(n), "fock_probability_single");
}

FockDistribution single_mode_distribution(const GaussianState& state, int mode, int n_max) {
  FockDistribution dist;
  dist.truncation = n_max;
  for (int n = 0; n <= n_max; ++n)
    dist.entries.push_back({mode, {n}, fock_probability_single(state, mode, n)});
  return dist;
}

FockDistribution sample_shots(const FockDistribution& dist, std::int64_t shots,
                              std::uint64_t seed) {
  if (shots <= 0) throw std::invalid_argument("sample_shots: shots must be positive");
  FockDistribution out = dist;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (auto& entry : out.entries) {
    // Independent counting experiment per observable.
    std::int64_t count = 0;
    for (std::int64_t s = 0; s < shots; ++s)
      if (unit(rng) < entry.probability) ++count;
    entry.probability = static_cast<double>(count) / static_cast<double>(shots);
  }
  return out;
}

}  // namespace bqnn
