#include <doctest.h>

#include <cmath>
#include <random>

#include "bqnn/dynamics.hpp"
#include "bqnn/fock_oracle.hpp"
#include "bqnn/gbs.hpp"
#include "test_util.hpp"

using namespace bqnn;

TEST_CASE("driven lossy mode settles into a coherent state") {
  SystemParams p = SystemParams::zero(1);
  p.kappa[0] = 0.4;
  p.eps[0] = cd(0.25, -0.1);
  FockOracleOptions opts;
  opts.n_max = 12;
  const FockOracle oracle(p, opts);
  CHECK(oracle.dim() == 13);

  const MatC rho = oracle.evolve(oracle.vacuum(), 100.0);
  const double nbar = 4.0 * std::norm(p.eps[0]) / p.kappa[0];
  CHECK(oracle.mean_photon_number(rho, 0) == doctest::Approx(nbar).epsilon(1e-6));

  const VecR dist = oracle.marginal_distribution(rho, 0);
  for (int n = 0; n <= 8; ++n) {
    const double want = std::exp(-nbar + n * std::log(nbar) - std::lgamma(n + 1.0));
    CHECK(dist[n] == doctest::Approx(want).epsilon(1e-6));
  }
}

TEST_CASE("evolution preserves trace and hermiticity") {
  std::mt19937_64 rng(83);
  SystemParams p = test::random_stable_params(2, rng);
  p.eps *= 0.25;
  p.gs *= 0.3;
  FockOracleOptions opts;
  opts.n_max = 8;
  const FockOracle oracle(p, opts);
  const MatC rho = oracle.evolve(oracle.vacuum(), 3.0);
  CHECK(std::abs(rho.trace() - cd(1.0, 0.0)) < 1e-8);
  CHECK((rho - rho.adjoint()).cwiseAbs().maxCoeff() < 1e-9);
  for (int i = 0; i < oracle.dim(); ++i) CHECK(rho(i, i).real() > -1e-12);
}

TEST_CASE("marginal probabilities sum the joint diagonal") {
  std::mt19937_64 rng(89);
  SystemParams p = test::random_stable_params(2, rng);
  p.eps *= 0.25;
  p.gs *= 0.3;
  FockOracleOptions opts;
  opts.n_max = 8;
  const FockOracle oracle(p, opts);
  const MatC rho = oracle.evolve(oracle.vacuum(), 2.0);

  const VecR dist = oracle.marginal_distribution(rho, 0);
  for (int n = 0; n <= 8; ++n) {
    double total = 0.0;
    for (int m = 0; m <= 8; ++m) total += oracle.joint_probability(rho, {n, m});
    CHECK(dist[n] == doctest::Approx(total).epsilon(1e-10));
  }
  double mean = 0.0;
  for (int n = 0; n <= 8; ++n) mean += n * dist[n];
  CHECK(oracle.mean_photon_number(rho, 0) == doctest::Approx(mean).epsilon(1e-10));
}

TEST_CASE("master equation confirms the Gaussian closed forms") {
  // the same physics through two unrelated computations: RK4 on the truncated
  // density matrix versus eigenbasis propagation plus loop-hafnian readout
  std::mt19937_64 rng(97);
  SystemParams p = test::random_stable_params(2, rng);
  p.eps *= 0.2;
  p.gs *= 0.3;

  FockOracleOptions opts;
  opts.n_max = 8;
  const FockOracle oracle(p, opts);
  const double t = 2.5;
  const MatC rho = oracle.evolve(oracle.vacuum(), t);
  const GaussianState s = evolve_segment(GaussianState::vacuum(2), p, t);

  for (int mode = 0; mode < 2; ++mode) {
    const VecR dist = oracle.marginal_distribution(rho, mode);
    for (int n = 0; n <= 4; ++n)
      CHECK(std::abs(dist[n] - fock_probability_single(s, mode, n)) < 1e-6);
    CHECK(oracle.mean_photon_number(rho, mode) ==
          doctest::Approx(mean_photon_number(s, mode)).epsilon(1e-5));
  }
  for (int n1 = 0; n1 <= 2; ++n1)
    for (int n2 = 0; n2 <= 2; ++n2)
      CHECK(std::abs(oracle.joint_probability(rho, {n1, n2}) -
                     fock_probability_joint(s, {n1, n2})) < 1e-6);
}

TEST_CASE("detuned drive rotates the state the same way in both pictures") {
  SystemParams p = SystemParams::zero(1);
  p.kappa[0] = 0.5;
  p.delta[0] = 0.8;
  p.eps[0] = cd(0.3, 0.0);
  FockOracleOptions opts;
  opts.n_max = 10;
  const FockOracle oracle(p, opts);
  const double t = 2.0;  // transient still alive, phases matter
  const MatC rho = oracle.evolve(oracle.vacuum(), t);
  const GaussianState s = evolve_segment(GaussianState::vacuum(1), p, t);
  const VecR dist = oracle.marginal_distribution(rho, 0);
  for (int n = 0; n <= 5; ++n)
    CHECK(std::abs(dist[n] - fock_probability_single(s, 0, n)) < 1e-7);
  CHECK(oracle.mean_photon_number(rho, 0) ==
        doctest::Approx(mean_photon_number(s, 0)).epsilon(1e-6));
}

TEST_CASE("truncation leak is detected") {
  SystemParams p = SystemParams::zero(1);
  p.kappa[0] = 0.1;
  p.eps[0] = cd(1.5, 0.0);  // steady nbar = 90, far beyond the truncation
  FockOracleOptions opts;
  opts.n_max = 4;
  const FockOracle oracle(p, opts);
  CHECK_THROWS_AS(oracle.evolve(oracle.vacuum(), 20.0), TruncationLeak);
}

TEST_CASE("construction guards") {
  std::mt19937_64 rng(101);
  CHECK_THROWS_AS(FockOracle(test::random_stable_params(3, rng)),
                  std::invalid_argument);
  SystemParams p = SystemParams::zero(1);
  p.kappa[0] = 0.2;
  FockOracleOptions opts;
  opts.n_max = 0;
  CHECK_THROWS_AS(FockOracle(p, opts), std::invalid_argument);
}

TEST_CASE("step count scales with the fastest rate") {
  SystemParams p = SystemParams::zero(1);
  p.kappa[0] = 0.2;
  p.delta[0] = 2.0;
  const FockOracle oracle(p);
  CHECK(oracle.max_rate() >= 2.0);
  CHECK(oracle.step_count(1.0) >= 100);  // 50 steps per unit rate-time
  CHECK(oracle.step_count(1e-9) >= 10);  // floor
}
