#include <doctest.h>

#include <random>
#include <set>

#include "bqnn/encoding.hpp"

using namespace bqnn;

namespace {

EncodingSpec make_spec(EncodingTarget t, EncodingKind k, int dim, bool train_theta0 = true) {
  EncodingSpec s;
  s.target = t;
  s.kind = k;
  s.dim = dim;
  s.train_theta0 = train_theta0;
  return s;
}

EncodingParams random_params(const EncodingSpec& spec, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  EncodingParams p = EncodingParams::zero(spec);
  for (int i = 0; i < spec.dim; ++i) {
    p.theta0[i] = spec.real_theta() ? cd(u(rng) + 1.5, 0.0) : cd(u(rng), u(rng));
    p.theta_bias[i] = spec.real_theta() ? cd(u(rng) + 1.5, 0.0) : cd(u(rng), u(rng));
  }
  for (int i = 0; i < p.phi0.size(); ++i) {
    p.phi0[i] = 2.0 * u(rng);
    p.phi_bias[i] = 2.0 * u(rng);
  }
  return p;
}

}  // namespace

TEST_CASE("trainable counts per spec") {
  // drive targets keep complex coefficients, coupling targets real ones
  CHECK(make_spec(EncodingTarget::eps, EncodingKind::amplitude, 3).param_count() == 12);
  CHECK(make_spec(EncodingTarget::eps, EncodingKind::phase, 3).param_count() == 18);
  CHECK(make_spec(EncodingTarget::gs, EncodingKind::amplitude, 6).param_count() == 12);
  CHECK(make_spec(EncodingTarget::g, EncodingKind::amplitude, 6).param_count() == 12);
  // phase into a coupling drops the bias block entirely
  CHECK(make_spec(EncodingTarget::gs, EncodingKind::phase, 6).param_count() == 18);
  // frozen slopes drop the theta0 block
  CHECK(make_spec(EncodingTarget::eps, EncodingKind::amplitude, 3, false).param_count() == 6);
  CHECK(make_spec(EncodingTarget::gs, EncodingKind::phase, 6, false).param_count() == 12);
}

TEST_CASE("spec predicates") {
  CHECK_FALSE(make_spec(EncodingTarget::eps, EncodingKind::phase, 2).real_theta());
  CHECK(make_spec(EncodingTarget::g, EncodingKind::amplitude, 1).real_theta());
  CHECK(make_spec(EncodingTarget::gs, EncodingKind::phase, 1).real_theta());
  CHECK(make_spec(EncodingTarget::eps, EncodingKind::phase, 2).has_bias());
  CHECK(make_spec(EncodingTarget::gs, EncodingKind::amplitude, 2).has_bias());
  CHECK_FALSE(make_spec(EncodingTarget::gs, EncodingKind::phase, 2).has_bias());
}

TEST_CASE("encoded values") {
  std::mt19937_64 rng(103);
  SUBCASE("amplitude maps are affine in the input") {
    const EncodingSpec spec = make_spec(EncodingTarget::eps, EncodingKind::amplitude, 2);
    const EncodingParams p = random_params(spec, rng);
    for (double x : {0.0, 0.3, 1.0}) {
      CHECK(std::abs(encoded_value(spec, p, 0, x) - (p.theta0[0] * x + p.theta_bias[0])) <
            1e-15);
      CHECK(std::abs(encoded_value(spec, p, 1, x) - (p.theta0[1] * x + p.theta_bias[1])) <
            1e-15);
    }
  }
  SUBCASE("real-coefficient amplitude map ignores imaginary residue") {
    const EncodingSpec spec = make_spec(EncodingTarget::g, EncodingKind::amplitude, 1);
    EncodingParams p = random_params(spec, rng);
    const cd v = encoded_value(spec, p, 0, 0.6);
    CHECK(v.imag() == 0.0);
    CHECK(v.real() ==
          doctest::Approx(p.theta0[0].real() * 0.6 + p.theta_bias[0].real()));
  }
  SUBCASE("phase map into a coupling keeps the magnitude fixed") {
    const EncodingSpec spec = make_spec(EncodingTarget::gs, EncodingKind::phase, 3);
    const EncodingParams p = random_params(spec, rng);
    for (int i = 0; i < 3; ++i)
      for (double x : {0.0, 0.25, 0.7, 1.0}) {
        const cd v = encoded_value(spec, p, i, x);
        CHECK(std::abs(v) == doctest::Approx(std::abs(p.theta0[i].real())).epsilon(1e-12));
        const double want_arg = p.phi0[i] * x + p.phi_bias[i];
        CHECK(std::abs(v - p.theta0[i].real() * std::exp(cd(0.0, want_arg))) < 1e-14);
      }
  }
  SUBCASE("general phase map carries the complex bias") {
    const EncodingSpec spec = make_spec(EncodingTarget::eps, EncodingKind::phase, 1);
    const EncodingParams p = random_params(spec, rng);
    const double x = 0.4;
    const cd want =
        p.theta0[0] * std::exp(cd(0.0, p.phi0[0] * x + p.phi_bias[0])) + p.theta_bias[0];
    CHECK(std::abs(encoded_value(spec, p, 0, x) - want) < 1e-14);
  }
  SUBCASE("component range is checked") {
    const EncodingSpec spec = make_spec(EncodingTarget::eps, EncodingKind::amplitude, 2);
    const EncodingParams p = EncodingParams::zero(spec);
    CHECK_THROWS_AS(encoded_value(spec, p, 2, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(encoded_value(spec, p, -1, 0.5), std::invalid_argument);
  }
}

TEST_CASE("derivatives match finite differences through the packed layout") {
  std::mt19937_64 rng(107);
  const EncodingSpec specs[] = {
      make_spec(EncodingTarget::eps, EncodingKind::amplitude, 2),
      make_spec(EncodingTarget::eps, EncodingKind::phase, 2),
      make_spec(EncodingTarget::g, EncodingKind::amplitude, 3),
      make_spec(EncodingTarget::gs, EncodingKind::amplitude, 3),
      make_spec(EncodingTarget::gs, EncodingKind::phase, 3),
      make_spec(EncodingTarget::eps, EncodingKind::phase, 2, false),
      make_spec(EncodingTarget::gs, EncodingKind::phase, 3, false),
  };
  for (const auto& spec : specs) {
    const EncodingParams p = random_params(spec, rng);
    const int count = spec.param_count();
    VecR packed(count);
    pack_encoding(spec, p, packed.data());

    for (int i = 0; i < spec.dim; ++i) {
      const double x = 0.37 + 0.1 * i;
      std::vector<std::pair<int, cd>> derivs;
      encoded_value_derivatives(spec, p, i, x, derivs);

      VecC dense = VecC::Zero(count);
      for (const auto& [idx, dv] : derivs) {
        REQUIRE(idx >= 0);
        REQUIRE(idx < count);
        dense[idx] += dv;
      }
      const double h = 1e-6;
      for (int k = 0; k < count; ++k) {
        VecR up = packed, dn = packed;
        up[k] += h;
        dn[k] -= h;
        // frozen slots are absent from the packed vector; keep their live values
        EncodingParams pu = p, pd = p;
        unpack_encoding(spec, pu, up.data());
        unpack_encoding(spec, pd, dn.data());
        const cd fd =
            (encoded_value(spec, pu, i, x) - encoded_value(spec, pd, i, x)) / (2.0 * h);
        CHECK(std::abs(dense[k] - fd) < 1e-8);
      }
    }
  }
}

TEST_CASE("pack and unpack round trip") {
  std::mt19937_64 rng(109);
  const EncodingSpec specs[] = {
      make_spec(EncodingTarget::eps, EncodingKind::phase, 3),
      make_spec(EncodingTarget::gs, EncodingKind::phase, 2),
      make_spec(EncodingTarget::gs, EncodingKind::amplitude, 2, false),
  };
  for (const auto& spec : specs) {
    const EncodingParams p = random_params(spec, rng);
    VecR packed(spec.param_count());
    pack_encoding(spec, p, packed.data());
    EncodingParams q = EncodingParams::zero(spec);
    unpack_encoding(spec, q, packed.data());
    VecR repacked(spec.param_count());
    pack_encoding(spec, q, repacked.data());
    CHECK((packed - repacked).norm() == 0.0);
    for (int i = 0; i < spec.dim; ++i) {
      if (spec.train_theta0) {
        CHECK(q.theta0[i].real() == p.theta0[i].real());
        if (!spec.real_theta()) CHECK(q.theta0[i].imag() == p.theta0[i].imag());
      }
      if (spec.has_bias()) CHECK(q.theta_bias[i].real() == p.theta_bias[i].real());
    }
  }
}

TEST_CASE("parameter names") {
  SUBCASE("complex coefficients split into re and im") {
    const auto names =
        encoding_param_names(make_spec(EncodingTarget::eps, EncodingKind::amplitude, 2));
    REQUIRE(names.size() == 8);
    CHECK(names[0] == "enc.theta0[0].re");
    CHECK(names[1] == "enc.theta0[0].im");
    CHECK(names[4] == "enc.theta_bias[0].re");
  }
  SUBCASE("real coefficients drop the suffix") {
    const auto names =
        encoding_param_names(make_spec(EncodingTarget::gs, EncodingKind::phase, 3));
    REQUIRE(names.size() == 9);
    CHECK(names[0] == "enc.theta0[0]");
    CHECK(names[3] == "enc.phi0[0]");
    CHECK(names[6] == "enc.phi_bias[0]");
    std::set<std::string> uniq(names.begin(), names.end());
    CHECK(uniq.size() == names.size());
    for (const auto& n : uniq) CHECK(n.find("theta_bias") == std::string::npos);
  }
}
