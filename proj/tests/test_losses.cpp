#include <doctest.h>

#include <cmath>

#include "bqnn/losses.hpp"

using namespace bqnn;

namespace {

VecR single(double v) {
  VecR x(1);
  x[0] = v;
  return x;
}

void check_dlogits_fd(LossKind kind, const VecR& logits, const VecR& target) {
  const LossResult at = evaluate_loss(kind, logits, target);
  REQUIRE(at.dlogits.size() == logits.size());
  const double h = 1e-6;
  for (int i = 0; i < logits.size(); ++i) {
    VecR up = logits, dn = logits;
    up[i] += h;
    dn[i] -= h;
    const double fd =
        (evaluate_loss(kind, up, target).value - evaluate_loss(kind, dn, target).value) /
        (2.0 * h);
    CHECK(at.dlogits[i] == doctest::Approx(fd).epsilon(1e-6));
  }
}

}  // namespace

TEST_CASE("mse value and gradient") {
  VecR y(2), t(2);
  y << 1.0, -0.5;
  t << 0.0, 0.5;
  const LossResult r = mse_loss(y, t);
  // mean over components: (1 + 1)/2
  CHECK(r.value == doctest::Approx(1.0));
  CHECK(r.dlogits[0] == doctest::Approx(1.0));   // 2 (y - t)/n
  CHECK(r.dlogits[1] == doctest::Approx(-1.0));
  check_dlogits_fd(LossKind::mse, y, t);
}

TEST_CASE("binary cross entropy pinned values") {
  // logit 0 is maximal uncertainty regardless of the target
  CHECK(bce_logits_loss(0.0, 0.0).value == doctest::Approx(std::log(2.0)));
  CHECK(bce_logits_loss(0.0, 1.0).value == doctest::Approx(std::log(2.0)));
  // confident wrong answer: 2 + log(1 + e^-2)
  CHECK(bce_logits_loss(2.0, 0.0).value == doctest::Approx(2.0 + std::log1p(std::exp(-2.0))));
  // the overflow-safe form survives extreme logits
  CHECK(bce_logits_loss(500.0, 1.0).value == doctest::Approx(0.0));
  CHECK(bce_logits_loss(-500.0, 0.0).value == doctest::Approx(0.0));
  CHECK(bce_logits_loss(500.0, 0.0).value == doctest::Approx(500.0));
  CHECK(std::isfinite(bce_logits_loss(800.0, 0.0).value));
}

TEST_CASE("binary cross entropy gradient is sigmoid minus target") {
  for (double logit : {-3.0, -0.4, 0.0, 1.7}) {
    for (double target : {0.0, 1.0}) {
      const LossResult r = bce_logits_loss(logit, target);
      const double sig = 1.0 / (1.0 + std::exp(-logit));
      CHECK(r.dlogits[0] == doctest::Approx(sig - target));
      check_dlogits_fd(LossKind::bce_logits, single(logit), single(target));
    }
  }
}

TEST_CASE("cross entropy pinned values and gradient") {
  SUBCASE("uniform logits over c classes cost log c") {
    VecR logits = VecR::Zero(10);
    VecR target(1);
    target[0] = 3;
    const LossResult r = evaluate_loss(LossKind::cross_entropy, logits, target);
    CHECK(r.value == doctest::Approx(std::log(10.0)));
    // gradient is softmax - onehot
    for (int i = 0; i < 10; ++i)
      CHECK(r.dlogits[i] == doctest::Approx(0.1 - (i == 3 ? 1.0 : 0.0)));
  }
  SUBCASE("shift invariance") {
    VecR a(3), t(1);
    a << 0.2, -1.0, 0.5;
    t[0] = 2;
    const double base = evaluate_loss(LossKind::cross_entropy, a, t).value;
    VecR shifted = a.array() + 100.0;
    CHECK(evaluate_loss(LossKind::cross_entropy, shifted, t).value ==
          doctest::Approx(base).epsilon(1e-12));
  }
  SUBCASE("log-sum-exp survives large logits") {
    VecR a(3), t(1);
    a << 1000.0, 999.0, -1000.0;
    t[0] = 0;
    const LossResult r = evaluate_loss(LossKind::cross_entropy, a, t);
    CHECK(std::isfinite(r.value));
    CHECK(r.value == doctest::Approx(std::log1p(std::exp(-1.0))));
  }
  SUBCASE("finite difference") {
    VecR a(4), t(1);
    a << 0.3, -0.8, 1.2, 0.0;
    t[0] = 1;
    check_dlogits_fd(LossKind::cross_entropy, a, t);
  }
}

TEST_CASE("dispatcher routes by kind") {
  VecR y(1), t(1);
  y << 0.0;
  t << 1.0;
  CHECK(evaluate_loss(LossKind::mse, y, t).value == doctest::Approx(1.0));
  CHECK(evaluate_loss(LossKind::bce_logits, y, t).value == doctest::Approx(std::log(2.0)));
}
