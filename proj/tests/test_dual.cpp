#include <doctest.h>

#include <complex>
#include <functional>

#include "bqnn/dual.hpp"

using namespace bqnn;

namespace {

// seed two real parameters (x, y) and compare the tangents of f against
// central differences in each
void check_against_fd(const std::function<Dual(const Dual&, const Dual&)>& f, double x,
                      double y) {
  Eigen::RowVectorXcd dx(2), dy(2);
  dx << cd(1, 0), cd(0, 0);
  dy << cd(0, 0), cd(1, 0);
  const Dual fx = f(Dual(cd(x, 0), dx), Dual(cd(y, 0), dy));

  const double h = 1e-6;
  auto value = [&](double a, double b) {
    return f(Dual(cd(a, 0), Eigen::RowVectorXcd::Zero(2)),
             Dual(cd(b, 0), Eigen::RowVectorXcd::Zero(2)))
        .v;
  };
  const cd d0 = (value(x + h, y) - value(x - h, y)) / (2.0 * h);
  const cd d1 = (value(x, y + h) - value(x, y - h)) / (2.0 * h);
  CHECK(std::abs(fx.d[0] - d0) < 1e-7 * std::max(1.0, std::abs(d0)));
  CHECK(std::abs(fx.d[1] - d1) < 1e-7 * std::max(1.0, std::abs(d1)));
}

}  // namespace

TEST_CASE("dual arithmetic differentiates composite expressions") {
  SUBCASE("product and sum") {
    check_against_fd([](const Dual& x, const Dual& y) { return x * y + x * x; }, 0.7, -1.3);
  }
  SUBCASE("quotient") {
    check_against_fd([](const Dual& x, const Dual& y) { return (x + cd(2, 0)) / y; }, 0.4, 1.9);
  }
  SUBCASE("exp and sqrt chain") {
    check_against_fd(
        [](const Dual& x, const Dual& y) { return exp(x * cd(0, 1)) * sqrt(y + cd(3, 0)); },
        1.1, 0.5);
  }
  SUBCASE("scalar mixes") {
    check_against_fd(
        [](const Dual& x, const Dual& y) {
          return 2.0 * x - cd(0.0, 1.5) * y + (x * y) / 3.0;
        },
        -0.6, 0.8);
  }
}

TEST_CASE("conj conjugates value and tangents") {
  Eigen::RowVectorXcd t(1);
  t << cd(0.3, -0.4);
  const Dual a(cd(1.0, 2.0), t);
  const Dual c = conj(a);
  CHECK(c.v == std::conj(a.v));
  CHECK(c.d[0] == std::conj(a.d[0]));

  // |z|^2 = z conj(z) of a dual with real differentiation variable has a
  // purely real derivative
  Eigen::RowVectorXcd seed(1);
  seed << cd(1, 0);
  auto z = [&](double p) { return Dual(cd(p, 0.5), seed) * cd(0.3, 0.8); };
  const double p0 = 0.9;
  const Dual mag2 = z(p0) * conj(z(p0));
  CHECK(std::abs(mag2.v.imag()) < 1e-15);
  CHECK(std::abs(mag2.d[0].imag()) < 1e-15);
  const double h = 1e-6;
  const double fd = (std::norm(z(p0 + h).v) - std::norm(z(p0 - h).v)) / (2.0 * h);
  CHECK(mag2.d[0].real() == doctest::Approx(fd).epsilon(1e-7));
}

TEST_CASE("division tracks both numerator and denominator tangents") {
  Eigen::RowVectorXcd da(1), db(1);
  da << cd(1, 0);
  db << cd(2, 0);  // shared parameter hits both operands
  const Dual a(cd(2.0, 1.0), da);
  const Dual b(cd(1.0, -1.0), db);
  const Dual q = a / b;
  // d(a/b) = da/b - a db/b^2
  const cd want = da[0] / b.v - a.v * db[0] / (b.v * b.v);
  CHECK(std::abs(q.d[0] - want) < 1e-15);
  CHECK(std::abs(q.v - a.v / b.v) < 1e-15);
}

TEST_CASE("zero-tangent duals behave as constants") {
  const Dual c(cd(2.0, -3.0), 4);
  const Dual r = c * c + cd(1.0, 0.0);
  CHECK(r.tangents() == 4);
  CHECK(r.d.norm() == 0.0);
}
