#pragma once

#include <cmath>

#include "bqnn/types.hpp"

namespace bqnn {

/// Forward-mode dual scalar: a complex value plus its tangents with respect
/// to a batch of real parameters.  conj() maps tangents through conj as well,
/// which is exact because the differentiation variables are real.
class Dual {
 public:
  cd v{0.0, 0.0};
  Eigen::RowVectorXcd d;

  Dual() = default;
  Dual(cd value, int tangents) : v(value), d(Eigen::RowVectorXcd::Zero(tangents)) {}
  Dual(cd value, Eigen::RowVectorXcd tangents) : v(value), d(std::move(tangents)) {}

  int tangents() const { return static_cast<int>(d.size()); }

  Dual operator-() const { return Dual(-v, -d); }

  friend Dual operator+(const Dual& a, const Dual& b) { return Dual(a.v + b.v, a.d + b.d); }
  friend Dual operator-(const Dual& a, const Dual& b) { return Dual(a.v - b.v, a.d - b.d); }
  friend Dual operator*(const Dual& a, const Dual& b) {
    return Dual(a.v * b.v, a.v * b.d + b.v * a.d);
  }
  friend Dual operator/(const Dual& a, const Dual& b) {
    const cd inv = 1.0 / b.v;
    return Dual(a.v * inv, (a.d - (a.v * inv) * b.d) * inv);
  }

  friend Dual operator*(const Dual& a, double s) { return Dual(a.v * s, a.d * s); }
  friend Dual operator*(double s, const Dual& a) { return a * s; }
  friend Dual operator*(const Dual& a, cd s) { return Dual(a.v * s, a.d * s); }
  friend Dual operator*(cd s, const Dual& a) { return a * s; }
  friend Dual operator+(const Dual& a, cd s) { return Dual(a.v + s, a.d); }
  friend Dual operator+(cd s, const Dual& a) { return a + s; }
  friend Dual operator-(const Dual& a, cd s) { return Dual(a.v - s, a.d); }
  friend Dual operator-(cd s, const Dual& a) { return Dual(s - a.v, -a.d); }
  friend Dual operator/(const Dual& a, double s) { return Dual(a.v / s, a.d / s); }

  friend Dual conj(const Dual& a) { return Dual(std::conj(a.v), a.d.conjugate()); }
  friend Dual exp(const Dual& a) {
    const cd e = std::exp(a.v);
    return Dual(e, e * a.d);
  }
  friend Dual sqrt(const Dual& a) {
    const cd s = std::sqrt(a.v);
    return Dual(s, a.d / (2.0 * s));
  }
};

}  // namespace bqnn
