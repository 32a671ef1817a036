#pragma once

#include <complex>
#include <Eigen/Dense>

namespace bqnn {

using cd = std::complex<double>;
using MatC = Eigen::MatrixXcd;
using VecC = Eigen::VectorXcd;
using MatR = Eigen::MatrixXd;
using VecR = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;

// Rates are stored in units of renorm_scale Hz (10 MHz per internal unit),
// drive amplitudes in units of sqrt(renorm_scale) sqrt(Hz), times in units of
// 1/renorm_scale s.  Products rate*time and |eps|^2/rate are unit-free, so all
// closed-form dynamics below are written in internal units only.
inline constexpr double kRenormScale = 1.0e7;

inline double rate_to_internal(double hz) { return hz / kRenormScale; }
inline double rate_to_si(double internal) { return internal * kRenormScale; }
inline double amplitude_to_internal(double sqrt_hz) { return sqrt_hz / std::sqrt(kRenormScale); }
inline double amplitude_to_si(double internal) { return internal * std::sqrt(kRenormScale); }
inline double time_to_internal(double seconds) { return seconds * kRenormScale; }
inline double time_to_si(double internal) { return internal / kRenormScale; }

}  // namespace bqnn
