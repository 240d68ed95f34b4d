// Physical constants and unit conversions used across the library.
//
// Internally all Hamiltonian entries are frequencies in GHz (h = 1), times are
// in ns, and drive envelopes are angular rates in rad/us.

#pragma once

#include <cmath>
#include <complex>
#include <numbers>

#include <Eigen/Dense>

namespace nlc {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

namespace constants {
inline constexpr double planck = 6.62607015e-34;              // J s
inline constexpr double elementary_charge = 1.602176634e-19;  // C
}  // namespace constants

namespace units {
inline constexpr double mhz_per_ghz = 1e3;
inline constexpr double hz_per_ghz = 1e9;
inline constexpr double femto = 1e-15;
// rad/us -> rad/ns
inline constexpr double per_us_to_per_ns = 1e-3;

inline constexpr double ghz_to_mhz(double f) { return f * mhz_per_ghz; }
inline constexpr double mhz_to_ghz(double f) { return f / mhz_per_ghz; }
inline constexpr double ghz_to_hz(double f) { return f * hz_per_ghz; }
}  // namespace units

}  // namespace nlc
