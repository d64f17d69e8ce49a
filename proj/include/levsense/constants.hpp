#pragma once

#include <numbers>

namespace levsense::constants {

// CODATA values, 6 significant digits.
inline constexpr double G = 6.67430e-11;      // m^3 kg^-1 s^-2
inline constexpr double k_B = 1.38065e-23;    // J/K
inline constexpr double hbar = 1.05457e-34;   // J s
inline constexpr double mu0 = 1.25664e-6;     // H/m
inline constexpr double Phi0 = 2.06783e-15;   // Wb
inline constexpr double g_acc = 9.80665;      // m/s^2

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

}  // namespace levsense::constants
