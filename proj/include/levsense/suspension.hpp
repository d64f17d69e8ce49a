#pragma once

#include <complex>
#include <limits>

namespace levsense {

/// Spring-suspended trap platform, modelled as one damped harmonic oscillator.
struct Suspension {
  double platform_mass = 0.5;          // kg
  double resonance_frequency = 2.7;    // Hz
  double quality_factor = 10.0;

  void validate() const;
};

struct SuppressionReport {
  double platform_phase;               // rad, arg of the platform transmissibility
  std::complex<double> residual;       // a_eff / a_p
  double residual_factor;              // signed real part of `residual`
  std::complex<double> effective_drive;  // m/s^2, relative-coordinate drive
};

/// Platform displacement per unit force-per-mass (s^2):
/// 1 / (ws^2 - w^2 + i ws w / Q). Pass Q = +inf for the lossless limit.
std::complex<double> platform_transmissibility(double drive_frequency, const Suspension& suspension);

/// Drive seen in the particle-minus-trap coordinate when the particle and the
/// platform are pulled by accelerations a_p and a_t at `drive_frequency`:
/// a_eff = a_p + w^2 * chi * a_t with chi = platform_transmissibility, which
/// is a_p - a_t w^2 / (w^2 - ws^2) for Q = inf. Throws NumericalError at
/// w = ws with infinite Q.
SuppressionReport effective_drive(double particle_accel, double platform_accel, double drive_frequency,
                                  const Suspension& suspension);

/// Platform-to-particle acceleration ratio a_t / a_p that makes the lossless
/// residual factor equal `target` at drive frequency f and suspension
/// frequency fs.
double coupling_for_residual(double target, double drive_frequency, double resonance_frequency);

}  // namespace levsense
