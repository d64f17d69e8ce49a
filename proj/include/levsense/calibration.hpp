#pragma once

#include <span>

#include "levsense/constants.hpp"
#include "levsense/core_model.hpp"

namespace levsense {

/// Flux-transformer readout: pick-up loop, twisted pair, SQUID input coil and
/// calibration-transformer coil in series, read out by a SQUID with input
/// mutual inductance M_in,SQ and voltage gain dV/dPhi.
struct DetectionCircuit {
  double l_pickup = 2.9e-7;        // H
  double l_twisted_pair = 1e-7;    // H
  double l_input = 4e-7;           // H
  double l_calibration = 2e-9;     // H
  double mutual_inductance_in_sq = mutual_from_inverse(0.5e-6);  // H
  double squid_gain = 0.43;        // V per Phi0

  void validate() const;

  /// Mutual inductance (H) from its inverse quoted as current per flux quantum (A/Phi0).
  static constexpr double mutual_from_inverse(double amps_per_phi0) { return constants::Phi0 / amps_per_phi0; }
};

/// Series inductance of the detection loop (H).
double total_inductance(const DetectionCircuit& circuit);

/// Energy coupling beta^2 = (I_induced / I_crosstalk) / Q_eff.
double beta_squared(double induced_over_crosstalk, double q_effective);

/// Q_eff = pi f T for a resonant drive applied during T seconds.
double q_effective(double frequency, double drive_duration);

/// Flux through the pick-up loop per unit displacement (Wb/m),
/// sqrt(L_total m w^2 beta^2).
double flux_sensitivity(const DetectionCircuit& circuit, const OscillatorMode& mode, double beta_squared);

/// beta^2 implied by a given flux sensitivity; inverse of flux_sensitivity.
double beta_squared_from_flux(const DetectionCircuit& circuit, const OscillatorMode& mode,
                              double flux_sensitivity);

/// SQUID output voltage per unit displacement (V/m):
/// (dV/dPhi0) / Phi0 * M_in,SQ / L_total * dPhi/dx.
double voltage_sensitivity(const DetectionCircuit& circuit, double flux_sensitivity);

/// Inverse of voltage_sensitivity.
double flux_sensitivity_from_voltage(const DetectionCircuit& circuit, double voltage_sensitivity);

struct CalibrationResult {
  double beta_squared = 0.0;
  double flux_sensitivity = 0.0;     // Wb/m through the pick-up loop
  double voltage_sensitivity = 0.0;  // V/m at the SQUID output
  double relative_error = 0.0;       // of voltage_sensitivity

  double flux_sensitivity_phi0() const { return flux_sensitivity / constants::Phi0; }  // Phi0/m
  /// Relative error of beta^2, which enters the sensitivities as a square root.
  double beta_squared_relative_error() const { return 2.0 * relative_error; }
};

/// Relative voltage-calibration error of the measured chain.
inline constexpr double kMeasuredVoltageCalibrationError = 0.07;

/// Forward chain from a measured beta^2.
CalibrationResult calibrate(const DetectionCircuit& circuit, const OscillatorMode& mode, double beta_squared,
                            double relative_error = kMeasuredVoltageCalibrationError);

/// Backward chain from a measured dV/dx.
CalibrationResult calibrate_from_voltage(const DetectionCircuit& circuit, const OscillatorMode& mode,
                                         double voltage_sensitivity,
                                         double relative_error = kMeasuredVoltageCalibrationError);

/// One factor x^p of a product, with x known to relative error r.
struct PowerTerm {
  double exponent;
  double relative_error;
};

/// Relative error of a product of power laws, added in quadrature.
double propagate_relative_error(std::span<const PowerTerm> terms);

/// x_zpm = sqrt(hbar / (2 m w)) (m). `hbar` is a parameter so tests can take
/// the classical limit.
double zero_point_motion(double mass, double frequency, double hbar = constants::hbar);

struct ZeroPointCoupling {
  double flux_phi0;  // zero-point flux, Phi0
  double g0;         // Hz
};

/// Zero-point flux dPhi/dx * x_zpm (in Phi0) and the single-quantum coupling
/// g0 = lc_slope * flux for a readout resonator tuned at lc_slope (Hz/Phi0).
ZeroPointCoupling zero_point_flux_and_g0(double flux_sensitivity, double x_zpm, double lc_slope);

}  // namespace levsense
