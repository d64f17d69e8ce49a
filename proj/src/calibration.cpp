#include "levsense/calibration.hpp"

#include <cmath>

#include "levsense/errors.hpp"

namespace levsense {

void DetectionCircuit::validate() const {
  if (!(l_pickup > 0) || !(l_twisted_pair > 0) || !(l_input > 0) || !(l_calibration > 0) ||
      !(mutual_inductance_in_sq > 0) || !(squid_gain > 0)) {
    throw DomainError("DetectionCircuit: inductances and gain must be positive");
  }
}

double total_inductance(const DetectionCircuit& c) {
  return c.l_pickup + c.l_twisted_pair + c.l_input + c.l_calibration;
}

double beta_squared(double induced_over_crosstalk, double q_eff) {
  if (!(induced_over_crosstalk > 0) || !(q_eff > 0)) {
    throw DomainError("beta_squared: current ratio and Q_eff must be positive");
  }
  return induced_over_crosstalk / q_eff;
}

double q_effective(double frequency, double drive_duration) {
  if (!(frequency > 0) || !(drive_duration > 0)) {
    throw DomainError("q_effective: frequency and drive duration must be positive");
  }
  return constants::pi * frequency * drive_duration;
}

double flux_sensitivity(const DetectionCircuit& circuit, const OscillatorMode& mode, double beta2) {
  if (!(beta2 >= 0)) throw DomainError("flux_sensitivity: beta^2 must be non-negative");
  return std::sqrt(total_inductance(circuit) * mode.stiffness() * beta2);
}

double beta_squared_from_flux(const DetectionCircuit& circuit, const OscillatorMode& mode, double flux) {
  return flux * flux / (total_inductance(circuit) * mode.stiffness());
}

double voltage_sensitivity(const DetectionCircuit& c, double flux) {
  if (!(flux >= 0)) throw DomainError("voltage_sensitivity: flux sensitivity must be non-negative");
  return c.squid_gain / constants::Phi0 * c.mutual_inductance_in_sq / total_inductance(c) * flux;
}

double flux_sensitivity_from_voltage(const DetectionCircuit& c, double volts_per_metre) {
  if (!(volts_per_metre >= 0)) throw DomainError("flux_sensitivity_from_voltage: sensitivity must be non-negative");
  return volts_per_metre * total_inductance(c) * constants::Phi0 / (c.squid_gain * c.mutual_inductance_in_sq);
}

CalibrationResult calibrate(const DetectionCircuit& circuit, const OscillatorMode& mode, double beta2,
                            double relative_error) {
  circuit.validate();
  CalibrationResult r;
  r.beta_squared = beta2;
  r.flux_sensitivity = flux_sensitivity(circuit, mode, beta2);
  r.voltage_sensitivity = voltage_sensitivity(circuit, r.flux_sensitivity);
  r.relative_error = relative_error;
  return r;
}

CalibrationResult calibrate_from_voltage(const DetectionCircuit& circuit, const OscillatorMode& mode,
                                         double volts_per_metre, double relative_error) {
  circuit.validate();
  CalibrationResult r;
  r.voltage_sensitivity = volts_per_metre;
  r.flux_sensitivity = flux_sensitivity_from_voltage(circuit, volts_per_metre);
  r.beta_squared = beta_squared_from_flux(circuit, mode, r.flux_sensitivity);
  r.relative_error = relative_error;
  return r;
}

double propagate_relative_error(std::span<const PowerTerm> terms) {
  double acc = 0.0;
  for (const auto& t : terms) acc += (t.exponent * t.relative_error) * (t.exponent * t.relative_error);
  return std::sqrt(acc);
}

double zero_point_motion(double mass, double frequency, double hbar) {
  if (!(mass > 0) || !(frequency > 0) || !(hbar >= 0)) {
    throw DomainError("zero_point_motion: mass and frequency must be positive");
  }
  return std::sqrt(hbar / (2.0 * mass * constants::two_pi * frequency));
}

ZeroPointCoupling zero_point_flux_and_g0(double flux, double x_zpm, double lc_slope) {
  if (!(flux >= 0) || !(x_zpm >= 0) || !(lc_slope >= 0)) {
    throw DomainError("zero_point_flux_and_g0: inputs must be non-negative");
  }
  const double phi0_count = flux * x_zpm / constants::Phi0;
  return {phi0_count, lc_slope * phi0_count};
}

}  // namespace levsense
