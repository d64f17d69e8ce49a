#include "levsense/suspension.hpp"

#include <cmath>

#include "levsense/constants.hpp"
#include "levsense/errors.hpp"

namespace levsense {

void Suspension::validate() const {
  if (!(platform_mass > 0) || !(resonance_frequency > 0) || !(quality_factor > 0)) {
    throw DomainError("Suspension: platform_mass, resonance_frequency and quality_factor must be positive");
  }
}

std::complex<double> platform_transmissibility(double drive_frequency, const Suspension& suspension) {
  if (!(drive_frequency >= 0)) throw DomainError("platform_transmissibility: drive frequency must be >= 0");
  suspension.validate();
  const double ws = constants::two_pi * suspension.resonance_frequency;
  const double w = constants::two_pi * drive_frequency;
  const double loss = std::isinf(suspension.quality_factor) ? 0.0 : ws * w / suspension.quality_factor;
  return 1.0 / std::complex<double>(ws * ws - w * w, loss);
}

SuppressionReport effective_drive(double particle_accel, double platform_accel, double drive_frequency,
                                  const Suspension& suspension) {
  if (!(particle_accel >= 0) || !(platform_accel >= 0)) {
    throw DomainError("effective_drive: accelerations must be non-negative");
  }
  if (!(drive_frequency > 0)) throw DomainError("effective_drive: drive frequency must be positive");
  suspension.validate();
  const double ws = constants::two_pi * suspension.resonance_frequency;
  const double w = constants::two_pi * drive_frequency;
  if (std::isinf(suspension.quality_factor) && w == ws) {
    throw NumericalError("effective_drive: drive at the lossless suspension resonance");
  }
  const std::complex<double> chi = platform_transmissibility(drive_frequency, suspension);
  // Platform displacement x_t = chi a_t; its acceleration -w^2 x_t is
  // subtracted from the particle's in the trap frame.
  const std::complex<double> a_eff = particle_accel + w * w * chi * platform_accel;
  SuppressionReport r;
  r.platform_phase = std::arg(chi);
  r.effective_drive = a_eff;
  r.residual = particle_accel != 0.0 ? a_eff / particle_accel : std::complex<double>(0.0, 0.0);
  r.residual_factor = r.residual.real();
  return r;
}

double coupling_for_residual(double target, double drive_frequency, double resonance_frequency) {
  const double w2 = drive_frequency * drive_frequency;
  const double ws2 = resonance_frequency * resonance_frequency;
  if (w2 == ws2) throw NumericalError("coupling_for_residual: drive at suspension resonance");
  // 1 - c w^2 / (w^2 - ws^2) = target
  return (1.0 - target) * (w2 - ws2) / w2;
}

}  // namespace levsense
