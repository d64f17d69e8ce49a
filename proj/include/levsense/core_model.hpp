#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "levsense/constants.hpp"
#include "levsense/errors.hpp"

namespace levsense {

/// Levitated particle: a chain of cube magnets plus a non-magnetic bead.
/// The bead only enters through total_mass.
template <typename Scalar>
struct BasicParticle {
  Scalar total_mass{};             // kg
  Scalar magnet_edge{};            // m
  int magnet_count{};
  Scalar bead_radius{};            // m
  Scalar remnant_magnetization{};  // T

  Scalar magnet_volume() const {
    return static_cast<Scalar>(magnet_count) * magnet_edge * magnet_edge * magnet_edge;
  }
  Scalar dipole_moment() const;
  Scalar weight() const { return total_mass * static_cast<Scalar>(constants::g_acc); }
};

/// Magnetic moment of a uniformly magnetized body, B_r V / mu0 (A m^2).
template <typename Scalar>
Scalar dipole_moment(Scalar remnant_magnetization, Scalar magnet_volume) {
  if (!(remnant_magnetization >= 0) || !(magnet_volume >= 0)) {
    throw DomainError("dipole_moment: inputs must be non-negative");
  }
  return remnant_magnetization * magnet_volume / static_cast<Scalar>(constants::mu0);
}

template <typename Scalar>
Scalar BasicParticle<Scalar>::dipole_moment() const {
  return levsense::dipole_moment(remnant_magnetization, magnet_volume());
}

/// Three 0.25 mm NdFeB cubes and a glass bead, 0.43 mg in total.
inline BasicParticle<double> reference_particle() {
  return {.total_mass = 0.43e-6,
          .magnet_edge = 0.25e-3,
          .magnet_count = 3,
          .bead_radius = 0.25e-3,
          .remnant_magnetization = 1.4};
}

/// Mechanical resonator mode. q_factor, damping_rate and stiffness are derived
/// from (frequency, decay_time, effective_mass); decay_time may be +inf for a
/// lossless mode, in which case damping_rate is 0 and q_factor is +inf.
template <typename Scalar>
class BasicOscillatorMode {
 public:
  BasicOscillatorMode() = default;

  Scalar frequency() const { return frequency_; }
  Scalar decay_time() const { return decay_time_; }
  Scalar q_factor() const { return q_factor_; }
  /// Velocity damping rate gamma = 2 / tau (s^-1). The amplitude decays at gamma/2.
  Scalar damping_rate() const { return damping_rate_; }
  Scalar stiffness() const { return stiffness_; }
  Scalar effective_mass() const { return effective_mass_; }

  Scalar angular_frequency() const { return static_cast<Scalar>(constants::two_pi) * frequency_; }
  /// Full width at half maximum of the power line, f / Q = gamma / 2pi (Hz).
  Scalar linewidth() const { return damping_rate_ / static_cast<Scalar>(constants::two_pi); }
  bool lossless() const { return std::isinf(decay_time_); }

  template <typename S>
  friend BasicOscillatorMode<S> derive_mode(S frequency, S decay_time, S effective_mass);

 private:
  Scalar frequency_{};
  Scalar decay_time_{};
  Scalar q_factor_{};
  Scalar damping_rate_{};
  Scalar stiffness_{};
  Scalar effective_mass_{};
};

/// Builds a mode from its frequency (Hz), amplitude decay time (s) and
/// effective mass (kg): Q = pi f tau, gamma = 2 / tau, k = m (2 pi f)^2.
template <typename Scalar>
BasicOscillatorMode<Scalar> derive_mode(Scalar frequency, Scalar decay_time, Scalar effective_mass) {
  if (!(frequency > 0) || !(decay_time > 0) || !(effective_mass > 0) || std::isinf(frequency) ||
      std::isinf(effective_mass)) {
    throw DomainError("derive_mode: frequency, decay_time and effective_mass must be positive");
  }
  BasicOscillatorMode<Scalar> mode;
  mode.frequency_ = frequency;
  mode.decay_time_ = decay_time;
  mode.effective_mass_ = effective_mass;
  const Scalar omega = static_cast<Scalar>(constants::two_pi) * frequency;
  mode.stiffness_ = effective_mass * omega * omega;
  if (std::isinf(decay_time)) {
    mode.q_factor_ = std::numeric_limits<Scalar>::infinity();
    mode.damping_rate_ = 0;
  } else {
    mode.q_factor_ = static_cast<Scalar>(constants::pi) * frequency * decay_time;
    mode.damping_rate_ = 2 / decay_time;
  }
  return mode;
}

/// Frequency (Hz) of a mass on a spring, sqrt(k/m) / 2pi.
template <typename Scalar>
Scalar frequency_from_stiffness(Scalar stiffness, Scalar mass) {
  return std::sqrt(stiffness / mass) / static_cast<Scalar>(constants::two_pi);
}

using Particle = BasicParticle<double>;
using OscillatorMode = BasicOscillatorMode<double>;

struct ModeEntry {
  double frequency;   // Hz
  double decay_time;  // s
  double q_factor;    // as tabulated; may be truncated

  /// Q implied by pi f tau.
  double computed_q() const { return constants::pi * frequency * decay_time; }
  /// Relative mismatch between the stored and the computed Q.
  double q_mismatch() const { return std::abs(q_factor - computed_q()) / computed_q(); }
};

/// Mode parameters sorted by frequency.
class ModeTable {
 public:
  /// Tolerance on |Q - pi f tau| / (pi f tau) before an entry counts as inconsistent.
  static constexpr double kQTolerance = 0.01;

  ModeTable() = default;
  explicit ModeTable(std::vector<ModeEntry> entries);

  const std::vector<ModeEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  /// Indices of entries whose stored Q deviates from pi f tau by more than kQTolerance.
  std::vector<std::size_t> inconsistent_entries() const;

  /// Entry whose frequency is closest to `frequency`.
  const ModeEntry& nearest(double frequency) const;

  OscillatorMode mode(std::size_t index, double effective_mass) const;

 private:
  std::vector<ModeEntry> entries_;
};

/// Ringdown results of the six observed modes of the levitated particle.
ModeTable measured_mode_table();

}  // namespace levsense
