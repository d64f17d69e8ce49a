#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "levsense/core_model.hpp"
#include "levsense/rng.hpp"
#include "levsense/trace.hpp"

namespace levsense {

/// Sinusoidal force amplitude * cos(2 pi frequency t + phase), t from trace start.
struct Drive {
  double amplitude;  // N
  double frequency;  // Hz
  double phase = 0.0;
};

struct SimConfig {
  OscillatorMode mode;
  double duffing_coefficient = 0.0;  // N/m^3, restoring force -xi x^3
  double noise_temperature = 0.0;    // K
  std::vector<Drive> drives;
  double sample_rate = 640.0;        // Hz
  std::uint64_t seed = 0;
  double initial_displacement = 0.0;  // m
  double initial_velocity = 0.0;      // m/s
  /// Draw the initial state from the Boltzmann distribution at noise_temperature,
  /// added to the deterministic initial state.
  bool thermal_initial_state = false;

  void validate() const;
};

/// Stochastic Duffing oscillator
///   m x'' = -k x - (2 m / tau) x' - xi x^3 + sum F_drive(t) + F_th(t)
/// advanced with the exact discrete propagator of the linear part. Each step
/// applies the closed-form damped rotation, the exact response to every
/// sinusoidal drive over the step, a zero-order hold of the cubic force, and
/// a correlated Gaussian (x, v) increment whose covariance is the exact
/// integral of the white thermal force of two-sided density 2 m gamma k_B T.
/// The noise of step k comes from counter k of a Philox stream keyed by the
/// seed, so trajectories are reproducible bit for bit.
class Simulator {
 public:
  explicit Simulator(const SimConfig& config);

  /// Current displacement (m) and velocity (m/s).
  double position() const { return state_(0); }
  double velocity() const { return state_(1); }
  double time() const { return static_cast<double>(step_) * dt_; }
  std::uint64_t step_index() const { return step_; }

  /// Advances by one sample interval.
  void step();

  const SimConfig& config() const { return config_; }

 private:
  SimConfig config_;
  double dt_;
  Eigen::Matrix2d propagator_;
  Eigen::Vector2d hold_response_;                     // response to a unit constant force
  std::vector<Eigen::Vector2cd> drive_response_;      // response to e^{i Omega s}
  std::vector<std::complex<double>> drive_phasor_;    // F e^{i (Omega t_k + phi)}
  std::vector<std::complex<double>> drive_rotation_;  // e^{i Omega dt}
  Eigen::Matrix2d noise_factor_;                      // Cholesky factor of the step covariance
  bool noisy_;
  GaussianStream noise_;
  Eigen::Vector2d state_;
  std::uint64_t step_ = 0;
};

/// Displacement trace of `duration` seconds; sample 0 is the initial state.
/// Requires duration >= 10 / f0.
RawTrace simulate(const SimConfig& config, double duration);

/// Pointwise conversion from metres to SQUID volts.
RawTrace to_squid_volts(const RawTrace& trace, double sensitivity);

struct DemodOptions {
  double center_frequency;  // Hz
  double output_rate;       // Hz; must divide the input sample rate
  /// Time constant of each of the four low-pass stages; 0 selects 0.02 / output_rate.
  double time_constant = 0.0;
};

/// Streaming lock-in: mixes with e^{-i 2 pi f_c t}, filters with four cascaded
/// one-pole integrators y += a (u - y), a = 1 - exp(-1 / (f_s tau)), and keeps
/// every D-th sample (D = f_s / output rate). Output time stamps are corrected
/// for the DC group delay of the filter cascade, 4 (1 - a) / (a f_s).
class Demodulator {
 public:
  Demodulator(double sample_rate, double start_time, const DemodOptions& options);

  void push(double sample);
  /// Trace of everything pushed so far.
  DemodTrace result(Units units) const;

  double coefficient() const { return alpha_; }
  double time_constant() const { return tau_; }
  double group_delay() const { return group_delay_; }
  int decimation() const { return decimation_; }

  /// Complex gain of the filter cascade at baseband frequency f (Hz).
  std::complex<double> filter_response(double frequency) const;

 private:
  double sample_rate_;
  double start_time_;
  DemodOptions options_;
  double tau_;
  double alpha_;
  double group_delay_;
  int decimation_;
  std::uint64_t index_ = 0;
  std::complex<double> mixer_;
  std::complex<double> mixer_step_;
  std::array<std::complex<double>, 4> stage_{};
  std::vector<std::complex<double>> out_;
};

DemodTrace demodulate(const RawTrace& trace, const DemodOptions& options);

/// Simulates and demodulates in one pass without storing the raw trace.
/// sensitivity > 0 converts to volts first (V/m); 0 keeps metres.
DemodTrace simulate_lockin(const SimConfig& config, double duration, double sensitivity,
                           const DemodOptions& options);

/// Inverse of demodulate for a slowly varying envelope: x(t) = 2 Re(z(t) e^{i 2 pi f_c t})
/// sampled at the envelope time stamps.
Eigen::VectorXd remodulate(const DemodTrace& trace);

}  // namespace levsense
