#pragma once

#include <complex>
#include <optional>

#include <Eigen/Dense>

#include "levsense/calibration.hpp"
#include "levsense/core_model.hpp"
#include "levsense/estimation.hpp"
#include "levsense/trace.hpp"

namespace levsense {

enum class SpectrumKind { displacement, force, raw_volts };

std::string_view to_string(SpectrumKind kind);

/// One-sided amplitude spectral density of the real signal behind a
/// demodulated trace. A real tone of amplitude A that falls on one bin shows
/// up with density A / sqrt(2 b), so sum(density^2) * b is the mean-square
/// of the real signal (RMS convention).
struct Spectrum {
  Eigen::VectorXd frequencies;        // Hz, absolute, ascending, uniform
  Eigen::VectorXd amplitude_density;  // unit/sqrt(Hz)
  SpectrumKind kind = SpectrumKind::displacement;
  double bin_width = 0.0;             // Hz
  /// Mean-square of the source signal in the spectrum's units, for the Parseval check.
  double source_power = 0.0;

  Eigen::Index size() const { return frequencies.size(); }
  /// sum(density^2) * bin_width.
  double integrated_power() const { return amplitude_density.squaredNorm() * bin_width; }
  /// Index of the bin closest to `frequency`.
  Eigen::Index bin_of(double frequency) const;
};

struct RingdownOptions {
  /// Rotation frequency of the free decay in the trace frame (Hz). When unset
  /// it is located from the peak of the decay-compensated periodogram.
  std::optional<double> rotation_frequency;
  /// Decay time used for the coherent model when the envelope fit does not decay.
  std::optional<double> decay_time_hint;
};

struct RingdownSubtraction {
  DemodTrace residual;
  ExpFit fit;                        // magnitude fit, times relative to the trace start
  std::complex<double> coefficient;  // complex amplitude at the trace start
  double rotation_frequency = 0.0;   // Hz
  double decay_time_used = 0.0;      // s
};

/// Removes the free decay C exp(-t / tau) exp(i 2 pi f_r t). tau comes from an
/// exponential fit to |z|; C is the least-squares complex amplitude given tau
/// and f_r.
RingdownSubtraction subtract_ringdown(const DemodTrace& trace, const RingdownOptions& options = {});

/// Multiplies by exp(-i 2 pi detuning t): content at center + detuning moves to
/// zero offset, and center_frequency advances by `detuning`.
DemodTrace recenter(const DemodTrace& trace, double detuning);

/// Removes the ramp z0 + (zN - z0) n / N from the first N samples, where zN
/// is sample N of `trace` (extrapolated from N - 1 when N == size).
/// Returns the first N samples and the step zN - z0.
DemodTrace end_match(const DemodTrace& trace, Eigen::Index length, std::complex<double>* step = nullptr);

/// Longest prefix spanning an integer number of reference cycles (to within
/// one sample).
DemodTrace crop_integer_cycles(const DemodTrace& trace, double reference_frequency);

struct SpectrumOptions {
  bool hann_window = false;
};

/// Displacement ASD (m/sqrt(Hz)). Volt traces are converted with the trace
/// calibration or the explicit one; metre traces pass through.
Spectrum displacement_spectrum(const DemodTrace& trace, const std::optional<CalibrationResult>& calibration,
                               const SpectrumOptions& options = {});

/// Mechanical susceptibility normalised to the static response,
/// H(f) = w0^2 / (w0^2 - w^2 + i gamma w); |H(0)| = 1, |H(f0)| = Q.
std::complex<double> mode_transfer(double frequency, const OscillatorMode& mode);

/// Force ASD k |x(f)| / |H(f)| (N/sqrt(Hz)).
Spectrum force_spectrum(const Spectrum& displacement, const OscillatorMode& mode);

/// T = k x_rms^2 / k_B.
double mode_temperature(double x_rms, const OscillatorMode& mode);

struct PipelineOptions {
  /// Wheel-signal frequency in the recentred frame (Hz); sets the crop and the drive bin.
  double reference_frequency = 1.3e-3;
  /// Resonance offset from the lock-in center frequency (Hz).
  double detuning = 0.0;
  /// Width of the integration band centred on the resonance (Hz).
  double band_width = 8e-3;
  bool subtract_ringdown = true;
  /// Subtract the line from z[0] to z[N] (N = crop length) so the periodic
  /// extension of a diffusing envelope has no jump; periodic signals only lose DC.
  bool end_match = true;
  bool hann_window = false;
};

struct PipelineReport {
  ExpFit ringdown_fit;
  std::complex<double> ringdown_coefficient;
  double detuning_applied = 0.0;
  Eigen::Index crop_start = 0;
  Eigen::Index crop_length = 0;
  double crop_cycles = 0.0;
  std::complex<double> end_match_step;    // z[N] - z[0] removed by end matching
  double bin_width = 0.0;
  double drive_frequency = 0.0;           // Hz, absolute
  double displacement_density_at_drive = 0.0;
  double force_density_at_drive = 0.0;    // N/sqrt(Hz)
  /// Amplitude-equivalent band force sqrt(2 sum F^2 b) (N); a lone tone of
  /// amplitude F0 in the band reports F0.
  double integrated_force = 0.0;
  /// RMS force density over the band, excluding the drive and resonance bins and their neighbours.
  double force_noise_floor = 0.0;
  /// Thermal-equivalent RMS displacement of the floor, sqrt(S_F / (4 m gamma k)).
  double floor_x_rms = 0.0;
  double mode_temperature = 0.0;          // K, from floor_x_rms
  double band_x_rms = 0.0;                // m, RMS displacement in the band
  Spectrum displacement;
  Spectrum force;
};

/// subtract_ringdown -> recenter -> crop_integer_cycles -> displacement_spectrum
/// -> force_spectrum, then the band integrals. Samples flagged as filter
/// transient are dropped first.
PipelineReport run_pipeline(const DemodTrace& trace, const OscillatorMode& mode,
                            const std::optional<CalibrationResult>& calibration, const PipelineOptions& options);

}  // namespace levsense
