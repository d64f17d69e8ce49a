#include "levsense/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "levsense/constants.hpp"
#include "levsense/errors.hpp"

namespace levsense {

namespace {

DemodTrace slice(const DemodTrace& trace, Eigen::Index start, Eigen::Index length) {
  DemodTrace out = trace;
  out.samples = trace.samples.segment(start, length);
  out.start_time = trace.time(start);
  out.transient_samples = std::max<int>(0, trace.transient_samples - static_cast<int>(start));
  return out;
}

// Least-squares complex amplitude of exp(-t/tau) exp(i 2 pi f t) in z, and the
// captured power |sum z g*|^2 / sum |g|^2.
struct Projection {
  std::complex<double> coefficient;
  double power;
};

Projection project(const Eigen::VectorXcd& z, double rate, double tau, double freq) {
  std::complex<double> num{0.0, 0.0};
  double den = 0.0;
  const double lambda = std::isfinite(tau) ? 1.0 / tau : 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double t = static_cast<double>(i) / rate;
    const double env = std::exp(-lambda * t);
    const std::complex<double> g = env * std::polar(1.0, constants::two_pi * freq * t);
    num += z(i) * std::conj(g);
    den += env * env;
  }
  if (den == 0.0) return {{0.0, 0.0}, 0.0};
  return {num / den, std::norm(num) / den};
}

double locate_rotation(const Eigen::VectorXcd& z, double rate, double tau) {
  const Eigen::Index n = z.size();
  const double lambda = std::isfinite(tau) ? 1.0 / tau : 0.0;
  const Eigen::Index padded = 8 * n;
  std::vector<std::complex<double>> in(static_cast<std::size_t>(padded), {0.0, 0.0});
  for (Eigen::Index i = 0; i < n; ++i) in[static_cast<std::size_t>(i)] = z(i) * std::exp(-lambda * (static_cast<double>(i) / rate));
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> out;
  fft.fwd(out, in);
  std::size_t best = 0;
  for (std::size_t k = 1; k < out.size(); ++k) {
    if (std::norm(out[k]) > std::norm(out[best])) best = k;
  }
  const double df = rate / static_cast<double>(padded);
  const double coarse =
      (best < out.size() / 2 ? static_cast<double>(best) : static_cast<double>(best) - static_cast<double>(padded)) * df;
  // Golden-section refinement of the captured power within one padded bin.
  double a = coarse - df, b = coarse + df;
  const double invphi = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - invphi * (b - a), d = a + invphi * (b - a);
  double fc = project(z, rate, tau, c).power, fd = project(z, rate, tau, d).power;
  for (int it = 0; it < 80; ++it) {
    if (fc > fd) {
      b = d, d = c, fd = fc;
      c = b - invphi * (b - a);
      fc = project(z, rate, tau, c).power;
    } else {
      a = c, c = d, fc = fd;
      d = a + invphi * (b - a);
      fd = project(z, rate, tau, d).power;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

std::string_view to_string(SpectrumKind kind) {
  switch (kind) {
    case SpectrumKind::displacement:
      return "displacement";
    case SpectrumKind::force:
      return "force";
    case SpectrumKind::raw_volts:
      return "raw-volts";
  }
  return "raw-volts";
}

Eigen::Index Spectrum::bin_of(double frequency) const {
  if (frequencies.size() == 0) throw DomainError("Spectrum::bin_of: empty spectrum");
  const double pos = (frequency - frequencies(0)) / bin_width;
  const auto idx = static_cast<Eigen::Index>(std::llround(pos));
  return std::clamp<Eigen::Index>(idx, 0, frequencies.size() - 1);
}

RingdownSubtraction subtract_ringdown(const DemodTrace& trace, const RingdownOptions& options) {
  trace.validate();
  const Eigen::Index n = trace.size();
  if (n < 100) throw DomainError("subtract_ringdown: need at least 100 samples");

  std::vector<double> times(static_cast<std::size_t>(n)), mags(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    times[static_cast<std::size_t>(i)] = static_cast<double>(i) / trace.output_rate;
    mags[static_cast<std::size_t>(i)] = std::abs(trace.samples(i));
  }

  RingdownSubtraction out;
  out.fit = fit_exponential(times, mags);
  double tau = std::numeric_limits<double>::infinity();
  if (out.fit.decaying) {
    tau = out.fit.decay_time;
  } else if (options.decay_time_hint && *options.decay_time_hint > 0) {
    tau = *options.decay_time_hint;
  }
  out.decay_time_used = tau;

  if (trace.samples.cwiseAbs().maxCoeff() == 0.0) {
    out.residual = trace;
    out.coefficient = {0.0, 0.0};
    out.rotation_frequency = options.rotation_frequency.value_or(0.0);
    return out;
  }

  out.rotation_frequency =
      options.rotation_frequency ? *options.rotation_frequency : locate_rotation(trace.samples, trace.output_rate, tau);
  out.coefficient = project(trace.samples, trace.output_rate, tau, out.rotation_frequency).coefficient;

  out.residual = trace;
  const double lambda = std::isfinite(tau) ? 1.0 / tau : 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / trace.output_rate;
    out.residual.samples(i) -=
        out.coefficient * std::exp(-lambda * t) * std::polar(1.0, constants::two_pi * out.rotation_frequency * t);
  }
  return out;
}

DemodTrace recenter(const DemodTrace& trace, double detuning) {
  if (!(std::abs(detuning) < 0.5 * trace.output_rate)) {
    throw DomainError("recenter: |detuning| must be below half the output rate");
  }
  DemodTrace out = trace;
  if (detuning == 0.0) return out;
  for (Eigen::Index i = 0; i < trace.size(); ++i) {
    out.samples(i) *= std::polar(1.0, -constants::two_pi * detuning * trace.time(i));
  }
  out.center_frequency = trace.center_frequency + detuning;
  return out;
}

DemodTrace crop_integer_cycles(const DemodTrace& trace, double reference_frequency) {
  if (!(reference_frequency > 0)) throw DomainError("crop_integer_cycles: reference frequency must be positive");
  const double samples_per_cycle = trace.output_rate / reference_frequency;
  const double cycles = std::floor(static_cast<double>(trace.size()) / samples_per_cycle + 1e-9);
  if (cycles < 1.0) throw DomainError("crop_integer_cycles: trace spans less than one reference cycle");
  auto length = static_cast<Eigen::Index>(std::llround(cycles * samples_per_cycle));
  length = std::min(length, trace.size());
  return slice(trace, 0, length);
}

DemodTrace end_match(const DemodTrace& trace, Eigen::Index length, std::complex<double>* step) {
  if (length < 2 || length > trace.size()) throw DomainError("end_match: length must be in [2, size]");
  const std::complex<double> z0 = trace.samples(0);
  const std::complex<double> zn =
      length < trace.size()
          ? trace.samples(length)
          : trace.samples(length - 1) + (trace.samples(length - 1) - trace.samples(length - 2));
  const std::complex<double> d = zn - z0;
  DemodTrace out = slice(trace, 0, length);
  for (Eigen::Index i = 0; i < length; ++i) {
    out.samples(i) -= z0 + d * (static_cast<double>(i) / static_cast<double>(length));
  }
  if (step) *step = d;
  return out;
}

Spectrum displacement_spectrum(const DemodTrace& trace, const std::optional<CalibrationResult>& calibration,
                               const SpectrumOptions& options) {
  trace.validate();
  double to_metres = 1.0;
  SpectrumKind kind = SpectrumKind::displacement;
  if (trace.units == Units::volts) {
    const auto& cal = calibration ? calibration : trace.calibration;
    if (!cal || !(cal->voltage_sensitivity > 0)) {
      throw ValidationError("displacement_spectrum: volt trace needs a calibration with positive dV/dx");
    }
    to_metres = 1.0 / cal->voltage_sensitivity;
  } else if (trace.units == Units::dimensionless) {
    kind = SpectrumKind::raw_volts;
  }

  const Eigen::Index n = trace.size();
  std::vector<std::complex<double>> in(static_cast<std::size_t>(n));
  double window_power = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double w = options.hann_window ? 0.5 - 0.5 * std::cos(constants::two_pi * static_cast<double>(i) / static_cast<double>(n))
                                         : 1.0;
    window_power += w * w;
    in[static_cast<std::size_t>(i)] = w * to_metres * trace.samples(i);
  }
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> out;
  fft.fwd(out, in);

  Spectrum s;
  s.kind = kind;
  s.bin_width = trace.output_rate / static_cast<double>(n);
  s.frequencies.resize(n);
  s.amplitude_density.resize(n);
  // density = sqrt(2) |Z| / sqrt(f_s sum w^2); for w = 1 this is sqrt(2) |Z| / (N sqrt(b)).
  const double norm = std::sqrt(2.0 / (trace.output_rate * window_power));
  const Eigen::Index neg = n / 2;  // bins [n - neg, n) are negative offsets
  for (Eigen::Index j = 0; j < n; ++j) {
    const Eigen::Index k = (j + n - neg) % n;
    const double offset = static_cast<double>(k < n - neg ? k : k - n) * s.bin_width;
    s.frequencies(j) = trace.center_frequency + offset;
    s.amplitude_density(j) = norm * std::abs(out[static_cast<std::size_t>(k)]);
  }
  s.source_power = 2.0 * (to_metres * trace.samples).squaredNorm() / static_cast<double>(n);
  return s;
}

std::complex<double> mode_transfer(double frequency, const OscillatorMode& mode) {
  const double w0 = mode.angular_frequency();
  const double w = constants::two_pi * frequency;
  return w0 * w0 / std::complex<double>(w0 * w0 - w * w, mode.damping_rate() * w);
}

Spectrum force_spectrum(const Spectrum& displacement, const OscillatorMode& mode) {
  if (displacement.kind != SpectrumKind::displacement) {
    throw DomainError("force_spectrum: input must be a displacement spectrum");
  }
  Spectrum f = displacement;
  f.kind = SpectrumKind::force;
  const double k = mode.stiffness();
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    f.amplitude_density(i) = k * displacement.amplitude_density(i) / std::abs(mode_transfer(f.frequencies(i), mode));
  }
  f.source_power = f.integrated_power();
  return f;
}

double mode_temperature(double x_rms, const OscillatorMode& mode) {
  if (!(x_rms >= 0)) throw DomainError("mode_temperature: x_rms must be non-negative");
  return mode.stiffness() * x_rms * x_rms / constants::k_B;
}

PipelineReport run_pipeline(const DemodTrace& trace, const OscillatorMode& mode,
                            const std::optional<CalibrationResult>& calibration, const PipelineOptions& options) {
  trace.validate();
  if (!(options.band_width > 0)) throw DomainError("run_pipeline: band width must be positive");
  PipelineReport report;

  const Eigen::Index skip = std::clamp<Eigen::Index>(trace.transient_samples, 0, trace.size());
  DemodTrace work = slice(trace, skip, trace.size() - skip);
  if (options.subtract_ringdown) {
    RingdownOptions ro;
    ro.rotation_frequency = options.detuning;
    ro.decay_time_hint = mode.decay_time();
    auto sub = subtract_ringdown(work, ro);
    report.ringdown_fit = sub.fit;
    report.ringdown_coefficient = sub.coefficient;
    work = std::move(sub.residual);
  }
  work = recenter(work, options.detuning);
  report.detuning_applied = options.detuning;

  DemodTrace cropped = crop_integer_cycles(work, options.reference_frequency);
  if (options.end_match) cropped = end_match(work, cropped.size(), &report.end_match_step);
  report.crop_start = skip;
  report.crop_length = cropped.size();
  report.crop_cycles = static_cast<double>(cropped.size()) * options.reference_frequency / cropped.output_rate;

  report.displacement = displacement_spectrum(cropped, calibration, {.hann_window = options.hann_window});
  report.force = force_spectrum(report.displacement, mode);
  report.bin_width = report.force.bin_width;

  const double resonance = cropped.center_frequency;
  report.drive_frequency = resonance + options.reference_frequency;
  const Eigen::Index drive_bin = report.force.bin_of(report.drive_frequency);
  const Eigen::Index res_bin = report.force.bin_of(resonance);
  report.displacement_density_at_drive = report.displacement.amplitude_density(drive_bin);
  report.force_density_at_drive = report.force.amplitude_density(drive_bin);

  double band_force = 0.0, band_disp = 0.0, floor_acc = 0.0;
  int floor_bins = 0;
  for (Eigen::Index i = 0; i < report.force.size(); ++i) {
    if (std::abs(report.force.frequencies(i) - resonance) > 0.5 * options.band_width) continue;
    const double f2 = report.force.amplitude_density(i) * report.force.amplitude_density(i);
    band_force += f2;
    band_disp += report.displacement.amplitude_density(i) * report.displacement.amplitude_density(i);
    if (std::abs(i - drive_bin) > 1 && std::abs(i - res_bin) > 1) {
      floor_acc += f2;
      ++floor_bins;
    }
  }
  report.integrated_force = std::sqrt(2.0 * band_force * report.bin_width);
  report.band_x_rms = std::sqrt(band_disp * report.bin_width);
  if (floor_bins > 0) {
    report.force_noise_floor = std::sqrt(floor_acc / floor_bins);
    const double gamma = mode.damping_rate();
    report.floor_x_rms = gamma > 0 ? report.force_noise_floor /
                                         std::sqrt(4.0 * mode.effective_mass() * gamma * mode.stiffness())
                                   : 0.0;
    report.mode_temperature = mode_temperature(report.floor_x_rms, mode);
  }
  return report;
}

}  // namespace levsense
