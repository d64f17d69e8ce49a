#include "levsense/synth.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "levsense/constants.hpp"
#include "levsense/errors.hpp"

namespace levsense {

namespace {

// Re-synchronise rotating phasors with std::polar every this many steps.
constexpr std::uint64_t kPhasorResync = 1024;

struct GaussLegendre {
  Eigen::VectorXd nodes;    // on [0, 1]
  Eigen::VectorXd weights;  // sum to 1
};

// Golub-Welsch on the Jacobi matrix of the Legendre recurrence.
const GaussLegendre& gauss_legendre16() {
  static const GaussLegendre rule = [] {
    constexpr int n = 16;
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
      const double b = k / std::sqrt(4.0 * k * k - 1.0);
      jacobi(k, k - 1) = b;
      jacobi(k - 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
    GaussLegendre r;
    r.nodes = (es.eigenvalues().array() + 1.0) * 0.5;
    r.weights = es.eigenvectors().row(0).transpose().array().square();
    return r;
  }();
  return rule;
}

// exp(A s) for A = [[0, 1], [-w0^2, -2 alpha]], underdamped.
Eigen::Matrix2d damped_flow(double w0, double alpha, double s) {
  const double wd = std::sqrt(w0 * w0 - alpha * alpha);
  const double c = std::cos(wd * s);
  const double sn = std::sin(wd * s);
  const double decay = std::exp(-alpha * s);
  Eigen::Matrix2d m;
  m << c + alpha / wd * sn, sn / wd, -w0 * w0 * sn / wd, c - alpha / wd * sn;
  return decay * m;
}

}  // namespace

void SimConfig::validate() const {
  if (!(mode.frequency() > 0) || !(mode.effective_mass() > 0)) {
    throw ValidationError("SimConfig: mode is not initialised");
  }
  if (!(noise_temperature >= 0)) throw ValidationError("SimConfig: noise_temperature must be >= 0");
  const double min_rate = 20.0 * mode.frequency();
  if (!(sample_rate > min_rate)) {
    throw ValidationError("SimConfig: sample_rate must exceed 20 x mode frequency = " +
                          std::to_string(min_rate) + " Hz");
  }
  if (!mode.lossless() && !(mode.q_factor() > 0.5)) {
    throw ValidationError("SimConfig: mode must be underdamped (Q > 0.5)");
  }
  for (const auto& d : drives) {
    if (!std::isfinite(d.amplitude) || !(d.frequency >= 0) || !std::isfinite(d.phase)) {
      throw ValidationError("SimConfig: invalid drive");
    }
  }
}

Simulator::Simulator(const SimConfig& config)
    : config_(config), dt_(1.0 / config.sample_rate), noise_(config.seed, 0) {
  config_.validate();
  const auto& mode = config_.mode;
  const double w0 = mode.angular_frequency();
  const double alpha = 0.5 * mode.damping_rate();
  const double m = mode.effective_mass();
  const double h = dt_;

  propagator_ = damped_flow(w0, alpha, h);

  const auto& gl = gauss_legendre16();
  hold_response_.setZero();
  drive_response_.assign(config_.drives.size(), Eigen::Vector2cd::Zero());
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  for (Eigen::Index j = 0; j < gl.nodes.size(); ++j) {
    const double s = gl.nodes(j) * h;
    const double w = gl.weights(j) * h;
    // Response at the end of the step to a unit impulse of force at time s.
    const Eigen::Vector2d kick = damped_flow(w0, alpha, h - s).col(1) / m;
    hold_response_ += w * kick;
    for (std::size_t d = 0; d < config_.drives.size(); ++d) {
      const double omega = constants::two_pi * config_.drives[d].frequency;
      drive_response_[d] += w * std::polar(1.0, omega * s) * kick.cast<std::complex<double>>();
    }
    cov += w * kick * kick.transpose();
  }

  noisy_ = config_.noise_temperature > 0 && mode.damping_rate() > 0;
  noise_factor_.setZero();
  if (noisy_) {
    const double density = 2.0 * m * mode.damping_rate() * constants::k_B * config_.noise_temperature;
    cov *= density;
    Eigen::LLT<Eigen::Matrix2d> llt(cov);
    if (llt.info() != Eigen::Success) throw NumericalError("Simulator: step covariance is not positive definite");
    noise_factor_ = llt.matrixL();
  }

  for (const auto& d : config_.drives) {
    drive_phasor_.push_back(std::polar(d.amplitude, d.phase));
    drive_rotation_.push_back(std::polar(1.0, constants::two_pi * d.frequency * h));
  }

  state_ << config_.initial_displacement, config_.initial_velocity;
  if (config_.thermal_initial_state && config_.noise_temperature > 0) {
    const GaussianStream init(config_.seed, 1);
    const auto n = init.normals(0);
    const double kt = constants::k_B * config_.noise_temperature;
    state_(0) += n[0] * std::sqrt(kt / mode.stiffness());
    state_(1) += n[1] * std::sqrt(kt / m);
  }
}

void Simulator::step() {
  Eigen::Vector2d next = propagator_ * state_;
  for (std::size_t d = 0; d < drive_phasor_.size(); ++d) {
    next += (drive_phasor_[d] * drive_response_[d]).real();
  }
  if (config_.duffing_coefficient != 0.0) {
    const double x = state_(0);
    next -= config_.duffing_coefficient * x * x * x * hold_response_;
  }
  if (noisy_) {
    const auto n = noise_.normals(step_);
    next += noise_factor_ * Eigen::Vector2d(n[0], n[1]);
  }
  if (!next.allFinite()) {
    throw NumericalError("Simulator: state diverged at t = " + std::to_string(time()) +
                         " s; reduce the Duffing amplitude or raise sample_rate above " +
                         std::to_string(2.0 * config_.sample_rate) + " Hz");
  }
  state_ = next;
  ++step_;
  for (std::size_t d = 0; d < drive_phasor_.size(); ++d) {
    if (step_ % kPhasorResync == 0) {
      const auto& drv = config_.drives[d];
      drive_phasor_[d] = std::polar(drv.amplitude, constants::two_pi * drv.frequency * time() + drv.phase);
    } else {
      drive_phasor_[d] *= drive_rotation_[d];
    }
  }
}

RawTrace simulate(const SimConfig& config, double duration) {
  config.validate();
  if (!(duration >= 10.0 / config.mode.frequency())) {
    throw ValidationError("simulate: duration must be at least 10 mode periods");
  }
  const auto n = static_cast<Eigen::Index>(std::llround(duration * config.sample_rate));
  RawTrace out;
  out.sample_rate = config.sample_rate;
  out.units = Units::metres;
  out.samples.resize(n);
  Simulator sim(config);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.samples(i) = sim.position();
    sim.step();
  }
  return out;
}

RawTrace to_squid_volts(const RawTrace& trace, double sensitivity) {
  if (!(sensitivity > 0)) throw DomainError("to_squid_volts: sensitivity must be positive");
  RawTrace out = trace;
  out.samples *= sensitivity;
  out.units = Units::volts;
  out.sensitivity = sensitivity;
  return out;
}

Demodulator::Demodulator(double sample_rate, double start_time, const DemodOptions& options)
    : sample_rate_(sample_rate), start_time_(start_time), options_(options) {
  if (!(sample_rate > 0) || !(options.output_rate > 0)) {
    throw DomainError("demodulate: sample and output rates must be positive");
  }
  if (!(options.center_frequency >= 0) || !(options.center_frequency < 0.5 * sample_rate)) {
    throw DomainError("demodulate: center frequency must lie below the Nyquist frequency");
  }
  const double ratio = sample_rate / options.output_rate;
  decimation_ = static_cast<int>(std::llround(ratio));
  if (decimation_ < 1 || std::abs(ratio - decimation_) > 1e-9 * ratio) {
    throw DomainError("demodulate: output rate must divide the sample rate");
  }
  tau_ = options.time_constant > 0 ? options.time_constant : 0.02 / options.output_rate;
  alpha_ = -std::expm1(-1.0 / (sample_rate * tau_));
  group_delay_ = 4.0 * (1.0 - alpha_) / (alpha_ * sample_rate);
  mixer_step_ = std::polar(1.0, -constants::two_pi * options.center_frequency / sample_rate);
  mixer_ = std::polar(1.0, -constants::two_pi * options.center_frequency * start_time);
}

void Demodulator::push(double sample) {
  if (index_ % kPhasorResync == 0) {
    const double t = start_time_ + static_cast<double>(index_) / sample_rate_;
    mixer_ = std::polar(1.0, -constants::two_pi * options_.center_frequency * t);
  }
  std::complex<double> u = sample * mixer_;
  for (auto& y : stage_) {
    y += alpha_ * (u - y);
    u = y;
  }
  ++index_;
  mixer_ *= mixer_step_;
  if (index_ % static_cast<std::uint64_t>(decimation_) == 0) out_.push_back(stage_[3]);
}

DemodTrace Demodulator::result(Units units) const {
  DemodTrace t;
  t.center_frequency = options_.center_frequency;
  t.output_rate = sample_rate_ / decimation_;
  t.start_time = start_time_ + static_cast<double>(decimation_ - 1) / sample_rate_ - group_delay_;
  t.samples = Eigen::Map<const Eigen::VectorXcd>(out_.data(), static_cast<Eigen::Index>(out_.size()));
  t.units = units;
  t.filter_time_constant = tau_;
  t.transient_samples = static_cast<int>(std::ceil(5.0 * tau_ * t.output_rate));
  return t;
}

std::complex<double> Demodulator::filter_response(double frequency) const {
  const std::complex<double> z = std::polar(1.0, -constants::two_pi * frequency / sample_rate_);
  const std::complex<double> stage = alpha_ / (1.0 - (1.0 - alpha_) * z);
  return stage * stage * stage * stage;
}

DemodTrace demodulate(const RawTrace& trace, const DemodOptions& options) {
  trace.validate();
  Demodulator demod(trace.sample_rate, trace.start_time, options);
  for (Eigen::Index i = 0; i < trace.samples.size(); ++i) demod.push(trace.samples(i));
  return demod.result(trace.units);
}

DemodTrace simulate_lockin(const SimConfig& config, double duration, double sensitivity,
                           const DemodOptions& options) {
  config.validate();
  if (!(duration >= 10.0 / config.mode.frequency())) {
    throw ValidationError("simulate: duration must be at least 10 mode periods");
  }
  if (!(sensitivity >= 0)) throw DomainError("simulate_lockin: sensitivity must be non-negative");
  const double gain = sensitivity > 0 ? sensitivity : 1.0;
  const auto n = static_cast<std::uint64_t>(std::llround(duration * config.sample_rate));
  Simulator sim(config);
  Demodulator demod(config.sample_rate, 0.0, options);
  for (std::uint64_t i = 0; i < n; ++i) {
    demod.push(gain * sim.position());
    sim.step();
  }
  return demod.result(sensitivity > 0 ? Units::volts : Units::metres);
}

Eigen::VectorXd remodulate(const DemodTrace& trace) {
  Eigen::VectorXd out(trace.size());
  for (Eigen::Index i = 0; i < trace.size(); ++i) {
    const double t = trace.time(i);
    out(i) = 2.0 * (trace.samples(i) * std::polar(1.0, constants::two_pi * trace.center_frequency * t)).real();
  }
  return out;
}

}  // namespace levsense
