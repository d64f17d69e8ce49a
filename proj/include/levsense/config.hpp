#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

#include "levsense/calibration.hpp"
#include "levsense/core_model.hpp"
#include "levsense/gravity.hpp"
#include "levsense/pipeline.hpp"
#include "levsense/suspension.hpp"
#include "levsense/synth.hpp"

namespace levsense {

struct ModeConfig {
  double frequency = 26.7;        // Hz
  double decay_time = 1.09e5;     // s
  double effective_mass = 0.43e-6;  // kg
};

struct CircuitConfig {
  DetectionCircuit circuit;
  /// When set, the forward chain from beta^2 is used; otherwise the chain is
  /// run backwards from voltage_sensitivity.
  std::optional<double> beta_squared;
  double voltage_sensitivity = 0.16e6;  // V/m
  double relative_error = kMeasuredVoltageCalibrationError;
};

struct WheelConfig {
  int mass_count = 3;
  double mass_each = 2.45;     // kg
  double rim_radius = 0.20;    // m
  double standoff = 0.48;      // m, particle to the near surface of the top body
  CylinderShape shape = default_mass_shape();
  int grid_level = 3;
  double initial_phase = 0.0;  // rad
  // half-widths of the systematic box (longitudinal, lateral, vertical), m
  Eigen::Vector3d systematics_longitudinal = Eigen::Vector3d(0.05, 0.03, 0.04);
  Eigen::Vector3d systematics_vertical = Eigen::Vector3d(0.02, 0.02, 0.02);

  Wheel wheel() const;
  const Eigen::Vector3d& systematics(SweepAxis axis) const {
    return axis == SweepAxis::vertical ? systematics_vertical : systematics_longitudinal;
  }
};

struct SimulationConfig {
  double duration = 28800.0;         // s
  double sample_rate = 640.0;        // Hz
  double output_rate = 0.25;         // Hz
  double noise_temperature = 3.0;    // K
  double drive_amplitude = 30e-18;   // N
  double drive_offset = 1.3e-3;      // Hz, drive minus mode frequency
  double drive_phase = 0.0;          // rad
  double lockin_detuning = 0.0;      // Hz, mode minus lock-in frequency
  double duffing = 0.0;              // N/m^3
  std::uint64_t seed = 1;
  bool thermal_initial_state = true;
  double initial_displacement = 0.0;  // m
};

/// Every section of a run, with the reference defaults.
struct PlatformConfig {
  /// Platform centroid relative to the particle (m); the trap platform sits just below.
  Eigen::Vector3d offset = Eigen::Vector3d(0.0, 0.0, -0.03);
};

struct RunConfig {
  Particle particle = reference_particle();
  ModeConfig mode;
  CircuitConfig circuit;
  WheelConfig wheel;
  Suspension suspension;
  PlatformConfig platform;
  SimulationConfig simulation;
  PipelineOptions pipeline;

  OscillatorMode oscillator() const;
  CalibrationResult calibration() const;
  SimConfig sim_config() const;
  DemodOptions demod_options() const;
  void validate() const;
};

/// JSON with one object per section; keys carry unit suffixes (_hz, _s, _kg,
/// _m, ...). Unknown sections or keys are rejected with ValidationError.
RunConfig parse_config(std::string_view json_text);
RunConfig load_config(const std::filesystem::path& path);
nlohmann::ordered_json config_to_json(const RunConfig& config);
/// SHA-256 of the canonical JSON of the parsed config.
std::string config_hash(const RunConfig& config);

}  // namespace levsense
