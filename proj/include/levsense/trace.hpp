#pragma once

#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "levsense/calibration.hpp"

namespace levsense {

enum class Units { volts, metres, dimensionless };

std::string_view to_string(Units units);
/// Accepts "V", "m" and "dimensionless"; throws ValidationError otherwise.
Units units_from_string(std::string_view text);

/// Real-valued detector timetrace (SQUID volts, or metres before conversion).
struct RawTrace {
  double sample_rate = 0.0;  // Hz
  double start_time = 0.0;   // s
  Eigen::VectorXd samples;
  Units units = Units::metres;
  /// V/m used to convert from metres, when converted.
  std::optional<double> sensitivity;

  Eigen::Index size() const { return samples.size(); }
  double time(Eigen::Index i) const { return start_time + static_cast<double>(i) / sample_rate; }
  void validate() const;
};

/// Lock-in output: complex envelope I + iQ around center_frequency.
struct DemodTrace {
  double center_frequency = 0.0;  // Hz
  double output_rate = 0.0;       // Hz
  double start_time = 0.0;        // s
  Eigen::VectorXcd samples;
  Units units = Units::volts;
  std::optional<CalibrationResult> calibration;
  /// Leading samples still inside the low-pass settling time (5 time constants).
  int transient_samples = 0;
  double filter_time_constant = 0.0;  // s; 0 when unknown

  Eigen::Index size() const { return samples.size(); }
  double time(Eigen::Index i) const { return start_time + static_cast<double>(i) / output_rate; }
  double duration() const { return static_cast<double>(samples.size()) / output_rate; }
  void validate() const;
};

}  // namespace levsense
