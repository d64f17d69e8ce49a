#pragma once

#include <optional>
#include <span>
#include <vector>

namespace levsense {

struct ExpFit {
  double amplitude = 0.0;
  /// Amplitude decay time (s). Negative for a growing envelope and +inf for a
  /// flat one; check `decaying`.
  double decay_time = 0.0;
  double amplitude_stderr = 0.0;
  double decay_time_stderr = 0.0;
  double residual_rms = 0.0;
  bool decaying = false;
  bool stderr_available = false;
  int iterations = 0;
};

struct ExpFitOptions {
  int max_iterations = 100;
  double gradient_tolerance = 1e-12;
};

/// Least-squares fit of A exp(-t / tau). Starts from a log-linear fit and
/// refines with damped Gauss-Newton; standard errors come from the inverse
/// curvature scaled by the residual variance. `weights` are per-point
/// multipliers of the squared residuals.
ExpFit fit_exponential(std::span<const double> times, std::span<const double> envelope,
                       std::optional<std::span<const double>> weights = std::nullopt,
                       const ExpFitOptions& options = {});

struct ScaleFit {
  double scale = 0.0;
  double scale_stderr = 0.0;
  /// Orthogonal residuals (y - s x) / sqrt(sigma_y^2 + s^2 sigma_x^2).
  std::vector<double> per_point_residuals;
  double objective = 0.0;
  bool stderr_available = false;
};

/// Errors-in-variables fit of y = s x through the origin. For fixed s the
/// optimal point corrections are closed-form, leaving
///   S(s) = sum (y - s x)^2 / (sigma_y^2 + s^2 sigma_x^2)
/// to minimise in one dimension (scan in atan(s), golden section, then
/// parabolic refinement). The standard error is sqrt(2 / S'' * S / (n - 1)),
/// as in ODRPACK.
ScaleFit fit_scale_odr(std::span<const double> x, std::span<const double> y, std::span<const double> sigma_x,
                       std::span<const double> sigma_y);

/// Value of the profiled ODR objective S(s).
double odr_objective(std::span<const double> x, std::span<const double> y, std::span<const double> sigma_x,
                     std::span<const double> sigma_y, double scale);

}  // namespace levsense
