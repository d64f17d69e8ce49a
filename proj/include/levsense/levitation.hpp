#pragma once

#include <functional>

#include "levsense/core_model.hpp"

namespace levsense {

struct LevitationSolution {
  double equilibrium_height;  // m, dipole centre above the superconducting plane
  double z_frequency;         // Hz
  double image_force_at_eq;   // N
};

/// Repulsive force (N, positive upward) on a horizontal point dipole at
/// height z above an infinite superconducting plane:
/// F = 3 mu0 m^2 / (32 pi z^4).
double image_force(double dipole_moment, double height);

/// d(image_force)/dz = -4 F / z.
double image_force_gradient(double dipole_moment, double height);

struct LevitationOptions {
  double max_height = 0.1;             // m; no equilibrium above this counts as failure
  double bisection_tolerance = 1e-12;  // m
};

/// Equilibrium of image_force against gravity and the linearized z-mode
/// frequency sqrt(4 g / z0) / 2pi. Throws NumericalError when the equilibrium
/// lies above options.max_height.
LevitationSolution solve_levitation(const Particle& particle, const LevitationOptions& options = {});

/// Root of force(z) = weight for a force that decreases monotonically in z,
/// by bisection on [lo, hi].
double solve_equilibrium_bisection(const std::function<double(double)>& force, double weight,
                                   double lo, double hi, double tolerance);

}  // namespace levsense
