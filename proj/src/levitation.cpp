#include "levsense/levitation.hpp"

#include <cmath>
#include <string>

namespace levsense {

namespace {

constexpr double kImagePrefactor = 3.0 * constants::mu0 / (32.0 * constants::pi);

}  // namespace

double image_force(double dipole_moment, double height) {
  if (!(height > 0)) throw DomainError("image_force: height must be positive");
  if (!(dipole_moment >= 0)) throw DomainError("image_force: dipole moment must be non-negative");
  const double z2 = height * height;
  return kImagePrefactor * dipole_moment * dipole_moment / (z2 * z2);
}

double image_force_gradient(double dipole_moment, double height) {
  return -4.0 * image_force(dipole_moment, height) / height;
}

double solve_equilibrium_bisection(const std::function<double(double)>& force, double weight,
                                   double lo, double hi, double tolerance) {
  if (!(force(lo) >= weight) || !(force(hi) <= weight)) {
    throw NumericalError("solve_equilibrium_bisection: root not bracketed");
  }
  while (hi - lo > tolerance) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (force(mid) >= weight) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

LevitationSolution solve_levitation(const Particle& particle, const LevitationOptions& options) {
  if (!(particle.total_mass > 0) || particle.magnet_count < 0 || !(particle.magnet_edge >= 0)) {
    throw DomainError("solve_levitation: invalid particle");
  }
  const double moment = particle.dipole_moment();
  const double weight = particle.weight();
  if (!(weight > 0)) {
    throw NumericalError("solve_levitation: no equilibrium, weight vanishes (z0 -> infinity)");
  }
  // F(z) = W  =>  z0 = (C m^2 / W)^(1/4)
  const double z0 = std::pow(kImagePrefactor * moment * moment / weight, 0.25);
  if (!(z0 > 0) || !(z0 <= options.max_height)) {
    throw NumericalError("solve_levitation: no equilibrium below max height " +
                         std::to_string(options.max_height) + " m");
  }
  // k_z = -dF/dz = 4 W / z0, and k = m omega^2
  const double omega_z = std::sqrt(4.0 * constants::g_acc / z0);
  return {.equilibrium_height = z0,
          .z_frequency = omega_z / constants::two_pi,
          .image_force_at_eq = image_force(moment, z0)};
}

}  // namespace levsense
