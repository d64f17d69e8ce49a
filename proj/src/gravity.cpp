#include "levsense/gravity.hpp"

#include <cmath>
#include <string>

#include "levsense/constants.hpp"
#include "levsense/errors.hpp"
#include "levsense/parallel.hpp"

namespace levsense {

namespace {

// Pairwise summation; exact for 2^k equal terms.
double pairwise_mass(const std::vector<PointMass>& pts, std::size_t begin, std::size_t end) {
  if (end - begin == 1) return pts[begin].mass;
  if (end == begin) return 0.0;
  const std::size_t mid = begin + (end - begin) / 2;
  return pairwise_mass(pts, begin, mid) + pairwise_mass(pts, mid, end);
}

struct WheelFrame {
  Eigen::Vector3d normal;
  Eigen::Vector3d e1;  // wheel angle 0
  Eigen::Vector3d e2;
};

WheelFrame wheel_frame(const Wheel& wheel) {
  WheelFrame f;
  f.normal = wheel.plane_normal.normalized();
  Eigen::Vector3d up = Eigen::Vector3d::UnitZ();
  Eigen::Vector3d e1 = up - up.dot(f.normal) * f.normal;
  if (e1.norm() < 1e-9) {
    const Eigen::Vector3d x = Eigen::Vector3d::UnitX();
    e1 = x - x.dot(f.normal) * f.normal;
  }
  f.e1 = e1.normalized();
  f.e2 = f.normal.cross(f.e1);
  return f;
}

double wrap(double angle, double period) {
  double r = std::fmod(angle, period);
  if (r < 0) r += period;
  if (r >= period) r = 0.0;
  return r;
}

}  // namespace

double SourceMassCloud::total_mass() const { return pairwise_mass(points_, 0, points_.size()); }

SourceMassCloud decompose(double body_mass, const CylinderShape& shape, int grid_level) {
  if (!(body_mass >= 0)) throw DomainError("decompose: body mass must be non-negative");
  if (!(shape.radius > 0) || !(shape.height > 0)) {
    throw DomainError("decompose: cylinder radius and height must be positive");
  }
  if (grid_level < 0 || grid_level > 6) throw DomainError("decompose: grid level must be in [0, 6]");

  const int per_axis = 1 << grid_level;
  const double cell_mass = std::ldexp(body_mass, -3 * grid_level);
  const double r2 = shape.radius * shape.radius;
  const double sector = constants::two_pi / per_axis;
  const double slab = shape.height / per_axis;

  std::vector<PointMass> points;
  points.reserve(static_cast<std::size_t>(per_axis) * per_axis * per_axis);
  for (int ring = 0; ring < per_axis; ++ring) {
    const double r_in = std::sqrt(r2 * ring / per_axis);
    const double r_out = std::sqrt(r2 * (ring + 1) / per_axis);
    // Centroid distance of an annular sector of opening `sector`.
    const double radial = 2.0 / 3.0 * (r_out * r_out * r_out - r_in * r_in * r_in) /
                          (r_out * r_out - r_in * r_in);
    const double chord = per_axis == 1 ? 0.0 : std::sin(0.5 * sector) / (0.5 * sector);
    for (int s = 0; s < per_axis; ++s) {
      const double angle = (s + 0.5) * sector;
      const double rc = radial * chord;
      for (int k = 0; k < per_axis; ++k) {
        const double z = -0.5 * shape.height + (k + 0.5) * slab;
        points.push_back({cell_mass, Eigen::Vector3d(rc * std::cos(angle), rc * std::sin(angle), z)});
      }
    }
  }
  return SourceMassCloud(std::move(points));
}

void Wheel::validate() const {
  if (mass_count < 1) throw DomainError("Wheel: mass_count must be >= 1");
  if (!(mass_each > 0)) throw DomainError("Wheel: mass_each must be positive");
  if (!(rim_radius > 0)) throw DomainError("Wheel: rim_radius must be positive");
  if (std::abs(plane_normal.norm() - 1.0) > 1e-9) throw DomainError("Wheel: plane_normal must be unit length");
  if (!(rotation_frequency >= 0)) throw DomainError("Wheel: rotation_frequency must be non-negative");
  if (!hub_position.allFinite() || !std::isfinite(initial_phase)) throw DomainError("Wheel: non-finite geometry");
}

std::vector<Eigen::Vector3d> Wheel::body_centres(double wheel_angle) const {
  const WheelFrame f = wheel_frame(*this);
  std::vector<Eigen::Vector3d> out;
  out.reserve(static_cast<std::size_t>(mass_count));
  for (int k = 0; k < mass_count; ++k) {
    const double a = wheel_angle + constants::two_pi * k / mass_count;
    out.push_back(hub_position + rim_radius * (std::cos(a) * f.e1 + std::sin(a) * f.e2));
  }
  return out;
}

Wheel Wheel::below_particle(double standoff, double rim_radius, const CylinderShape& shape) {
  Wheel w;
  w.rim_radius = rim_radius;
  w.hub_position = Eigen::Vector3d(0.0, 0.0, -(standoff + rim_radius + shape.radius));
  return w;
}

Eigen::Vector3d point_mass_force(const std::vector<PointMass>& sources, double particle_mass) {
  Eigen::Vector3d total = Eigen::Vector3d::Zero();
  for (const auto& p : sources) {
    const double r = p.offset.norm();
    if (r < kGravityGuardRadius) {
      throw DomainError("force_at: source point within " + std::to_string(kGravityGuardRadius) +
                        " m of the particle");
    }
    total += constants::G * p.mass * particle_mass / (r * r * r) * p.offset;
  }
  return total;
}

Eigen::Vector3d force_at(const Wheel& wheel, const SourceMassCloud& cloud, double particle_mass,
                         double wheel_angle) {
  const WheelFrame f = wheel_frame(wheel);
  const double scale = cloud.total_mass() > 0 ? wheel.mass_each / cloud.total_mass() : 0.0;
  Eigen::Vector3d total = Eigen::Vector3d::Zero();
  for (int k = 0; k < wheel.mass_count; ++k) {
    const double a = wheel_angle + constants::two_pi * k / wheel.mass_count;
    const Eigen::Vector3d radial = std::cos(a) * f.e1 + std::sin(a) * f.e2;
    const Eigen::Vector3d tangent = f.normal.cross(radial);
    const Eigen::Vector3d centre = wheel.hub_position + wheel.rim_radius * radial;
    for (const auto& p : cloud.points()) {
      const Eigen::Vector3d r =
          centre + p.offset.x() * radial + p.offset.y() * tangent + p.offset.z() * f.normal;
      const double d = r.norm();
      if (d < kGravityGuardRadius) {
        throw DomainError("force_at: source point within " + std::to_string(kGravityGuardRadius) +
                          " m of the particle");
      }
      total += constants::G * p.mass * scale * particle_mass / (d * d * d) * r;
    }
  }
  return total;
}

DriveComponent drive_component(const Wheel& wheel, const SourceMassCloud& cloud, double particle_mass,
                               double mode_frequency, const DriveOptions& options) {
  wheel.validate();
  if (!(mode_frequency > 0)) throw DomainError("drive_component: mode frequency must be positive");
  const int n = wheel.mass_count;
  if (wheel.rotation_frequency > 0 &&
      std::abs(wheel.rotation_frequency * n - mode_frequency) > 1e-9 * mode_frequency) {
    throw DomainError("drive_component: rotation_frequency must equal mode_frequency / mass_count");
  }

  double last_mean_z = 0.0;
  // Coefficient in the geometric wheel angle; the time-domain coefficient
  // follows from theta(t) = Omega t + initial_phase.
  auto coefficient = [&](int nodes) {
    std::complex<double> acc{0.0, 0.0};
    Eigen::Vector3d mean = Eigen::Vector3d::Zero();
    double mean_z = 0.0;
    for (int j = 0; j < nodes; ++j) {
      const double theta = constants::two_pi * j / nodes;
      const Eigen::Vector3d force = force_at(wheel, cloud, particle_mass, theta);
      acc += force.z() * std::polar(1.0, -n * theta);
      mean += force;
    }
    mean_z = mean.z() / nodes;
    last_mean_z = mean_z;
    return std::pair{acc / static_cast<double>(nodes), mean.norm() / nodes};
  };

  int nodes = options.initial_nodes;
  auto [c, mean_force] = coefficient(nodes);
  while (true) {
    if (2 * nodes > options.max_nodes) {
      throw NumericalError("drive_component: quadrature did not converge within " +
                           std::to_string(options.max_nodes) + " nodes");
    }
    auto [c2, mean2] = coefficient(2 * nodes);
    nodes *= 2;
    const double change = std::abs(2.0 * std::abs(c2) - 2.0 * std::abs(c));
    c = c2;
    mean_force = mean2;
    if (change <= options.relative_tolerance * 2.0 * std::abs(c) + 1e-12 * mean_force) break;
  }

  const std::complex<double> time_coeff = c * std::polar(1.0, n * wheel.initial_phase);
  DriveComponent out;
  out.coefficient = time_coeff;
  out.amplitude = 2.0 * std::abs(c);
  out.phase = wrap(std::arg(time_coeff), constants::two_pi);
  // strongest pull: the harmonic adds to the mean z force
  const std::complex<double> toward = last_mean_z < 0 ? -c : c;
  out.phase_of_max_force = wrap(-std::arg(toward) / n, constants::two_pi / n);
  out.quadrature_nodes = nodes;
  return out;
}

Eigen::Vector3d sweep_direction(SweepAxis axis) {
  return axis == SweepAxis::longitudinal ? Eigen::Vector3d::UnitX() : Eigen::Vector3d(0.0, 0.0, -1.0);
}

SweepResult sweep(const Wheel& wheel, const SourceMassCloud& cloud, double particle_mass,
                  double mode_frequency, SweepAxis axis, const std::vector<double>& positions,
                  const Eigen::Vector3d& systematics, unsigned threads) {
  if (positions.empty()) throw DomainError("sweep: positions must be non-empty");
  const Eigen::Vector3d dir = sweep_direction(axis);
  SweepResult result{axis, std::vector<SweepPoint>(positions.size())};
  parallel_for(positions.size(), threads, [&](std::size_t i) {
    Wheel w = wheel;
    w.hub_position = wheel.hub_position + positions[i] * dir;
    const DriveComponent nominal = drive_component(w, cloud, particle_mass, mode_frequency);
    SweepPoint p{positions[i], nominal.amplitude, nominal.phase, nominal.phase_of_max_force,
                 nominal.amplitude, nominal.amplitude};
    if (!systematics.isZero(0.0)) {
      for (int corner = 0; corner < 8; ++corner) {
        const Eigen::Vector3d sign((corner & 1) ? 1.0 : -1.0, (corner & 2) ? 1.0 : -1.0,
                                   (corner & 4) ? 1.0 : -1.0);
        Wheel shifted = w;
        shifted.hub_position += sign.cwiseProduct(systematics);
        const double a = drive_component(shifted, cloud, particle_mass, mode_frequency).amplitude;
        p.envelope_low = std::min(p.envelope_low, a);
        p.envelope_high = std::max(p.envelope_high, a);
      }
    }
    result.points[i] = p;
  });
  return result;
}

}  // namespace levsense
