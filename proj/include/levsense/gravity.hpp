#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace levsense {

struct PointMass {
  double mass;              // kg
  Eigen::Vector3d offset;   // m, from the body's centre of mass
};

/// A rigid body approximated by point masses. Offsets are expressed in the
/// body frame; the cylinder axis of a decomposed cylinder is the local z axis.
class SourceMassCloud {
 public:
  SourceMassCloud() = default;
  explicit SourceMassCloud(std::vector<PointMass> points) : points_(std::move(points)) {}

  const std::vector<PointMass>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  double total_mass() const;

 private:
  std::vector<PointMass> points_;
};

struct CylinderShape {
  double radius;  // m
  double height;  // m
};

/// Brass cylinder of radius 4.2 cm and height 5 cm.
inline CylinderShape default_mass_shape() { return {0.042, 0.05}; }

/// Splits a uniform cylinder into 8^grid_level equal-volume cells (2^L
/// equal-area rings x 2^L sectors x 2^L slabs), each represented by a point
/// of mass body_mass / 8^L at the exact cell centroid. Level 0 is a single
/// point at the centre.
SourceMassCloud decompose(double body_mass, const CylinderShape& shape, int grid_level);

/// Rotating wheel carrying mass_count identical bodies equally spaced on its rim.
/// The wheel lies in the plane orthogonal to plane_normal. Wheel angle 0 puts
/// body 0 at the point of the rim closest to +z (straight up for a vertical wheel).
struct Wheel {
  int mass_count = 3;
  double mass_each = 2.45;          // kg
  double rim_radius = 0.20;         // m
  Eigen::Vector3d plane_normal = Eigen::Vector3d::UnitY();
  double rotation_frequency = 0.0;  // Hz; 0 means "mode_frequency / mass_count"
  /// Hub position relative to the particle: (longitudinal, lateral, vertical), m.
  Eigen::Vector3d hub_position = Eigen::Vector3d(0.0, 0.0, -0.722);
  double initial_phase = 0.0;       // rad

  void validate() const;

  /// World positions of the body centres at wheel angle `wheel_angle`.
  std::vector<Eigen::Vector3d> body_centres(double wheel_angle) const;

  /// Places the hub straight below the particle so that, at wheel angle 0, the
  /// gap between the particle and the near surface of the top body is `standoff`.
  static Wheel below_particle(double standoff, double rim_radius, const CylinderShape& shape);
};

/// Guard radius: source points closer than this to the particle are rejected.
inline constexpr double kGravityGuardRadius = 1e-3;

/// Newtonian attraction on a particle of mass particle_mass at the origin from
/// every body of the wheel at wheel angle (total rotation) `wheel_angle`.
Eigen::Vector3d force_at(const Wheel& wheel, const SourceMassCloud& cloud, double particle_mass,
                         double wheel_angle);

/// Newtonian attraction from a list of world-frame point masses.
Eigen::Vector3d point_mass_force(const std::vector<PointMass>& sources, double particle_mass);

struct DriveComponent {
  /// Amplitude of the z force at n * f_rot (N), F_z(t) ~ amplitude cos(n Omega t + phase).
  double amplitude;
  /// Phase of that harmonic in [0, 2 pi); shifts by n * phi0 when the wheel
  /// starts phi0 further along.
  double phase;
  /// Wheel angle in [0, 2 pi / n) at which the attraction peaks, i.e. where the
  /// harmonic adds to the mean z force.
  double phase_of_max_force;
  /// Complex Fourier coefficient c with F_z(t) ~ 2 Re(c e^{i n Omega t}).
  std::complex<double> coefficient;
  int quadrature_nodes;
};

struct DriveOptions {
  int initial_nodes = 1024;
  int max_nodes = 1 << 20;
  double relative_tolerance = 1e-4;
};

/// Fourier component of F_z at n * f_rot over one rotation, by the periodic
/// trapezoid rule with node doubling until the amplitude changes by less than
/// options.relative_tolerance. mode_frequency fixes f_rot = f / n when the
/// wheel carries rotation_frequency = 0.
DriveComponent drive_component(const Wheel& wheel, const SourceMassCloud& cloud, double particle_mass,
                               double mode_frequency, const DriveOptions& options = {});

enum class SweepAxis { longitudinal, vertical };

struct SweepPoint {
  double displacement;  // m
  double amplitude;     // N
  double phase;         // rad, harmonic phase
  double phase_of_max_force;  // rad, wheel angle
  double envelope_low;  // N
  double envelope_high; // N
};

struct SweepResult {
  SweepAxis axis;
  std::vector<SweepPoint> points;
};

/// Unit displacement direction of the hub for a sweep axis. Vertical sweeps
/// move the wheel downward (away from the particle) for positive displacement.
Eigen::Vector3d sweep_direction(SweepAxis axis);

/// Drive component for each hub displacement along `axis`, with the systematic
/// envelope taken over the nominal point and the 8 corners of the box
/// +-systematics around it. Positions are evaluated independently; the
/// result does not depend on `threads`.
SweepResult sweep(const Wheel& wheel, const SourceMassCloud& cloud, double particle_mass,
                  double mode_frequency, SweepAxis axis, const std::vector<double>& positions,
                  const Eigen::Vector3d& systematics, unsigned threads = 1);

}  // namespace levsense
