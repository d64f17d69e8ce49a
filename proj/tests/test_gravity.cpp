#include <gtest/gtest.h>

#include "levsense/errors.hpp"
#include "levsense/gravity.hpp"

using namespace levsense;

namespace {

constexpr double kParticle = 0.43e-6;
constexpr double kMode = 26.7;

// Least-squares fit of mean + a cos + b sin at harmonic n of F_z sampled on a
// non-power-of-two grid, forces from world-frame point masses.
double projected_amplitude(const Wheel& w, int samples) {
  Eigen::MatrixXd A(samples, 3);
  Eigen::VectorXd y(samples);
  for (int j = 0; j < samples; ++j) {
    const double theta = 2 * M_PI * (j + 0.37) / samples;
    std::vector<PointMass> pts;
    for (const auto& c : w.body_centres(theta)) pts.push_back({w.mass_each, c});
    y(j) = point_mass_force(pts, kParticle).z();
    A(j, 0) = 1.0;
    A(j, 1) = std::cos(w.mass_count * theta);
    A(j, 2) = std::sin(w.mass_count * theta);
  }
  const Eigen::Vector3d c = A.colPivHouseholderQr().solve(y);
  return std::hypot(c(1), c(2));
}

}  // namespace

TEST(Decompose, LevelZeroIsOnePoint) {
  const auto c = decompose(2.45, default_mass_shape(), 0);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c.points()[0].mass, 2.45);
  EXPECT_EQ(c.points()[0].offset.norm(), 0.0);
}

TEST(Decompose, MassConservedExactly) {
  for (int level = 0; level <= 5; ++level) {
    const auto c = decompose(2.45, default_mass_shape(), level);
    EXPECT_EQ(c.size(), std::size_t(1) << (3 * level));
    EXPECT_EQ(c.total_mass(), 2.45) << level;
    Eigen::Vector3d com = Eigen::Vector3d::Zero();
    for (const auto& p : c.points()) com += p.mass * p.offset;
    EXPECT_LT(com.norm(), 1e-15);
  }
  EXPECT_THROW(decompose(2.45, default_mass_shape(), 7), DomainError);
}

TEST(Decompose, ConvergesBetweenLevels) {
  const Wheel w = Wheel::below_particle(0.48, 0.2, default_mass_shape());
  double prev = drive_component(w, decompose(2.45, default_mass_shape(), 2), kParticle, kMode).amplitude;
  for (int level = 3; level <= 4; ++level) {
    const double a = drive_component(w, decompose(2.45, default_mass_shape(), level), kParticle, kMode).amplitude;
    EXPECT_LT(std::abs(a - prev) / a, 1e-3) << level;
    prev = a;
  }
}

TEST(PointForce, SinglePointBelow) {
  const auto f = point_mass_force({{2.45, Eigen::Vector3d(0, 0, -0.48)}}, kParticle);
  EXPECT_NEAR(f.norm(), 6.67430e-11 * 2.45 * kParticle / (0.48 * 0.48), 1e-30);
  EXPECT_NEAR(f.norm(), 3.05e-16, 0.01e-16);
  EXPECT_LT(f.z(), 0.0);
  EXPECT_EQ(f.x(), 0.0);
  EXPECT_EQ(point_mass_force({{0.0, Eigen::Vector3d(0, 0, -0.48)}}, kParticle).norm(), 0.0);
  EXPECT_THROW(point_mass_force({{1.0, Eigen::Vector3d(0, 0, 1e-4)}}, kParticle), DomainError);
}

TEST(PointForce, MirrorSymmetryCancelsLateral) {
  const auto f =
      point_mass_force({{2.45, Eigen::Vector3d(0.3, 0.1, -0.5)}, {2.45, Eigen::Vector3d(-0.3, -0.1, -0.5)}}, kParticle);
  EXPECT_LT(std::abs(f.x()), 1e-15 * f.norm());
  EXPECT_LT(std::abs(f.y()), 1e-15 * f.norm());
}

TEST(ForceAt, InverseSquareScaling) {
  const auto shape = default_mass_shape();
  Wheel w = Wheel::below_particle(0.48, 0.2, shape);
  w.hub_position += Eigen::Vector3d(0.07, -0.02, 0.0);
  const auto cloud = decompose(2.45, shape, 2);
  const double s = 1.7;
  Wheel ws = w;
  ws.rim_radius *= s;
  ws.hub_position *= s;
  const auto cloud_s = decompose(2.45, {shape.radius * s, shape.height * s}, 2);
  for (double a : {0.0, 0.4, 2.1}) {
    const auto f = force_at(w, cloud, kParticle, a);
    const auto fs = force_at(ws, cloud_s, kParticle, a);
    EXPECT_NEAR((fs * s * s - f).norm() / f.norm(), 0.0, 1e-12);
  }
}

TEST(DriveComponent, DefaultGeometryInBand) {
  const auto shape = default_mass_shape();
  const auto cloud = decompose(2.45, shape, 3);
  for (double rim : {0.2}) {
    for (double standoff : {0.45, 0.48, 0.52, 0.56, 0.60}) {
      const double a = drive_component(Wheel::below_particle(standoff, rim, shape), cloud, kParticle, kMode).amplitude;
      EXPECT_GE(a, 1e-17) << rim << " " << standoff;
      EXPECT_LE(a, 3e-17) << rim << " " << standoff;
    }
  }
}

TEST(DriveComponent, MatchesProjectionOracle) {
  const auto shape = default_mass_shape();
  for (double standoff : {0.45, 0.6}) {
    Wheel w = Wheel::below_particle(standoff, 0.2, shape);
    w.hub_position.x() = 0.05;
    const double q = drive_component(w, decompose(2.45, shape, 0), kParticle, kMode).amplitude;
    EXPECT_NEAR(q / projected_amplitude(w, 3001), 1.0, 1e-3);
  }
}

TEST(DriveComponent, PhaseCovariance) {
  const auto shape = default_mass_shape();
  const auto cloud = decompose(2.45, shape, 1);
  Wheel w = Wheel::below_particle(0.48, 0.2, shape);
  w.hub_position.x() = 0.1;
  const auto a = drive_component(w, cloud, kParticle, kMode);
  for (double phi : {0.3, 1.0, 2.5}) {
    w.initial_phase = phi;
    const auto b = drive_component(w, cloud, kParticle, kMode);
    EXPECT_NEAR(b.amplitude, a.amplitude, 1e-12 * a.amplitude);
    const double d = std::remainder(b.phase - a.phase - 3 * phi, 2 * M_PI);
    EXPECT_NEAR(d, 0.0, 1e-9) << phi;
  }
}

TEST(DriveComponent, RingLimitVanishes) {
  const auto shape = default_mass_shape();
  const auto cloud = decompose(1.0, shape, 0);
  double prev = 1.0;
  for (int n : {3, 6, 12, 24}) {
    Wheel w = Wheel::below_particle(0.48, 0.2, shape);
    w.mass_count = n;
    w.mass_each = 7.35 / n;
    const double a = drive_component(w, cloud, kParticle, kMode).amplitude;
    EXPECT_LT(a, prev);
    prev = a;
  }
  EXPECT_LT(prev, 1e-22);
}

TEST(DriveComponent, RejectsMismatchedRotation) {
  Wheel w = Wheel::below_particle(0.48, 0.2, default_mass_shape());
  w.rotation_frequency = 26.7 / 3;
  EXPECT_NO_THROW(drive_component(w, decompose(2.45, default_mass_shape(), 0), kParticle, kMode));
  w.rotation_frequency = 9.0;
  EXPECT_THROW(drive_component(w, decompose(2.45, default_mass_shape(), 0), kParticle, kMode), DomainError);
}

TEST(DriveComponent, MaxForceWhenMassOnTop) {
  const auto w = Wheel::below_particle(0.48, 0.2, default_mass_shape());
  const auto d = drive_component(w, decompose(2.45, default_mass_shape(), 0), kParticle, kMode);
  const double p = std::remainder(d.phase_of_max_force, 2 * M_PI / 3);
  EXPECT_NEAR(p, 0.0, 1e-9);
}

TEST(DriveComponent, InvariantUnderRotationAboutVertical) {
  const auto shape = default_mass_shape();
  const auto cloud = decompose(2.45, shape, 1);
  Wheel w = Wheel::below_particle(0.48, 0.2, shape);
  w.hub_position.x() = 0.08;
  const double a = drive_component(w, cloud, kParticle, kMode).amplitude;
  const Eigen::Matrix3d R = Eigen::AngleAxisd(0.7, Eigen::Vector3d::UnitZ()).toRotationMatrix();
  Wheel r = w;
  r.hub_position = R * w.hub_position;
  r.plane_normal = R * w.plane_normal;
  EXPECT_NEAR(drive_component(r, cloud, kParticle, kMode).amplitude / a, 1.0, 1e-9);
}

TEST(Sweep, ZeroSystematicsCollapseEnvelope) {
  const auto w = Wheel::below_particle(0.48, 0.2, default_mass_shape());
  const auto s = sweep(w, decompose(2.45, default_mass_shape(), 0), kParticle, kMode, SweepAxis::vertical,
                       {0.0, 0.05}, Eigen::Vector3d::Zero());
  for (const auto& p : s.points) {
    EXPECT_EQ(p.envelope_low, p.amplitude);
    EXPECT_EQ(p.envelope_high, p.amplitude);
  }
}

TEST(Sweep, VerticalMonotoneAndEnvelopeBrackets) {
  const auto w = Wheel::below_particle(0.48, 0.2, default_mass_shape());
  std::vector<double> pos;
  for (int i = 0; i <= 15; ++i) pos.push_back(0.02 * i);
  const auto s = sweep(w, decompose(2.45, default_mass_shape(), 1), kParticle, kMode, SweepAxis::vertical, pos,
                       Eigen::Vector3d(0.02, 0.02, 0.02), 2);
  for (std::size_t i = 1; i < s.points.size(); ++i) EXPECT_LT(s.points[i].amplitude, s.points[i - 1].amplitude);
  for (const auto& p : s.points) {
    EXPECT_LE(p.envelope_low, p.amplitude);
    EXPECT_GE(p.envelope_high, p.amplitude);
  }
}

TEST(Sweep, LongitudinalPhaseContinuous) {
  const auto w = Wheel::below_particle(0.48, 0.2, default_mass_shape());
  std::vector<double> pos;
  for (int i = -20; i <= 20; ++i) pos.push_back(0.02 * i);
  const auto s = sweep(w, decompose(2.45, default_mass_shape(), 0), kParticle, kMode, SweepAxis::longitudinal, pos,
                       Eigen::Vector3d::Zero());
  for (std::size_t i = 1; i < s.points.size(); ++i) {
    const double d = std::remainder(s.points[i].phase_of_max_force - s.points[i - 1].phase_of_max_force, 2 * M_PI / 3);
    EXPECT_LT(std::abs(d), M_PI / 8) << pos[i];
  }
}

TEST(Sweep, ThreadCountIndependent) {
  const auto w = Wheel::below_particle(0.48, 0.2, default_mass_shape());
  const auto cloud = decompose(2.45, default_mass_shape(), 0);
  const std::vector<double> pos{-0.1, 0.0, 0.1, 0.2, 0.3};
  const auto a = sweep(w, cloud, kParticle, kMode, SweepAxis::longitudinal, pos, Eigen::Vector3d(0.05, 0.03, 0.04), 1);
  const auto b = sweep(w, cloud, kParticle, kMode, SweepAxis::longitudinal, pos, Eigen::Vector3d(0.05, 0.03, 0.04), 4);
  for (std::size_t i = 0; i < pos.size(); ++i) {
    EXPECT_EQ(a.points[i].amplitude, b.points[i].amplitude);
    EXPECT_EQ(a.points[i].envelope_low, b.points[i].envelope_low);
    EXPECT_EQ(a.points[i].phase, b.points[i].phase);
  }
}
