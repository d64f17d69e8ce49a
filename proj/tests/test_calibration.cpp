#include <gtest/gtest.h>

#include <array>

#include "levsense/calibration.hpp"

using namespace levsense;

namespace {
const OscillatorMode kMode = derive_mode(26.7, 1.09e5, 0.43e-6);
}

TEST(Inductance, InductanceBudget) {
  const DetectionCircuit c;
  EXPECT_NEAR(total_inductance(c), 7.92e-7, 1e-20);
  DetectionCircuit one{0.0, 0.0, 4e-7, 0.0};
  EXPECT_DOUBLE_EQ(total_inductance(one), 4e-7);
  DetectionCircuit swapped{c.l_input, c.l_calibration, c.l_pickup, c.l_twisted_pair};
  EXPECT_DOUBLE_EQ(total_inductance(swapped), total_inductance(c));
}

TEST(BetaSquared, Arithmetic) {
  EXPECT_NEAR(beta_squared(9.13, 9.13e6), 1e-6, 1e-18);
  EXPECT_NEAR(beta_squared(9.13, 2 * 9.13e6), 0.5e-6, 1e-18);
}

TEST(QEffective, Examples) {
  EXPECT_NEAR(q_effective(26.7, 1000.0), 8.388e4, 1.0);
  EXPECT_NEAR(q_effective(26.7, 1.09e5), kMode.q_factor(), 1e-6);
  EXPECT_NEAR(q_effective(26.7, 2000.0), 2 * q_effective(26.7, 1000.0), 1e-9);
}

TEST(Chain, InvertsMeasuredVoltageCalibration) {
  const DetectionCircuit c;
  const double flux = flux_sensitivity_from_voltage(c, 0.16e6);
  // 0.16 V/um * L_total / (M * 0.43 V/Phi0)  in Phi0/um
  const double expect = 0.16 * 7.92e-7 / (constants::Phi0 / 0.5e-6 * 0.43);
  EXPECT_NEAR(flux / constants::Phi0 * 1e-6, expect, 1e-9);
  EXPECT_NEAR(flux / constants::Phi0 * 1e-6, 71.3, 0.1);
  EXPECT_NEAR(voltage_sensitivity(c, flux) / 0.16e6, 1.0, 1e-12);
}

TEST(Chain, FluxSensitivityProperties) {
  const DetectionCircuit c;
  EXPECT_EQ(flux_sensitivity(c, kMode, 0.0), 0.0);
  const auto heavy = derive_mode(26.7, 1.09e5, 4 * 0.43e-6);
  EXPECT_NEAR(flux_sensitivity(c, heavy, 1e-6) / flux_sensitivity(c, kMode, 1e-6), 2.0, 1e-12);
  EXPECT_EQ(voltage_sensitivity(c, 0.0), 0.0);
  DetectionCircuit g2 = c;
  g2.squid_gain *= 2;
  EXPECT_NEAR(voltage_sensitivity(g2, 1e-7) / voltage_sensitivity(c, 1e-7), 2.0, 1e-12);
}

TEST(Chain, RoundTrip) {
  const DetectionCircuit c;
  for (double b2 : {1e-8, 2.26e-6, 1e-3}) {
    const double flux = flux_sensitivity(c, kMode, b2);
    EXPECT_NEAR(flux_sensitivity_from_voltage(c, voltage_sensitivity(c, flux)) / flux, 1.0, 1e-12);
    EXPECT_NEAR(beta_squared_from_flux(c, kMode, flux) / b2, 1.0, 1e-12);
  }
  const auto fwd = calibrate(c, kMode, 2.26e-6);
  const auto back = calibrate_from_voltage(c, kMode, fwd.voltage_sensitivity);
  EXPECT_NEAR(back.beta_squared / fwd.beta_squared, 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(back.relative_error, 0.07);
  EXPECT_DOUBLE_EQ(back.beta_squared_relative_error(), 0.14);
}

TEST(ZeroPoint, Examples) {
  const double x = zero_point_motion(0.43e-6, 26.7);
  EXPECT_NEAR(x, std::sqrt(1.05457e-34 / (2 * 0.43e-6 * 2 * M_PI * 26.7)), 1e-27);
  EXPECT_NEAR(x / 0.86e-15, 1.0, 0.02);
  EXPECT_NEAR(zero_point_motion(4 * 0.43e-6, 26.7) / x, 0.5, 1e-12);
  EXPECT_EQ(zero_point_motion(0.43e-6, 26.7, 0.0), 0.0);
}

TEST(ZeroPoint, FluxAndCoupling) {
  const double flux = 71.3e6 * constants::Phi0;  // Wb/m
  const auto zp = zero_point_flux_and_g0(flux, 0.855e-15, 1e9);
  EXPECT_NEAR(zp.flux_phi0, 71.3e6 * 0.855e-15, 1e-18);
  EXPECT_NEAR(zp.flux_phi0, 61e-9, 0.1e-9);
  EXPECT_NEAR(zp.g0, 61.0, 0.1);
  EXPECT_EQ(zero_point_flux_and_g0(flux, 0.855e-15, 0.0).g0, 0.0);
  EXPECT_NEAR(zero_point_flux_and_g0(flux, 2 * 0.855e-15, 1e9).flux_phi0 / zp.flux_phi0, 2.0, 1e-12);
}

TEST(ErrorPropagation, Quadrature) {
  const std::array<PowerTerm, 2> terms{{{1.0, 0.03}, {0.5, 0.08}}};
  EXPECT_NEAR(propagate_relative_error(terms), std::hypot(0.03, 0.04), 1e-15);
}
