#include <gtest/gtest.h>

#include "levsense/errors.hpp"
#include "levsense/suspension.hpp"

using namespace levsense;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST(Transmissibility, Limits) {
  Suspension s{0.5, 2.7, 1e6};
  const double ws = 2 * M_PI * 2.7;
  const auto at_res = platform_transmissibility(2.7, s);
  EXPECT_NEAR(std::arg(at_res), -M_PI / 2, 1e-9);
  EXPECT_NEAR(std::abs(at_res) / (1e6 / (ws * ws)), 1.0, 1e-9);
  const auto low = platform_transmissibility(1e-6, s);
  EXPECT_NEAR(std::arg(low), 0.0, 1e-9);
  EXPECT_NEAR(std::abs(low) * ws * ws, 1.0, 1e-9);
}

TEST(Transmissibility, HalfTurnAboveResonance) {
  for (double q : {10.0, 100.0, 1e6}) {
    Suspension s{0.5, 2.7, q};
    const double phase = std::abs(std::arg(platform_transmissibility(27.0, s)));
    EXPECT_LT(std::abs(phase - M_PI), M_PI / 180.0) << q;
    // pi - (10/99)/Q to first order
    if (q >= 100) EXPECT_NEAR(M_PI - phase, 10.0 / 99.0 / q, 1e-3 / q);
  }
}

TEST(EffectiveDrive, Examples) {
  Suspension lossless{0.5, 2.7, kInf};
  EXPECT_NEAR(effective_drive(1.0, 1.0, 27.0, lossless).residual_factor, -1.0 / 99.0, 1e-15);
  EXPECT_DOUBLE_EQ(effective_drive(2.0, 0.0, 27.0, lossless).residual_factor, 1.0);
  Suspension soft{0.5, 1e-9, kInf};
  EXPECT_NEAR(effective_drive(1.0, 1.0, 27.0, soft).residual_factor, 0.0, 1e-15);
  EXPECT_THROW(effective_drive(1.0, 1.0, 2.7, lossless), NumericalError);
}

TEST(EffectiveDrive, ResidualToOneAsCouplingVanishes) {
  Suspension lossless{0.5, 2.7, kInf};
  double prev = -1.0;
  for (double c : {1.0, 0.1, 1e-2, 1e-4, 1e-8}) {
    const double r = effective_drive(1.0, c, 27.0, lossless).residual_factor;
    EXPECT_GT(r, prev);
    prev = r;
  }
  EXPECT_NEAR(prev, 1.0 - 1e-8 * 100.0 / 99.0, 1e-15);
}

TEST(EffectiveDrive, CorrectionNegativeAboveResonance) {
  Suspension lossless{0.5, 2.7, kInf};
  for (double f : {3.0, 5.0, 27.0, 100.0}) {
    EXPECT_LT(effective_drive(1.0, 0.3, f, lossless).residual_factor - 1.0, 0.0) << f;
  }
}

TEST(EffectiveDrive, CouplingForResidual) {
  Suspension lossless{0.5, 2.7, kInf};
  const double c = coupling_for_residual(0.35, 26.7, 2.7);
  EXPECT_NEAR(effective_drive(1.0, c, 26.7, lossless).residual_factor, 0.35, 1e-12);
}

TEST(EffectiveDrive, ContinuousAwayFromResonance) {
  Suspension s{0.5, 2.7, 10.0};
  double prev = effective_drive(1.0, 0.5, 5.0, s).residual_factor;
  for (double f = 5.01; f < 30.0; f += 0.01) {
    const double r = effective_drive(1.0, 0.5, f, s).residual_factor;
    EXPECT_LT(std::abs(r - prev), 0.01);
    prev = r;
  }
}
