#include <gtest/gtest.h>

#include <random>

#include "levsense/core_model.hpp"

using namespace levsense;

TEST(DeriveMode, ReferenceMode) {
  const auto m = derive_mode(26.7, 1.09e5, 0.43e-6);
  // pi * 26.7 * 1.09e5
  EXPECT_NEAR(m.q_factor(), 9.14302e6, 1e2);
  EXPECT_NEAR(m.q_factor() / 9.13e6, 1.0, 0.01);
  EXPECT_NEAR(m.linewidth() / 2.92e-6, 1.0, 0.01);
  EXPECT_NEAR(m.stiffness(), 0.43e-6 * std::pow(2 * M_PI * 26.7, 2), 1e-15);
  EXPECT_NEAR(m.stiffness() / 1.21e-2, 1.0, 0.01);
  EXPECT_DOUBLE_EQ(m.damping_rate(), 2.0 / 1.09e5);
  EXPECT_FALSE(m.lossless());
}

TEST(DeriveMode, LowestTableMode) {
  EXPECT_NEAR(derive_mode(15.9, 3.65e4, 0.43e-6).q_factor() / 1.82e6, 1.0, 0.01);
}

TEST(DeriveMode, LosslessSentinel) {
  const auto m = derive_mode(26.7, std::numeric_limits<double>::infinity(), 0.43e-6);
  EXPECT_EQ(m.damping_rate(), 0.0);
  EXPECT_TRUE(std::isinf(m.q_factor()));
  EXPECT_TRUE(m.lossless());
}

TEST(DeriveMode, RejectsBadInput) {
  EXPECT_THROW(derive_mode(0.0, 1.0, 1.0), DomainError);
  EXPECT_THROW(derive_mode(1.0, -1.0, 1.0), DomainError);
  EXPECT_THROW(derive_mode(1.0, 1.0, 0.0), DomainError);
  EXPECT_THROW(derive_mode(std::nan(""), 1.0, 1.0), DomainError);
}

TEST(DeriveMode, RoundTripProperty) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> lf(-1, 3), lt(0, 6), lm(-9, 0);
  for (int i = 0; i < 500; ++i) {
    const double f = std::pow(10.0, lf(rng)), tau = std::pow(10.0, lt(rng)), m = std::pow(10.0, lm(rng));
    const auto mode = derive_mode(f, tau, m);
    EXPECT_NEAR(frequency_from_stiffness(mode.stiffness(), m) / f, 1.0, 1e-12);
    EXPECT_NEAR(2.0 / mode.damping_rate() / tau, 1.0, 1e-12);
    EXPECT_NEAR(mode.q_factor() / (M_PI * f * tau), 1.0, 1e-12);
  }
}

TEST(DeriveMode, FloatInstantiation) {
  const auto m = derive_mode(26.7f, 1.09e5f, 0.43e-6f);
  EXPECT_NEAR(m.q_factor() / static_cast<float>(M_PI * 26.7 * 1.09e5), 1.0f, 1e-5f);
}

TEST(DipoleMoment, Examples) {
  // 1.4 T * 3 (0.25 mm)^3 / mu0
  EXPECT_NEAR(dipole_moment(1.4, 4.6875e-11), 1.4 * 4.6875e-11 / 1.25664e-6, 1e-18);
  EXPECT_NEAR(dipole_moment(1.4, 4.6875e-11), 5.22e-5, 0.01e-5);
  EXPECT_EQ(dipole_moment(0.0, 4.6875e-11), 0.0);
  EXPECT_EQ(dipole_moment(1.4, 0.0), 0.0);
  EXPECT_THROW(dipole_moment(-1.0, 1.0), DomainError);
  EXPECT_DOUBLE_EQ(reference_particle().magnet_volume(), 4.6875e-11);
  EXPECT_DOUBLE_EQ(reference_particle().dipole_moment(), dipole_moment(1.4, 4.6875e-11));
}

TEST(ModeTable, MeasuredTableConsistent) {
  const auto t = measured_mode_table();
  ASSERT_EQ(t.size(), 6u);
  EXPECT_TRUE(t.inconsistent_entries().empty());
  for (const auto& e : t.entries()) EXPECT_LT(e.q_mismatch(), 0.01) << e.frequency;
  for (std::size_t i = 1; i < t.size(); ++i) EXPECT_LT(t.entries()[i - 1].frequency, t.entries()[i].frequency);
}

TEST(ModeTable, FlagsInconsistentAndSorts) {
  ModeTable t({{40.0, 100.0, 2.0 * M_PI * 40.0 * 100.0}, {10.0, 100.0, M_PI * 1000.0}});
  EXPECT_EQ(t.entries()[0].frequency, 10.0);
  ASSERT_EQ(t.inconsistent_entries().size(), 1u);
  EXPECT_EQ(t.inconsistent_entries()[0], 1u);
  EXPECT_EQ(t.nearest(33.0).frequency, 40.0);
  EXPECT_NEAR(t.mode(0, 1e-6).q_factor(), M_PI * 1000.0, 1e-9);
}

TEST(ModeTable, QuotedModeWithinTolerance) {
  // second quoted Q for the same mode
  ModeEntry e{26.7, 1.09e5, 9.06e6};
  EXPECT_LT(e.q_mismatch(), ModeTable::kQTolerance);
}
