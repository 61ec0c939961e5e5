#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "slewshape/shaper.hpp"

using namespace slewshape;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDt = 1.0 / 240.0;

double omega_lab() { return std::sqrt(9.81 / 0.5715); }

// Frequency putting the D_L = 0.5 impulses exactly on samples 4 and 8.
double aligned_omega() { return 2.0 * kPi / (3.0 * 8.0 * kDt); }

AccelCommand samples(std::vector<double> v, double dt = kDt) { return {std::move(v), dt, false}; }

}  // namespace

TEST(DesignMumzv, HalfDeflectionGivesSixthAndThirdPeriod) {
  for (double w : {0.5, 1.0, 4.143, 10.0}) {
    const auto s = design_mumzv(w, 0.5);
    ASSERT_EQ(s.impulses.size(), 3u);
    EXPECT_NEAR(w * s.impulses[1].time, kPi / 3.0, 1e-12);
    EXPECT_NEAR(w * s.impulses[2].time, 2.0 * kPi / 3.0, 1e-12);
    EXPECT_DOUBLE_EQ(s.impulses[2].amplitude, 1.0);
  }
}

TEST(DesignMumzv, LabPendulum) {
  const auto s = design_mumzv(omega_lab(), 0.3);
  EXPECT_EQ(s.impulses[0].time, 0.0);
  EXPECT_EQ(s.impulses[0].amplitude, 1.0);
  EXPECT_EQ(s.impulses[1].amplitude, -1.0);
  EXPECT_NEAR(s.impulses[1].time, 0.1471, 5e-5);
  EXPECT_NEAR(s.impulses[2].time, 0.4527, 5e-5);
  EXPECT_DOUBLE_EQ(s.impulses[2].amplitude, 0.6);
  EXPECT_LT(residual_vibration(s, omega_lab()), 1e-12);
}

TEST(DesignMumzv, MatchesRootSearch) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> wd(0.5, 10.0);
  std::uniform_real_distribution<double> dd(0.0, 0.5);
  for (int i = 0; i < 50; ++i) {
    const double w = wd(rng);
    const double d = 0.5 - dd(rng);
    const auto s = design_mumzv(w, d);
    const auto ref = oracle::mumzv_root_search(w, d);
    ASSERT_TRUE(ref.has_value()) << "w=" << w << " D=" << d;
    EXPECT_NEAR(s.impulses[1].time, ref->first, 1e-6);
    EXPECT_NEAR(s.impulses[2].time, ref->second, 1e-6);
  }
}

TEST(DesignMumzv, RejectsBadInputs) {
  EXPECT_THROW(design_mumzv(0.0, 0.3), std::domain_error);
  EXPECT_THROW(design_mumzv(-1.0, 0.3), std::domain_error);
  EXPECT_THROW(design_mumzv(1.0, 0.0), std::domain_error);
  EXPECT_THROW(design_mumzv(1.0, 0.51), std::domain_error);
}

TEST(ResidualVibration, SingleImpulseIsOne) {
  ShaperSpec s{{{0.0, 1.0}}, 2.0, 0.3};
  EXPECT_DOUBLE_EQ(residual_vibration(s, 0.7), 1.0);
  EXPECT_DOUBLE_EQ(residual_vibration(s, 13.0), 1.0);
}

TEST(ResidualVibration, OffDesignDirectSum) {
  const double w = omega_lab();
  const auto s = design_mumzv(w, 0.3);
  const double f = 0.8 * w;
  double re = 0.0;
  double im = 0.0;
  for (const auto& imp : s.impulses) {
    re += imp.amplitude * std::cos(f * imp.time);
    im += imp.amplitude * std::sin(f * imp.time);
  }
  EXPECT_NEAR(residual_vibration(s, f), std::sqrt(re * re + im * im), 1e-15);
  EXPECT_GT(residual_vibration(s, f), 1e-3);
}

TEST(Quantize, GridErrors) {
  EXPECT_THROW(quantize(design_mumzv(400.0, 0.3), kDt), std::invalid_argument);
  const auto taps = quantize(design_mumzv(omega_lab(), 0.3), kDt);
  EXPECT_LT(quantized_residual(taps, kDt, omega_lab()), 1e-3);
}

TEST(Convolve, ImpulseGivesShaperOnAlignedGrid) {
  const auto s = design_mumzv(aligned_omega(), 0.5);
  const auto u = convolve(samples({1.0}), s);
  ASSERT_EQ(u.samples.size(), 9u);
  EXPECT_TRUE(u.shaped);
  for (std::size_t k = 0; k < u.samples.size(); ++k) {
    const double expect = k == 0 ? 1.0 : k == 4 ? -1.0 : k == 8 ? 1.0 : 0.0;
    EXPECT_NEAR(u.samples[k], expect, 1e-12) << k;
  }
}

TEST(Convolve, ImpulseSplitsOffGrid) {
  const double w = omega_lab();
  const auto s = design_mumzv(w, 0.3);
  const auto u = convolve(samples({1.0}), s);
  // Each impulse lands on two neighbouring samples with its full amplitude and
  // its exact time as the weighted centroid.
  for (std::size_t i = 1; i < 3; ++i) {
    const double pos = s.impulses[i].time / kDt;
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const double a = u.samples[lo] + u.samples[lo + 1];
    EXPECT_NEAR(a, s.impulses[i].amplitude, 1e-12);
    EXPECT_NEAR((u.samples[lo] * lo + u.samples[lo + 1] * (lo + 1)) / a, pos, 1e-9);
  }
  EXPECT_NEAR(u.samples[0], 1.0, 1e-15);
}

TEST(Convolve, StepGivesStaircase) {
  const auto s = design_mumzv(omega_lab(), 0.3);
  const std::vector<double> step(400, 1.0);
  const auto u = convolve(samples(step), s);
  const double t2 = s.impulses[1].time;
  const double t3 = s.impulses[2].time;
  for (std::size_t k = 0; k < 400; ++k) {
    const double t = k * kDt;
    if (t < t2 - kDt) EXPECT_NEAR(u.samples[k], 1.0, 1e-12) << k;
    if (t > t2 + kDt && t < t3 - kDt) EXPECT_NEAR(u.samples[k], 0.0, 1e-12) << k;
    if (t > t3 + kDt) EXPECT_NEAR(u.samples[k], 0.6, 1e-12) << k;
  }
}

TEST(Convolve, ZeroInZeroOut) {
  const auto u = convolve(samples(std::vector<double>(50, 0.0)), design_mumzv(omega_lab(), 0.3));
  for (double v : u.samples) EXPECT_EQ(v, 0.0);
  EXPECT_THROW(convolve(samples({}), design_mumzv(omega_lab(), 0.3)), std::invalid_argument);
}

TEST(Convolve, Linearity) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto s = design_mumzv(omega_lab(), 0.3);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> r1(300), r2(300), mix(300);
    const double a = u(rng);
    const double b = u(rng);
    for (std::size_t k = 0; k < 300; ++k) {
      r1[k] = u(rng);
      r2[k] = u(rng);
      mix[k] = a * r1[k] + b * r2[k];
    }
    const auto c1 = convolve(samples(r1), s);
    const auto c2 = convolve(samples(r2), s);
    const auto cm = convolve(samples(mix), s);
    for (std::size_t k = 0; k < cm.samples.size(); ++k) {
      EXPECT_NEAR(cm.samples[k], a * c1.samples[k] + b * c2.samples[k], 1e-12);
    }
  }
}

TEST(Convolve, SustainedReferenceSettlesAtAmplitudeSum) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> dd(0.05, 0.5);
  for (int i = 0; i < 20; ++i) {
    const auto s = design_mumzv(omega_lab(), dd(rng));
    const auto u = convolve(samples(std::vector<double>(300, 1.0)), s);
    EXPECT_NEAR(u.samples[299], 2.0 * s.deflection_ratio, 1e-12);
    EXPECT_NEAR(s.amplitude_sum(), 2.0 * s.deflection_ratio, 1e-15);
  }
}

TEST(IntegrateToVelocity, RampAndClamp) {
  const auto v = integrate_to_velocity(samples(std::vector<double>(480, 1.0)), 1.0, 0.5);
  EXPECT_NEAR(v.samples[60], 0.25, 1e-12);
  EXPECT_NEAR(v.samples[120], 0.5, 1e-12);
  for (std::size_t k = 121; k < 480; ++k) EXPECT_EQ(v.samples[k], 0.5);
}

TEST(IntegrateToVelocity, ZeroInputHoldsInitialRate) {
  const auto v = integrate_to_velocity(samples(std::vector<double>(100, 0.0)), 2.0, 1.0, 0.2);
  for (double x : v.samples) EXPECT_EQ(x, 0.2);
  EXPECT_THROW(integrate_to_velocity(samples({0.0}), 0.0, 1.0), std::invalid_argument);
  EXPECT_THROW(integrate_to_velocity(samples({0.0}), 1.0, 1.0, 1.5), std::invalid_argument);
}

TEST(IntegrateToVelocity, ShapedStepSlopes) {
  const auto s = design_mumzv(omega_lab(), 0.3);
  const auto u = convolve(samples(std::vector<double>(400, 1.0)), s);
  const auto v = integrate_to_velocity(u, 1.0, 1e9);
  const auto lo2 = static_cast<std::size_t>(std::floor(s.impulses[1].time / kDt));
  const auto lo3 = static_cast<std::size_t>(std::floor(s.impulses[2].time / kDt));
  auto slope = [&](std::size_t k) { return (v.samples[k + 1] - v.samples[k]) / kDt; };
  for (std::size_t k = 0; k + 1 < lo2; ++k) EXPECT_NEAR(slope(k), 1.0, 1e-9);
  for (std::size_t k = lo2 + 1; k + 1 < lo3; ++k) EXPECT_NEAR(slope(k), 0.0, 1e-9);
  for (std::size_t k = lo3 + 1; k < 390; ++k) EXPECT_NEAR(slope(k), 0.6, 1e-9);
}

TEST(IntegrateToVelocity, SaturationProperties) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> r(500);
    for (auto& x : r) x = u(rng);
    const double limit = 0.05 + 0.5 * (u(rng) + 1.0);
    const auto v = integrate_to_velocity(samples(r), 3.0, limit);
    bool hit = false;
    for (double x : v.samples) {
      ASSERT_LE(std::abs(x), limit);
      hit = hit || std::abs(x) == limit;
    }
    if (!hit) {
      const auto wide = integrate_to_velocity(samples(r), 3.0, 2.0 * limit);
      EXPECT_EQ(wide.samples, v.samples);
    }
  }
}

TEST(PlanSlewCommand, UnshapedDuration) {
  const double V = 32.51 * kPi / 180.0;
  const double eta = 1000.0;
  const auto v = plan_slew_command(kPi / 2.0, V, eta, std::nullopt, kDt);
  EXPECT_NEAR(v.displacement(), kPi / 2.0, V * kDt);
  EXPECT_NEAR(v.duration(), kPi / 2.0 / V + V / eta, 3.0 * kDt);
  EXPECT_NEAR(kPi / 2.0 / V, 2.77, 0.01);
  for (double x : v.samples) {
    EXPECT_GE(x, 0.0);
    EXPECT_LE(x, V);
  }
  EXPECT_EQ(v.samples.back(), 0.0);
}

TEST(PlanSlewCommand, ShapedCoversTargetWithShaperDelay) {
  const double V = 32.51 * kPi / 180.0;
  const double eta = 10.0;
  const auto s = design_mumzv(omega_lab(), 0.3);
  const auto plain = plan_slew_command(kPi / 2.0, V, eta, std::nullopt, kDt);
  const auto shaped = plan_slew_command(kPi / 2.0, V, eta, s, kDt);
  EXPECT_NEAR(shaped.displacement(), kPi / 2.0, V * kDt);
  // The shaped plan stretches each acceleration pulse to P and adds t_3.
  const double extra = shaped_pulse_width(s, V, eta) + s.duration() - V / eta;
  EXPECT_NEAR(shaped.duration() - plain.duration(), extra, 4.0 * kDt);
  for (double x : shaped.samples) {
    EXPECT_GE(x, 0.0);
    EXPECT_LE(x, V);
  }
  EXPECT_EQ(shaped.samples.back(), 0.0);
}

TEST(PlanSlewCommand, EdgeCases) {
  const auto empty = plan_slew_command(0.0, 0.5, 10.0, std::nullopt, kDt);
  EXPECT_TRUE(empty.samples.empty());
  EXPECT_EQ(empty.duration(), 0.0);
  EXPECT_THROW(plan_slew_command(1e-4, 0.5, 10.0, design_mumzv(omega_lab(), 0.3), kDt), std::invalid_argument);
  EXPECT_THROW(plan_slew_command(-1.0, 0.5, 10.0, std::nullopt, kDt), std::invalid_argument);
}

TEST(Record, RoundTripsNineDigits) {
  const auto s = design_mumzv(omega_lab(), 0.3);
  const std::string text = to_record(s);
  EXPECT_NE(text.find("natural_frequency = 4.14310926"), std::string::npos) << text;
  EXPECT_NE(text.find("A3 = 0.6"), std::string::npos);
  const auto back = parse_record("# golden\n" + text);
  ASSERT_EQ(back.impulses.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_NEAR(back.impulses[i].time, s.impulses[i].time, 1e-9);
    EXPECT_EQ(back.impulses[i].amplitude, s.impulses[i].amplitude);
  }
  EXPECT_EQ(to_record(back), text);
  EXPECT_THROW(parse_record("natural_frequency = 1\n"), std::invalid_argument);
  EXPECT_THROW(parse_record("natural_frequency = x\n"), std::invalid_argument);
}

TEST(RateCommandPipeline, MatchesBatchBitForBit) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> r(600);
  for (auto& x : r) x = u(rng);
  const auto s = design_mumzv(omega_lab(), 0.3);
  const double V = 0.5;
  const auto batch = integrate_to_velocity(convolve(samples(r), s), 10.0, V);
  RateCommandPipeline pipe(s, kDt, 10.0, V);
  for (std::size_t k = 0; k < batch.samples.size(); ++k) {
    const double out = pipe.push(k < r.size() ? r[k] : 0.0);
    ASSERT_EQ(out, batch.samples[k]) << k;
  }
  RateCommandPipeline plain(std::nullopt, kDt, 10.0, V);
  EXPECT_FALSE(plain.shaped());
  const auto unshaped = integrate_to_velocity(samples(r), 10.0, V);
  for (std::size_t k = 0; k < r.size(); ++k) ASSERT_EQ(plain.push(r[k]), unshaped.samples[k]);
}
