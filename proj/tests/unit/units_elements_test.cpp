#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "suffkit/elements.hpp"
#include "suffkit/errors.hpp"
#include "suffkit/units.hpp"

namespace {

using namespace suffkit;
constexpr double kPi = std::numbers::pi;

TEST(Units, CanonicalMuIsOne) {
  const ScaleSet s = ScaleSet::Geo(1500.0);
  EXPECT_NEAR(s.mu(), 1.0, 1e-14);
  // sqrt(L^3 / mu) computed by hand
  EXPECT_NEAR(s.time_s, std::sqrt(std::pow(42165.0, 3) / 398600.47), 1e-9);
  EXPECT_NEAR(s.time_s, 13713.8, 0.1);
  EXPECT_DOUBLE_EQ(s.mass_kg, 1500.0);
}

TEST(Units, RejectsNonPositiveUnits) {
  EXPECT_THROW(ScaleSet::FromLengthAndMass(0.0, 1.0), Error);
  EXPECT_THROW(ScaleSet::FromLengthAndMass(1.0, -1.0), Error);
  EXPECT_THROW(EngineSpec::FromPhysical(10.0, 0.0, 500.0, ScaleSet::Geo(1500.0)), Error);
}

TEST(Units, EngineConversionMatchesPhysicalRates) {
  const ScaleSet s = ScaleSet::Geo(1500.0);
  const EngineSpec e = EngineSpec::FromPhysical(10.0, 2000.0, 500.0, s);
  // beta = 1/(Isp g0) = 5.1e-5 s/m
  EXPECT_NEAR(1.0 / (2000.0 * 9.8), 5.1e-5, 0.01e-5);
  // canonical acceleration at m = 1 back to SI: 10/1500 m/s^2
  EXPECT_NEAR(e.u_max * s.acceleration_m_s2(), 10.0 / 1500.0, 1e-15);
  // mass flow back to kg/s: 10 N / (2000 s * 9.8 m/s^2) = 5.1e-4 kg/s
  const double mdot_kg_s = e.mass_flow() * s.mass_kg / s.time_s;
  EXPECT_NEAR(mdot_kg_s, 10.0 / (2000.0 * 9.8), 1e-15);
  EXPECT_NEAR(mdot_kg_s, 5.1e-4, 0.01e-4);
  EXPECT_NEAR(e.m_c, 1.0 / 3.0, 1e-15);
}

TEST(Elements, InitialOrbitPerigeeRadius) {
  Meoe e;
  e.P = 11625.0;
  e.ex = 0.75;
  e.hx = 0.0612;
  e.l = 0.0;
  e.m = 1.0;
  const CartesianState c = MeoeToCartesian(e, kEarthMuKm3PerS2);
  EXPECT_NEAR(c.r.norm(), 11625.0 / 1.75, 1e-9);
  EXPECT_NEAR(c.r.norm(), 6642.857, 1e-3);
  EXPECT_NEAR(e.Radius(), 6642.857142857143, 1e-9);
}

TEST(Elements, CircularEquatorial) {
  Meoe e;
  e.P = 1.0;
  e.l = kPi / 2;
  e.m = 1.0;
  const CartesianState c = MeoeToCartesian(e);
  EXPECT_NEAR((c.r - Vec3(0, 1, 0)).norm(), 0.0, 1e-15);
  EXPECT_NEAR((c.v - Vec3(-1, 0, 0)).norm(), 0.0, 1e-15);
}

TEST(Elements, MatchesIndependentConversion) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    Meoe e;
    e.P = 0.3 + std::abs(u(rng));
    e.ex = 0.6 * u(rng);
    e.ey = 0.6 * u(rng);
    e.hx = 0.8 * u(rng);
    e.hy = 0.8 * u(rng);
    e.l = 40.0 * u(rng);
    e.m = 1.0;
    const CartesianState c = MeoeToCartesian(e);
    const auto y = oracle::MeoeToCartesian(e.P, e.ex, e.ey, e.hx, e.hy, e.l, 1.0);
    EXPECT_LT((c.r - y.head<3>()).norm(), 1e-13);
    EXPECT_LT((c.v - y.tail<3>()).norm(), 1e-13);
  }
}

TEST(Elements, RoundTripThousandStates) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    Vec7 m;
    const double e = 0.95 * std::abs(u(rng));
    const double w = kPi * u(rng);
    m << 0.2 + 2.0 * std::abs(u(rng)), e * std::cos(w), e * std::sin(w), 1.5 * u(rng),
        1.5 * u(rng), 60.0 * u(rng), 0.5 + std::abs(u(rng));
    const Vec7 back = CartesianToMeoe(MeoeToCartesian(m), m[5]);
    worst = std::max(worst, ((back - m).array().abs() / m.array().abs().max(1.0)).maxCoeff());
  }
  EXPECT_LT(worst, 1e-10);
}

TEST(Elements, UnwrappedLongitudeFollowsHint) {
  Vec7 m;
  m << 1.0, 0.1, 0.0, 0.0, 0.0, 18.0 * kPi + 0.1, 1.0;
  const Vec7 back = CartesianToMeoe(MeoeToCartesian(m), 18.0 * kPi);
  EXPECT_NEAR(back[5], m[5], 1e-12);
  const Vec7 low = CartesianToMeoe(MeoeToCartesian(m), 0.0);
  EXPECT_NEAR(low[5], 0.1, 1e-12);
}

TEST(Elements, RejectsHyperbolicAndParabolic) {
  CartesianState c;
  c.r = Vec3(1, 0, 0);
  c.m = 1.0;
  c.v = Vec3(0, 1.5, 0);  // above escape speed sqrt(2)
  try {
    CartesianToMeoe(c, 0.0);
    FAIL() << "hyperbolic state accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kUnsupportedOrbit);
  }
  c.v = Vec3(0, std::sqrt(2.0), 0);
  EXPECT_THROW(CartesianToMeoe(c, 0.0), Error);
  Meoe e;
  e.P = 1.0;
  e.ex = 1.2;
  e.m = 1.0;
  EXPECT_THROW(MeoeToCartesian(e), Error);
}

}  // namespace
