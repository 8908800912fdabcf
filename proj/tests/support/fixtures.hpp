#pragma once
// Shared problem setups for the tests and the acceptance runner.

#include <cmath>
#include <fstream>
#include <numbers>
#include <string>

#include "suffkit/second_order.hpp"
#include "suffkit/shooting.hpp"
#include "suffkit/units.hpp"

namespace fixtures {

using namespace suffkit;

inline constexpr double kM0Kg = 1500.0;
inline constexpr double kDryKg = 500.0;
inline constexpr double kIspS = 2000.0;

inline ScaleSet Scale() { return ScaleSet::Geo(kM0Kg); }

inline Dynamics MeoeDynamics(double thrust_n) {
  return Dynamics(Chart::kMeoe, EngineSpec::FromPhysical(thrust_n, kIspS, kDryKg, Scale()));
}

inline Dynamics CartesianDynamics(double thrust_n) {
  return Dynamics(Chart::kCartesian,
                  EngineSpec::FromPhysical(thrust_n, kIspS, kDryKg, Scale()));
}

// Initial orbit of both transfer cases, canonical MEOE.
inline Vec7 InitialState() {
  Vec7 x0;
  x0 << 11625.0 / kGeoSemilatusKm, 0.75, 0.0, 0.0612, 0.0, std::numbers::pi, 1.0;
  return x0;
}

inline double Hours(double t) { return t * Scale().time_s / kSecondsPerHour; }
inline double FromHours(double h) { return h * kSecondsPerHour / Scale().time_s; }

// Case A: 10 N, l_f = 18 pi.  Case B: 5 N, l_f = 38 pi.
inline ShootingProblem CaseProblem(char which) {
  const bool a = which == 'A';
  Meoe geo;
  geo.P = 1.0;
  return ShootingProblem{MeoeDynamics(a ? 10.0 : 5.0), InitialState(),
                         MeoeTarget(geo, (a ? 18.0 : 38.0) * std::numbers::pi), FlowOptions{}};
}

// Costate that makes the 10 N transfer start with a burn, cross into a coast
// and burn again within about 12 h, rescaled in p_l so that H(x0, p0) = 0.
inline Vec7 TwoBurnCostate(const Dynamics& dyn, const Vec7& x0) {
  Vec7 p0;
  p0 << 47.95, 16.67, 0.507, -9.25, 0.198, -0.6, -19.76;
  const double ldot = dyn.DriftField(x0)[5];
  for (int i = 0; i < 50; ++i) p0[5] -= dyn.Hamiltonian(x0, p0, 1.0) / ldot;
  return p0;
}

inline constexpr double kTwoBurnTf = 3.15;  // canonical, two switchings

// Free-time extremal of the fixed-endpoint problem ending where the
// constructed two-burn arc ends: phi = 0 and H = 0 hold by construction.
struct ConstructedExtremal {
  Dynamics dynamics;
  Vec7 x0;
  Vec7 p0;
  double tf;
  ExtremalTrajectory trajectory;
};

inline ConstructedExtremal MakeConstructedExtremal(double tf = kTwoBurnTf) {
  Dynamics dyn = MeoeDynamics(10.0);
  const Vec7 x0 = InitialState();
  const Vec7 p0 = TwoBurnCostate(dyn, x0);
  ExtremalTrajectory tr = Propagate(dyn, x0, p0, tf, 1.0);
  return {dyn, x0, p0, tf, std::move(tr)};
}

// Short transfer to the MEOE target reached by the constructed arc (mass
// free), solved by Newton from the constructed costate.
struct ShortTransfer {
  ShootingProblem problem;
  ExtremalSolution solution;
};

inline ShortTransfer SolveShortTransfer() {
  const ConstructedExtremal c = MakeConstructedExtremal();
  const Vec7 xf = c.trajectory.FinalX();
  ShootingProblem problem{c.dynamics, c.x0, MeoeTarget(Meoe::FromVector(xf), xf[5]),
                          FlowOptions{}};
  ShootingUnknowns guess;
  guess.p0 = c.p0;
  guess.tf = c.tf;
  ExtremalSolution sol = SolveShooting(problem, guess, 1.0);
  return {std::move(problem), std::move(sol)};
}

inline std::string ConfigDir() { return SUFFKIT_CONFIG_DIR; }

}  // namespace fixtures
