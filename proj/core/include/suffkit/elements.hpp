#pragma once

#include "suffkit/types.hpp"

namespace suffkit {

struct CartesianState {
  Vec3 r = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  double m = 0.0;

  Vec7 ToVector() const;
  static CartesianState FromVector(const Vec7& x);
};

// Modified equinoctial elements plus mass. `l` is the unwrapped true longitude.
struct Meoe {
  double P = 0.0;
  double ex = 0.0;
  double ey = 0.0;
  double hx = 0.0;
  double hy = 0.0;
  double l = 0.0;
  double m = 0.0;

  Vec7 ToVector() const;
  static Meoe FromVector(const Vec7& x);

  double Radius() const;
};

// Throws Error(kUnsupportedOrbit) for P <= 0 or e >= 1.
CartesianState MeoeToCartesian(const Meoe& e, double mu = 1.0);

// The returned longitude lies within pi of `l_hint`, so unwrapped winding is kept.
// Throws Error(kUnsupportedOrbit) for non-elliptic states and for retrograde
// equatorial orbits (where the inclination vector is undefined).
Meoe CartesianToMeoe(const CartesianState& x, double l_hint, double mu = 1.0);

Vec7 MeoeToCartesian(const Vec7& meoe, double mu = 1.0);
Vec7 CartesianToMeoe(const Vec7& cartesian, double l_hint, double mu = 1.0);

}  // namespace suffkit
