#pragma once

namespace suffkit {

inline constexpr double kEarthMuKm3PerS2 = 398600.47;
inline constexpr double kGeoSemilatusKm = 42165.0;
inline constexpr double kStandardGravityMPerS2 = 9.8;
inline constexpr double kSecondsPerHour = 3600.0;

// Canonical units: gravitational parameter equals one.
struct ScaleSet {
  double length_km = 0.0;
  double time_s = 0.0;
  double mass_kg = 0.0;
  double mu_km3_s2 = kEarthMuKm3PerS2;

  // Length unit of `length_km`, time unit chosen so that mu = 1.
  static ScaleSet FromLengthAndMass(double length_km, double mass_kg,
                                    double mu_km3_s2 = kEarthMuKm3PerS2);
  // GEO semilatus rectum as length unit, `mass_kg` (typically m0) as mass unit.
  static ScaleSet Geo(double mass_kg);

  double velocity_km_s() const { return length_km / time_s; }
  double velocity_m_s() const { return 1e3 * velocity_km_s(); }
  double acceleration_m_s2() const { return 1e3 * length_km / (time_s * time_s); }
  double force_n() const { return mass_kg * acceleration_m_s2(); }
  double mu() const;

  // Throws Error(kConfig) when a unit is not strictly positive.
  void Validate() const;
};

// Canonical engine parameters.
struct EngineSpec {
  double u_max = 0.0;  // maximum thrust, canonical force
  double beta = 0.0;   // mass flow per unit thrust, canonical time / length
  double m_c = 0.0;    // dry mass, canonical mass

  static EngineSpec FromPhysical(double thrust_n, double isp_s, double dry_mass_kg,
                                 const ScaleSet& scale,
                                 double g0_m_s2 = kStandardGravityMPerS2);

  double mass_flow() const { return beta * u_max; }
  void Validate() const;
};

}  // namespace suffkit
