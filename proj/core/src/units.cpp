#include "suffkit/units.hpp"

#include <cmath>
#include <string>

#include "suffkit/errors.hpp"
#include "suffkit/types.hpp"

namespace suffkit {

std::string_view ToString(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kSingularity: return "singularity";
    case ErrorKind::kFuelExhausted: return "fuel_exhausted";
    case ErrorKind::kUnsupportedOrbit: return "unsupported_orbit";
    case ErrorKind::kBranchAmbiguity: return "branch_ambiguity";
    case ErrorKind::kRegularityViolation: return "regularity_violation";
    case ErrorKind::kSingularArc: return "singular_arc";
    case ErrorKind::kStepUnderflow: return "step_underflow";
    case ErrorKind::kDiverged: return "diverged";
    case ErrorKind::kContinuationStuck: return "continuation_stuck";
    case ErrorKind::kHamiltonianNotRegular: return "hamiltonian_not_regular";
    case ErrorKind::kManifoldDegeneracy: return "manifold_degeneracy";
    case ErrorKind::kPrecondition: return "precondition";
    case ErrorKind::kConfig: return "config";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

const char* ToString(Chart chart) {
  return chart == Chart::kCartesian ? "cartesian" : "meoe";
}

const char* ToString(Branch branch) {
  switch (branch) {
    case Branch::kCoast: return "coast";
    case Branch::kBurn: return "burn";
    case Branch::kInterior: return "interior";
  }
  return "unknown";
}

ScaleSet ScaleSet::FromLengthAndMass(double length_km, double mass_kg, double mu_km3_s2) {
  ScaleSet s;
  s.length_km = length_km;
  s.mass_kg = mass_kg;
  s.mu_km3_s2 = mu_km3_s2;
  s.time_s = std::sqrt(length_km * length_km * length_km / mu_km3_s2);
  s.Validate();
  return s;
}

ScaleSet ScaleSet::Geo(double mass_kg) {
  return FromLengthAndMass(kGeoSemilatusKm, mass_kg);
}

double ScaleSet::mu() const {
  return mu_km3_s2 * time_s * time_s / (length_km * length_km * length_km);
}

void ScaleSet::Validate() const {
  if (!(length_km > 0.0) || !(time_s > 0.0) || !(mass_kg > 0.0) || !(mu_km3_s2 > 0.0)) {
    throw Error(ErrorKind::kConfig, "scale units must be strictly positive");
  }
}

EngineSpec EngineSpec::FromPhysical(double thrust_n, double isp_s, double dry_mass_kg,
                                    const ScaleSet& scale, double g0_m_s2) {
  if (!(isp_s > 0.0) || !(g0_m_s2 > 0.0)) {
    throw Error(ErrorKind::kConfig, "specific impulse and g0 must be positive");
  }
  EngineSpec e;
  e.u_max = thrust_n / scale.force_n();
  // beta [s/m] -> canonical: multiply by the velocity unit.
  e.beta = scale.velocity_m_s() / (isp_s * g0_m_s2);
  e.m_c = dry_mass_kg / scale.mass_kg;
  e.Validate();
  return e;
}

void EngineSpec::Validate() const {
  if (!(u_max > 0.0)) throw Error(ErrorKind::kConfig, "u_max must be positive");
  if (!(beta > 0.0)) throw Error(ErrorKind::kConfig, "beta must be positive");
  if (!(m_c > 0.0)) throw Error(ErrorKind::kConfig, "dry mass must be positive");
}

}  // namespace suffkit
