#pragma once

#include "suffkit/elements.hpp"
#include "suffkit/types.hpp"
#include "suffkit/units.hpp"

namespace suffkit {

using Vec14 = Eigen::Matrix<double, 14, 1>;
using RowVec14 = Eigen::Matrix<double, 1, 14>;

struct ControlSample {
  double rho = 0.0;
  Vec3 omega = Vec3::UnitX();
  // Set when the primer vector vanishes; omega is then an arbitrary fixed direction.
  bool degenerate_primer = false;
};

// First and second partials of the maximized Hamiltonian with the control
// branch frozen. Naming follows the variational equations:
//   d/dt dx/dq  = H_px X + H_pp P
//   d/dt dp'/dq = -H_xx X - H_xp P
// where H_px(i, j) = d^2 H / dp_i dx_j and H_xp = H_px^T.
struct HamiltonianDerivatives {
  RowVec7 H_x = RowVec7::Zero();
  Vec7 H_p = Vec7::Zero();
  Mat7 H_xx = Mat7::Zero();
  Mat7 H_xp = Mat7::Zero();
  Mat7 H_px = Mat7::Zero();
  Mat7 H_pp = Mat7::Zero();
};

// Two-body Cartesian drift field (mu = 1): (v, -r/|r|^3, 0).
// Throws Error(kSingularity) when |r| < radius_floor.
Vec7 EvalF0(const CartesianState& x, double radius_floor = 1e-6);

// Cartesian control field (0, u_max/m omega, -beta u_max).
// Throws Error(kFuelExhausted) when m < m_c.
Vec7 EvalF1(const CartesianState& x, const Vec3& omega, const EngineSpec& engine);

// Maximized Hamiltonian system of the fuel-optimal transfer with the
// quadratic-to-L1 smoothing
//   running cost  lambda rho + (1 - lambda) rho^2,
// expressed in either chart. Canonical units (mu = 1), normal extremals (p0 = -1).
//
// With S = (u_max/m)|B(x)^T p| - beta u_max p_m the switching function is
// H1 = S - 1, and the throttle maximizing the pseudo-Hamiltonian is
//   rho = clamp((S - lambda) / (2 (1 - lambda)), 0, 1),  lambda < 1,
//   rho = 1 if H1 > 0, 0 if H1 < 0,                      lambda = 1.
class Dynamics {
 public:
  Dynamics(Chart chart, const EngineSpec& engine, double radius_floor = 1e-3);

  Chart chart() const { return chart_; }
  const EngineSpec& engine() const { return engine_; }
  double radius_floor() const { return radius_floor_; }

  double Radius(const Vec7& x) const;
  // Throws on collision (radius floor) or fuel exhaustion (m < m_c).
  void CheckAdmissible(const Vec7& x) const;

  Vec7 DriftField(const Vec7& x) const;
  Vec7 ControlField(const Vec7& x, const Vec3& omega) const;
  // Control-influence matrix B(x): d(first six states)/dt = f0 + rho u_max/m B omega.
  Mat63 ControlMatrix(const Vec7& x) const;
  // B(x)^T p, the primer vector in the chart's thrust frame.
  Vec3 Primer(const Vec7& x, const Vec7& p) const;

  // S(x, p) = p f1(x, omega(x, p)).
  double ThrustGain(const Vec7& x, const Vec7& p) const;
  double SwitchingFunction(const Vec7& x, const Vec7& p) const;
  // dH1/dt along the flow, as the Poisson bracket {H1, H0}.
  double SwitchingFunctionDot(const Vec7& x, const Vec7& p) const;
  // (dH1/dx, dH1/dp).
  RowVec14 SwitchingGradient(const Vec7& x, const Vec7& p) const;

  ControlSample Control(const Vec7& x, const Vec7& p, double lambda) const;
  static double Throttle(double thrust_gain, double lambda);
  static Branch BranchFor(double thrust_gain, double lambda);
  Branch ActiveBranch(const Vec7& x, const Vec7& p, double lambda) const;

  double Hamiltonian(const Vec7& x, const Vec7& p, double lambda) const;
  double HamiltonianOnBranch(const Vec7& x, const Vec7& p, double lambda, Branch branch) const;

  // z = (x, p); zdot = (dH/dp, -dH/dx) on the given branch.
  void CanonicalField(const double* z, double lambda, Branch branch, double* zdot) const;

  // Throws Error(kBranchAmbiguity) when S lies within `surface_tol` of a branch boundary.
  HamiltonianDerivatives Derivatives(const Vec7& x, const Vec7& p, double lambda,
                                     double surface_tol = 1e-10) const;
  HamiltonianDerivatives DerivativesOnBranch(const Vec7& x, const Vec7& p, double lambda,
                                             Branch branch) const;

 private:
  Chart chart_;
  EngineSpec engine_;
  double radius_floor_;
};

}  // namespace suffkit
