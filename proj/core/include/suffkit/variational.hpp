#pragma once

#include <Eigen/Core>

#include "suffkit/dynamics.hpp"
#include "suffkit/flow.hpp"
#include "suffkit/types.hpp"

namespace suffkit {

using FamilyBasis = Eigen::Matrix<double, 7, 6>;

// Orthonormal basis of the orthogonal complement of f, by Gram-Schmidt with
// pivoting over the coordinate vectors (ties resolved in coordinate order).
// Throws Error(kHamiltonianNotRegular) when |f| < floor.
FamilyBasis BuildFamilyBasis(const Vec7& f, double floor = 1e-12);

// Basis for the initial costate family of an extremal starting at (x0, p0):
// complement of f(x0, u(x0, p0)) = dH/dp.
FamilyBasis BuildFamilyBasis(const Dynamics& dynamics, const Vec7& x0, const Vec7& p0,
                             double lambda, double floor = 1e-12);

struct VariationalState {
  double t = 0.0;
  SensitivityMatrix X;  // dx/dq
  SensitivityMatrix P;  // dp'/dq
};

// Linearized canonical flow with the control branch frozen:
//   X' = H_px X + H_pp P,  P' = -H_xx X - H_xp P.
VariationalState VariationalRhs(const VariationalState& v, const HamiltonianDerivatives& d);

// Update across a switching at which the canonical field jumps from zdot_minus
// to zdot_plus:  (X, P)+ = (X, P)- - (zdot+ - zdot-) dt/dq.
VariationalState SwitchingJump(const VariationalState& minus, const Vec14& zdot_minus,
                               const Vec14& zdot_plus, const Eigen::RowVectorXd& dt_dq);

// Same update with the jump and dt/dq evaluated from the event itself.
// Throws Error(kRegularityViolation) when |H1_dot| < floor.
VariationalState SwitchingJump(const Dynamics& dynamics, double lambda,
                               const SwitchingEvent& event, const VariationalState& minus,
                               double regularity_floor, Eigen::RowVectorXd* dt_dq = nullptr);

}  // namespace suffkit
