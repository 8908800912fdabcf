#include "suffkit/variational.hpp"

#include "suffkit/errors.hpp"

namespace suffkit {

FamilyBasis BuildFamilyBasis(const Vec7& f, double floor) {
  const double norm = f.norm();
  if (!(norm >= floor)) {
    throw Error(ErrorKind::kHamiltonianNotRegular,
                "canonical velocity vanishes at the initial point");
  }
  Eigen::Matrix<double, 7, 7> basis;
  basis.col(0) = f / norm;
  int accepted = 1;
  bool used[7] = {false, false, false, false, false, false, false};
  while (accepted < 7) {
    int best = -1;
    double best_norm = -1.0;
    Vec7 best_vec;
    for (int i = 0; i < 7; ++i) {
      if (used[i]) continue;
      Vec7 v = Vec7::Unit(i);
      for (int pass = 0; pass < 2; ++pass) {
        for (int j = 0; j < accepted; ++j) v -= basis.col(j).dot(v) * basis.col(j);
      }
      const double n = v.norm();
      if (n > best_norm + 1e-14) {
        best = i;
        best_norm = n;
        best_vec = v;
      }
    }
    used[best] = true;
    basis.col(accepted++) = best_vec / best_norm;
  }
  return basis.rightCols<6>();
}

FamilyBasis BuildFamilyBasis(const Dynamics& dynamics, const Vec7& x0, const Vec7& p0,
                             double lambda, double floor) {
  Eigen::Matrix<double, 14, 1> z;
  z << x0, p0;
  Eigen::Matrix<double, 14, 1> zdot;
  dynamics.CanonicalField(z.data(), lambda, dynamics.ActiveBranch(x0, p0, lambda), zdot.data());
  return BuildFamilyBasis(Vec7(zdot.head<7>()), floor);
}

VariationalState VariationalRhs(const VariationalState& v, const HamiltonianDerivatives& d) {
  VariationalState out;
  out.t = v.t;
  out.X = d.H_px * v.X + d.H_pp * v.P;
  out.P = -d.H_xx * v.X - d.H_xp * v.P;
  return out;
}

VariationalState SwitchingJump(const VariationalState& minus, const Vec14& zdot_minus,
                               const Vec14& zdot_plus, const Eigen::RowVectorXd& dt_dq) {
  const Vec14 jump = zdot_plus - zdot_minus;
  VariationalState out = minus;
  out.X -= jump.head<7>() * dt_dq;
  out.P -= jump.tail<7>() * dt_dq;
  return out;
}

VariationalState SwitchingJump(const Dynamics& dynamics, double lambda,
                               const SwitchingEvent& event, const VariationalState& minus,
                               double regularity_floor, Eigen::RowVectorXd* dt_dq) {
  Vec14 z;
  z << event.x, event.p;
  Vec14 zdot_minus, zdot_plus;
  dynamics.CanonicalField(z.data(), lambda, event.before, zdot_minus.data());
  dynamics.CanonicalField(z.data(), lambda, event.after, zdot_plus.data());
  const RowVec14 grad = dynamics.SwitchingGradient(event.x, event.p);
  const Eigen::RowVectorXd g =
      SwitchingTimeGradient(grad, event.H1_dot, minus.X, minus.P, regularity_floor);
  if (dt_dq) *dt_dq = g;
  return SwitchingJump(minus, zdot_minus, zdot_plus, g);
}

}  // namespace suffkit
