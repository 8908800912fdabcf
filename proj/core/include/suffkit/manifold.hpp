#pragma once

#include <vector>

#include <Eigen/Core>

#include "suffkit/elements.hpp"
#include "suffkit/types.hpp"

namespace suffkit {

// Terminal constraint set {x : phi(x) = 0} with
//   phi_i(x) = a_i x + 1/2 x' Q_i x - b_i,   i = 1..s.
// Affine targets have every Q_i = 0.
class TargetManifold {
 public:
  // phi(x) = A x - b.
  static TargetManifold Affine(Chart chart, Eigen::MatrixXd A, Eigen::VectorXd b);
  // One symmetric Hessian per row of A.
  static TargetManifold Quadratic(Chart chart, Eigen::MatrixXd A, std::vector<Mat7> hessians,
                                  Eigen::VectorXd b);

  int s() const { return static_cast<int>(A_.rows()); }
  Chart chart() const { return chart_; }
  bool affine() const { return hessians_.empty(); }
  const Eigen::MatrixXd& linear_part() const { return A_; }
  const Eigen::VectorXd& offset() const { return b_; }

  Eigen::VectorXd Phi(const Vec7& x) const;
  // s x 7.
  Eigen::MatrixXd Gradient(const Vec7& x) const;
  Mat7 Hessian(int i) const;

 private:
  TargetManifold(Chart chart, Eigen::MatrixXd A, std::vector<Mat7> hessians, Eigen::VectorXd b);

  Chart chart_;
  Eigen::MatrixXd A_;
  std::vector<Mat7> hessians_;
  Eigen::VectorXd b_;
};

// Fixes (P, ex, ey, hx, hy) to `final_orbit` and the true longitude to l_f;
// mass is free. MEOE chart, canonical units.
TargetManifold MeoeTarget(const Meoe& final_orbit, double l_f);

// phi(x) = x - x_f.
TargetManifold FixedEndpointTarget(Chart chart, const Vec7& x_f);

// Orthonormal basis (7 x (7 - s)) of the kernel of the constraint gradient at
// x_f. Columns are oriented so that their largest-magnitude entry is positive.
// Throws Error(kManifoldDegeneracy) when the gradient is rank deficient.
Eigen::MatrixXd TangentBasis(const TargetManifold& manifold, const Vec7& x_f,
                             double rank_tol = 1e-10);

}  // namespace suffkit
