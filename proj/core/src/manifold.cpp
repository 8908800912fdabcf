#include "suffkit/manifold.hpp"

#include <Eigen/QR>

#include "suffkit/errors.hpp"

namespace suffkit {

TargetManifold::TargetManifold(Chart chart, Eigen::MatrixXd A, std::vector<Mat7> hessians,
                               Eigen::VectorXd b)
    : chart_(chart), A_(std::move(A)), hessians_(std::move(hessians)), b_(std::move(b)) {
  if (A_.cols() != kStateDim || A_.rows() < 1 || A_.rows() > kStateDim) {
    throw Error(ErrorKind::kConfig, "target constraint matrix must be s x 7 with 1 <= s <= 7");
  }
  if (b_.size() != A_.rows()) {
    throw Error(ErrorKind::kConfig, "target offset length differs from constraint count");
  }
  if (!hessians_.empty() && static_cast<Eigen::Index>(hessians_.size()) != A_.rows()) {
    throw Error(ErrorKind::kConfig, "one Hessian per target constraint is required");
  }
  for (Mat7& q : hessians_) q = 0.5 * (q + q.transpose()).eval();
}

TargetManifold TargetManifold::Affine(Chart chart, Eigen::MatrixXd A, Eigen::VectorXd b) {
  return TargetManifold(chart, std::move(A), {}, std::move(b));
}

TargetManifold TargetManifold::Quadratic(Chart chart, Eigen::MatrixXd A,
                                         std::vector<Mat7> hessians, Eigen::VectorXd b) {
  return TargetManifold(chart, std::move(A), std::move(hessians), std::move(b));
}

Eigen::VectorXd TargetManifold::Phi(const Vec7& x) const {
  Eigen::VectorXd out = A_ * x - b_;
  for (std::size_t i = 0; i < hessians_.size(); ++i) {
    out[static_cast<Eigen::Index>(i)] += 0.5 * x.dot(hessians_[i] * x);
  }
  return out;
}

Eigen::MatrixXd TargetManifold::Gradient(const Vec7& x) const {
  Eigen::MatrixXd g = A_;
  for (std::size_t i = 0; i < hessians_.size(); ++i) {
    g.row(static_cast<Eigen::Index>(i)) += (hessians_[i] * x).transpose();
  }
  return g;
}

Mat7 TargetManifold::Hessian(int i) const {
  if (i < 0 || i >= s()) throw Error(ErrorKind::kPrecondition, "constraint index out of range");
  return hessians_.empty() ? Mat7::Zero() : hessians_[static_cast<std::size_t>(i)];
}

TargetManifold MeoeTarget(const Meoe& final_orbit, double l_f) {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(6, 7);
  A.leftCols<6>().setIdentity();
  Eigen::VectorXd b(6);
  b << final_orbit.P, final_orbit.ex, final_orbit.ey, final_orbit.hx, final_orbit.hy, l_f;
  return TargetManifold::Affine(Chart::kMeoe, std::move(A), std::move(b));
}

TargetManifold FixedEndpointTarget(Chart chart, const Vec7& x_f) {
  return TargetManifold::Affine(chart, Mat7::Identity(), x_f);
}

Eigen::MatrixXd TangentBasis(const TargetManifold& manifold, const Vec7& x_f, double rank_tol) {
  const Eigen::MatrixXd G = manifold.Gradient(x_f);
  const int s = manifold.s();
  const Eigen::MatrixXd Gt = G.transpose();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Gt);
  qr.setThreshold(rank_tol);
  if (qr.rank() < s) {
    throw Error(ErrorKind::kManifoldDegeneracy, "target constraint gradient is rank deficient");
  }
  const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(kStateDim, kStateDim);
  Eigen::MatrixXd T = Q.rightCols(kStateDim - s);
  for (Eigen::Index j = 0; j < T.cols(); ++j) {
    Eigen::Index imax = 0;
    T.col(j).cwiseAbs().maxCoeff(&imax);
    if (T(imax, j) < 0.0) T.col(j) *= -1.0;
  }
  return T;
}

}  // namespace suffkit
