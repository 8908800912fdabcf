#pragma once

#include <Eigen/Core>

namespace suffkit {

inline constexpr int kStateDim = 7;
inline constexpr int kFamilyDim = kStateDim - 1;

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Vec7 = Eigen::Matrix<double, 7, 1>;
using Vec8 = Eigen::Matrix<double, 8, 1>;
using RowVec7 = Eigen::Matrix<double, 1, 7>;
using Mat3 = Eigen::Matrix3d;
using Mat7 = Eigen::Matrix<double, 7, 7>;
using Mat63 = Eigen::Matrix<double, 6, 3>;
// 7 x k sensitivity blocks; k = 6 for the q-family, 7 for the full costate family.
using SensitivityMatrix = Eigen::Matrix<double, 7, Eigen::Dynamic>;

// Coordinates in which the state (and therefore the costate) is expressed.
enum class Chart {
  kCartesian,  // (r, v, m)
  kMeoe,       // (P, ex, ey, hx, hy, l, m)
};

// Active control branch of the maximized Hamiltonian. kInterior only exists
// for the smoothed (lambda < 1) cost.
enum class Branch {
  kCoast,
  kBurn,
  kInterior,
};

const char* ToString(Chart chart);
const char* ToString(Branch branch);

}  // namespace suffkit
