#pragma once

// Scalar-generic Hamiltonian kernels. Instantiated with double for values and
// with ceres::Jet (nested for second derivatives) for exact derivatives.

#include <ceres/jet.h>

#include <cmath>

#include <Eigen/Core>

#include "suffkit/types.hpp"
#include "suffkit/units.hpp"

namespace suffkit::detail {

inline double ValueOf(double v) { return v; }
template <typename T, int N>
double ValueOf(const ceres::Jet<T, N>& j) {
  return ValueOf(j.a);
}

// Constant of scalar type T, including nested jets.
template <typename T>
struct ConstantOf {
  static T Make(double v) { return T(v); }
};
template <typename T, int N>
struct ConstantOf<ceres::Jet<T, N>> {
  static ceres::Jet<T, N> Make(double v) { return ceres::Jet<T, N>(ConstantOf<T>::Make(v)); }
};
template <typename T>
T K(double v) {
  return ConstantOf<T>::Make(v);
}

template <typename T>
struct ChartTerms {
  Eigen::Matrix<T, 6, 1> f0;
  Eigen::Matrix<T, 6, 3> B;
};

// Drift field (first six components) and control-influence matrix, mu = 1.
template <typename T>
ChartTerms<T> EvalChart(Chart chart, const T* x) {
  using std::cos;
  using std::sin;
  using std::sqrt;
  ChartTerms<T> out;
  out.f0.setConstant(K<T>(0.0));
  out.B.setConstant(K<T>(0.0));
  if (chart == Chart::kCartesian) {
    const T r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    const T r = sqrt(r2);
    const T r3 = r2 * r;
    out.f0[0] = x[3];
    out.f0[1] = x[4];
    out.f0[2] = x[5];
    out.f0[3] = -x[0] / r3;
    out.f0[4] = -x[1] / r3;
    out.f0[5] = -x[2] / r3;
    out.B(3, 0) = K<T>(1.0);
    out.B(4, 1) = K<T>(1.0);
    out.B(5, 2) = K<T>(1.0);
    return out;
  }

  // Gauss variational equations in modified equinoctial elements, thrust
  // resolved in the radial / transverse / normal frame.
  const T& P = x[0];
  const T& ex = x[1];
  const T& ey = x[2];
  const T& hx = x[3];
  const T& hy = x[4];
  const T& l = x[5];
  const T cl = cos(l);
  const T sl = sin(l);
  const T w = K<T>(1.0) + ex * cl + ey * sl;
  const T s2 = K<T>(1.0) + hx * hx + hy * hy;
  const T sq = sqrt(P);  // sqrt(P / mu)
  const T z = hx * sl - hy * cl;

  out.f0[5] = w * w / (P * sq);  // sqrt(mu P) (w / P)^2

  out.B(0, 1) = K<T>(2.0) * P * sq / w;
  out.B(1, 0) = sq * sl;
  out.B(1, 1) = sq * ((w + K<T>(1.0)) * cl + ex) / w;
  out.B(1, 2) = -sq * z * ey / w;
  out.B(2, 0) = -sq * cl;
  out.B(2, 1) = sq * ((w + K<T>(1.0)) * sl + ey) / w;
  out.B(2, 2) = sq * z * ex / w;
  out.B(3, 2) = sq * s2 * cl / (K<T>(2.0) * w);
  out.B(4, 2) = sq * s2 * sl / (K<T>(2.0) * w);
  out.B(5, 2) = sq * z / w;
  return out;
}

template <typename T>
struct HamiltonianParts {
  T h0;           // p f0
  T thrust_gain;  // S = p f1(x, omega*)
};

template <typename T>
HamiltonianParts<T> EvalParts(Chart chart, const EngineSpec& engine, const T* x, const T* p) {
  using std::sqrt;
  const ChartTerms<T> terms = EvalChart(chart, x);
  HamiltonianParts<T> out;
  out.h0 = K<T>(0.0);
  for (int i = 0; i < 6; ++i) out.h0 += p[i] * terms.f0[i];

  Eigen::Matrix<T, 3, 1> primer;
  for (int j = 0; j < 3; ++j) {
    primer[j] = K<T>(0.0);
    for (int i = 0; i < 6; ++i) primer[j] += terms.B(i, j) * p[i];
  }
  const T primer2 = primer[0] * primer[0] + primer[1] * primer[1] + primer[2] * primer[2];
  // |primer| is not differentiable at zero; the contribution vanishes there.
  const T primer_norm = ValueOf(primer2) > 0.0 ? sqrt(primer2) : K<T>(0.0);
  out.thrust_gain = K<T>(engine.u_max) / x[6] * primer_norm - K<T>(engine.beta * engine.u_max) * p[6];
  return out;
}

template <typename T>
T HamiltonianOnBranch(Chart chart, const EngineSpec& engine, const T* x, const T* p,
                      double lambda, Branch branch) {
  const HamiltonianParts<T> parts = EvalParts(chart, engine, x, p);
  switch (branch) {
    case Branch::kCoast:
      return parts.h0;
    case Branch::kBurn:
      // rho = 1: S - lambda - (1 - lambda) = S - 1.
      return parts.h0 + parts.thrust_gain - K<T>(1.0);
    case Branch::kInterior: {
      const T d = parts.thrust_gain - K<T>(lambda);
      return parts.h0 + d * d * K<T>(1.0 / (4.0 * (1.0 - lambda)));
    }
  }
  return parts.h0;
}

}  // namespace suffkit::detail
