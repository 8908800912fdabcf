#include "suffkit/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "hamiltonian_ad.hpp"
#include "suffkit/errors.hpp"

namespace suffkit {
namespace {

using Jet14 = ceres::Jet<double, 14>;
using Jet14x14 = ceres::Jet<Jet14, 14>;

// Gradient of H on a branch w.r.t. z = (x, p).
Vec14 HamiltonianGradient(Chart chart, const EngineSpec& engine, const double* z, double lambda,
                          Branch branch) {
  Jet14 zj[14];
  for (int i = 0; i < 14; ++i) zj[i] = Jet14(z[i], i);
  const Jet14 h = detail::HamiltonianOnBranch(chart, engine, zj, zj + 7, lambda, branch);
  return h.v;
}

template <typename T>
T SwitchingKernel(Chart chart, const EngineSpec& engine, const T* x, const T* p) {
  return detail::EvalParts(chart, engine, x, p).thrust_gain - T(1.0);
}

template <typename T>
T DriftKernel(Chart chart, const EngineSpec& engine, const T* x, const T* p) {
  return detail::EvalParts(chart, engine, x, p).h0;
}

template <typename Fn>
Vec14 GradientOf(const Vec7& x, const Vec7& p, Fn&& fn) {
  Jet14 zj[14];
  for (int i = 0; i < 7; ++i) {
    zj[i] = Jet14(x[i], i);
    zj[7 + i] = Jet14(p[i], 7 + i);
  }
  return fn(zj, zj + 7).v;
}

}  // namespace

Vec7 EvalF0(const CartesianState& x, double radius_floor) {
  const double r = x.r.norm();
  if (!(r >= radius_floor)) {
    throw Error(ErrorKind::kSingularity, "radius below floor in drift field");
  }
  Vec7 f = Vec7::Zero();
  f.head<3>() = x.v;
  f.segment<3>(3) = -x.r / (r * r * r);
  return f;
}

Vec7 EvalF1(const CartesianState& x, const Vec3& omega, const EngineSpec& engine) {
  if (x.m < engine.m_c) {
    throw Error(ErrorKind::kFuelExhausted, "mass below dry mass in control field");
  }
  Vec7 f = Vec7::Zero();
  f.segment<3>(3) = engine.u_max / x.m * omega;
  f[6] = -engine.beta * engine.u_max;
  return f;
}

Dynamics::Dynamics(Chart chart, const EngineSpec& engine, double radius_floor)
    : chart_(chart), engine_(engine), radius_floor_(radius_floor) {}

double Dynamics::Radius(const Vec7& x) const {
  if (chart_ == Chart::kCartesian) return x.head<3>().norm();
  return x[0] / (1.0 + x[1] * std::cos(x[5]) + x[2] * std::sin(x[5]));
}

void Dynamics::CheckAdmissible(const Vec7& x) const {
  const double r = Radius(x);
  if (!(r >= radius_floor_)) {
    throw Error(ErrorKind::kSingularity, "radius below floor");
  }
  if (chart_ == Chart::kMeoe && !(x[0] > 0.0)) {
    throw Error(ErrorKind::kSingularity, "semilatus rectum became non-positive");
  }
  if (x[6] < engine_.m_c) {
    throw Error(ErrorKind::kFuelExhausted, "mass reached the dry mass");
  }
}

Vec7 Dynamics::DriftField(const Vec7& x) const {
  const auto terms = detail::EvalChart(chart_, x.data());
  Vec7 f = Vec7::Zero();
  f.head<6>() = terms.f0;
  return f;
}

Mat63 Dynamics::ControlMatrix(const Vec7& x) const {
  return detail::EvalChart(chart_, x.data()).B;
}

Vec7 Dynamics::ControlField(const Vec7& x, const Vec3& omega) const {
  Vec7 f;
  f.head<6>() = engine_.u_max / x[6] * (ControlMatrix(x) * omega);
  f[6] = -engine_.beta * engine_.u_max;
  return f;
}

Vec3 Dynamics::Primer(const Vec7& x, const Vec7& p) const {
  return ControlMatrix(x).transpose() * p.head<6>();
}

double Dynamics::ThrustGain(const Vec7& x, const Vec7& p) const {
  return detail::EvalParts(chart_, engine_, x.data(), p.data()).thrust_gain;
}

double Dynamics::SwitchingFunction(const Vec7& x, const Vec7& p) const {
  return ThrustGain(x, p) - 1.0;
}

RowVec14 Dynamics::SwitchingGradient(const Vec7& x, const Vec7& p) const {
  return GradientOf(x, p, [&](const Jet14* xj, const Jet14* pj) {
           return SwitchingKernel(chart_, engine_, xj, pj);
         }).transpose();
}

double Dynamics::SwitchingFunctionDot(const Vec7& x, const Vec7& p) const {
  const Vec14 g1 = SwitchingGradient(x, p).transpose();
  const Vec14 g0 = GradientOf(x, p, [&](const Jet14* xj, const Jet14* pj) {
    return DriftKernel(chart_, engine_, xj, pj);
  });
  // {H1, H0} = dH1/dx . dH0/dp - dH1/dp . dH0/dx
  return g1.head<7>().dot(g0.tail<7>()) - g1.tail<7>().dot(g0.head<7>());
}

double Dynamics::Throttle(double thrust_gain, double lambda) {
  if (lambda >= 1.0) return thrust_gain > 1.0 ? 1.0 : 0.0;
  return std::clamp((thrust_gain - lambda) / (2.0 * (1.0 - lambda)), 0.0, 1.0);
}

Branch Dynamics::BranchFor(double thrust_gain, double lambda) {
  if (lambda >= 1.0) return thrust_gain > 1.0 ? Branch::kBurn : Branch::kCoast;
  if (thrust_gain <= lambda) return Branch::kCoast;
  if (thrust_gain >= 2.0 - lambda) return Branch::kBurn;
  return Branch::kInterior;
}

Branch Dynamics::ActiveBranch(const Vec7& x, const Vec7& p, double lambda) const {
  return BranchFor(ThrustGain(x, p), lambda);
}

ControlSample Dynamics::Control(const Vec7& x, const Vec7& p, double lambda) const {
  ControlSample c;
  const Vec3 primer = Primer(x, p);
  const double n = primer.norm();
  if (n > 0.0) {
    c.omega = primer / n;
  } else {
    c.degenerate_primer = true;
  }
  c.rho = Throttle(ThrustGain(x, p), lambda);
  return c;
}

double Dynamics::HamiltonianOnBranch(const Vec7& x, const Vec7& p, double lambda,
                                     Branch branch) const {
  return detail::HamiltonianOnBranch(chart_, engine_, x.data(), p.data(), lambda, branch);
}

double Dynamics::Hamiltonian(const Vec7& x, const Vec7& p, double lambda) const {
  return HamiltonianOnBranch(x, p, lambda, ActiveBranch(x, p, lambda));
}

void Dynamics::CanonicalField(const double* z, double lambda, Branch branch,
                              double* zdot) const {
  const Vec14 g = HamiltonianGradient(chart_, engine_, z, lambda, branch);
  for (int i = 0; i < 7; ++i) {
    zdot[i] = g[7 + i];
    zdot[7 + i] = -g[i];
  }
}

HamiltonianDerivatives Dynamics::Derivatives(const Vec7& x, const Vec7& p, double lambda,
                                             double surface_tol) const {
  const double s = ThrustGain(x, p);
  const bool near_lower = std::abs(s - std::min(lambda, 1.0)) < surface_tol;
  const bool near_upper = std::abs(s - (2.0 - std::min(lambda, 1.0))) < surface_tol;
  if (near_lower || near_upper) {
    throw Error(ErrorKind::kBranchAmbiguity,
                "Hamiltonian derivatives requested on the switching surface");
  }
  return DerivativesOnBranch(x, p, lambda, BranchFor(s, lambda));
}

HamiltonianDerivatives Dynamics::DerivativesOnBranch(const Vec7& x, const Vec7& p,
                                                     double lambda, Branch branch) const {
  Jet14x14 z[14];
  for (int i = 0; i < 14; ++i) {
    const double value = i < 7 ? x[i] : p[i - 7];
    z[i].a = Jet14(value, i);
    z[i].v.setConstant(Jet14(0.0));
    z[i].v[i] = Jet14(1.0);
  }
  const Jet14x14 h = detail::HamiltonianOnBranch(chart_, engine_, z, z + 7, lambda, branch);

  HamiltonianDerivatives d;
  for (int i = 0; i < 7; ++i) {
    d.H_x[i] = h.a.v[i];
    d.H_p[i] = h.a.v[7 + i];
  }
  for (int i = 0; i < 7; ++i) {
    for (int j = 0; j < 7; ++j) {
      d.H_xx(i, j) = h.v[i].v[j];
      d.H_pp(i, j) = h.v[7 + i].v[7 + j];
      d.H_px(i, j) = h.v[7 + i].v[j];
      d.H_xp(i, j) = h.v[i].v[7 + j];
    }
  }
  return d;
}

}  // namespace suffkit
