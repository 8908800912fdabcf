#include "suffkit/elements.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Geometry>

#include "suffkit/errors.hpp"

namespace suffkit {

Vec7 CartesianState::ToVector() const {
  Vec7 x;
  x << r, v, m;
  return x;
}

CartesianState CartesianState::FromVector(const Vec7& x) {
  CartesianState s;
  s.r = x.head<3>();
  s.v = x.segment<3>(3);
  s.m = x[6];
  return s;
}

Vec7 Meoe::ToVector() const {
  Vec7 x;
  x << P, ex, ey, hx, hy, l, m;
  return x;
}

Meoe Meoe::FromVector(const Vec7& x) {
  return Meoe{x[0], x[1], x[2], x[3], x[4], x[5], x[6]};
}

double Meoe::Radius() const {
  return P / (1.0 + ex * std::cos(l) + ey * std::sin(l));
}

CartesianState MeoeToCartesian(const Meoe& e, double mu) {
  if (!(e.P > 0.0) || !(e.ex * e.ex + e.ey * e.ey < 1.0)) {
    throw Error(ErrorKind::kUnsupportedOrbit, "MEOE conversion requires P > 0 and e < 1");
  }
  const double cl = std::cos(e.l);
  const double sl = std::sin(e.l);
  const double w = 1.0 + e.ex * cl + e.ey * sl;
  const double r = e.P / w;
  const double alpha2 = e.hx * e.hx - e.hy * e.hy;
  const double s2 = 1.0 + e.hx * e.hx + e.hy * e.hy;
  const double hk = e.hx * e.hy;
  const double sqp = std::sqrt(mu / e.P);

  CartesianState c;
  c.r << r / s2 * (cl + alpha2 * cl + 2.0 * hk * sl),
      r / s2 * (sl - alpha2 * sl + 2.0 * hk * cl),
      2.0 * r / s2 * (e.hx * sl - e.hy * cl);
  c.v << -sqp / s2 * (sl + alpha2 * sl - 2.0 * hk * cl + e.ey - 2.0 * e.ex * hk + alpha2 * e.ey),
      -sqp / s2 * (-cl + alpha2 * cl + 2.0 * hk * sl - e.ex + 2.0 * e.ey * hk + alpha2 * e.ex),
      2.0 * sqp / s2 * (e.hx * cl + e.hy * sl + e.ex * e.hx + e.ey * e.hy);
  c.m = e.m;
  return c;
}

Meoe CartesianToMeoe(const CartesianState& x, double l_hint, double mu) {
  const double rn = x.r.norm();
  const Vec3 h = x.r.cross(x.v);
  const double hn = h.norm();
  if (!(rn > 0.0) || !(hn > 0.0)) {
    throw Error(ErrorKind::kUnsupportedOrbit, "degenerate state: r = 0 or r x v = 0");
  }
  const double energy = 0.5 * x.v.squaredNorm() - mu / rn;
  if (!(energy < 0.0)) {
    throw Error(ErrorKind::kUnsupportedOrbit, "only elliptic orbits are supported");
  }
  const Vec3 w_hat = h / hn;
  if (1.0 + w_hat.z() < 1e-12) {
    throw Error(ErrorKind::kUnsupportedOrbit, "retrograde equatorial orbit has no MEOE");
  }

  Meoe e;
  e.P = hn * hn / mu;
  e.hx = -w_hat.y() / (1.0 + w_hat.z());
  e.hy = w_hat.x() / (1.0 + w_hat.z());

  const double s2 = 1.0 + e.hx * e.hx + e.hy * e.hy;
  const double alpha2 = e.hx * e.hx - e.hy * e.hy;
  const double hk = e.hx * e.hy;
  const Vec3 f_hat = Vec3(1.0 + alpha2, 2.0 * hk, -2.0 * e.hy) / s2;
  const Vec3 g_hat = Vec3(2.0 * hk, 1.0 - alpha2, 2.0 * e.hx) / s2;

  const Vec3 ecc = x.v.cross(h) / mu - x.r / rn;
  e.ex = ecc.dot(f_hat);
  e.ey = ecc.dot(g_hat);

  const double l_wrapped = std::atan2(x.r.dot(g_hat), x.r.dot(f_hat));
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  e.l = l_wrapped + kTwoPi * std::round((l_hint - l_wrapped) / kTwoPi);
  e.m = x.m;
  return e;
}

Vec7 MeoeToCartesian(const Vec7& meoe, double mu) {
  return MeoeToCartesian(Meoe::FromVector(meoe), mu).ToVector();
}

Vec7 CartesianToMeoe(const Vec7& cartesian, double l_hint, double mu) {
  return CartesianToMeoe(CartesianState::FromVector(cartesian), l_hint, mu).ToVector();
}

}  // namespace suffkit
