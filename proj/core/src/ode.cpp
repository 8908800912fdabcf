#include "suffkit/ode.hpp"

#include <algorithm>
#include <cmath>

#include "suffkit/errors.hpp"

namespace suffkit {
namespace {

constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                 a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

}  // namespace

Eigen::VectorXd DenseStep::Eval(double t) const {
  const double s = (t - t0) / h;
  const double s1 = 1.0 - s;
  return coeffs.col(0) +
         s * (coeffs.col(1) + s1 * (coeffs.col(2) + s * (coeffs.col(3) + s1 * coeffs.col(4))));
}

double DenseStep::EvalComponent(double t, int i) const {
  const double s = (t - t0) / h;
  const double s1 = 1.0 - s;
  return coeffs(i, 0) +
         s * (coeffs(i, 1) + s1 * (coeffs(i, 2) + s * (coeffs(i, 3) + s1 * coeffs(i, 4))));
}

double DormandPrince::ErrorNorm(const Eigen::VectorXd& err, const Eigen::VectorXd& y0,
                                const Eigen::VectorXd& y1) const {
  const bool weighted = options_.error_weight.size() == err.size();
  double sum = 0.0;
  long counted = 0;
  for (Eigen::Index i = 0; i < err.size(); ++i) {
    const double w = weighted ? options_.error_weight[i] : 1.0;
    if (w == 0.0) continue;
    const double sc =
        options_.abs_tol + options_.rel_tol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    const double q = w * err[i] / sc;
    sum += q * q;
    ++counted;
  }
  return counted > 0 ? std::sqrt(sum / static_cast<double>(counted)) : 0.0;
}

DormandPrince::Trial DormandPrince::Step(const Rhs& rhs, double t, const Eigen::VectorXd& y,
                                         const Eigen::VectorXd& k1, double h) const {
  const Eigen::Index n = y.size();
  Eigen::VectorXd k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n);

  tmp = y + h * a21 * k1;
  rhs(t + c2 * h, tmp, k2);
  tmp = y + h * (a31 * k1 + a32 * k2);
  rhs(t + c3 * h, tmp, k3);
  tmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
  rhs(t + c4 * h, tmp, k4);
  tmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
  rhs(t + c5 * h, tmp, k5);
  tmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
  rhs(t + h, tmp, k6);

  Trial trial;
  trial.y1 = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
  trial.f1.resize(n);
  rhs(t + h, trial.y1, trial.f1);
  k7 = trial.f1;

  const Eigen::VectorXd err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
  trial.error = ErrorNorm(err, y, trial.y1);

  DenseStep& d = trial.dense;
  d.t0 = t;
  d.h = h;
  d.coeffs.resize(n, 5);
  const Eigen::VectorXd ydiff = trial.y1 - y;
  const Eigen::VectorXd bspl = h * k1 - ydiff;
  d.coeffs.col(0) = y;
  d.coeffs.col(1) = ydiff;
  d.coeffs.col(2) = bspl;
  d.coeffs.col(3) = ydiff - h * k7 - bspl;
  d.coeffs.col(4) = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
  return trial;
}

double DormandPrince::NextStep(double h, double error, bool last_rejected) const {
  double factor;
  if (error == 0.0) {
    factor = options_.max_factor;
  } else {
    factor = options_.safety * std::pow(error, -0.2);
    factor = std::clamp(factor, options_.min_factor, options_.max_factor);
  }
  if (last_rejected) factor = std::min(factor, 1.0);
  double next = h * factor;
  if (options_.max_step > 0.0) next = std::min(next, options_.max_step);
  return next;
}

double DormandPrince::InitialStep(const Rhs& rhs, double t, const Eigen::VectorXd& y,
                                  const Eigen::VectorXd& f, double direction) const {
  if (options_.initial_step > 0.0) return options_.initial_step;
  // Hairer, Norsett & Wanner, starting step size heuristic.
  const Eigen::VectorXd sc =
      (options_.abs_tol + options_.rel_tol * y.array().abs()).matrix();
  const double dnf = std::sqrt((f.array() / sc.array()).square().mean());
  const double dny = std::sqrt((y.array() / sc.array()).square().mean());
  double h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : 0.01 * dny / dnf;
  if (options_.max_step > 0.0) h = std::min(h, options_.max_step);
  Eigen::VectorXd y1 = y + direction * h * f;
  Eigen::VectorXd f1(y.size());
  rhs(t + direction * h, y1, f1);
  const double der2 = std::sqrt(((f1 - f).array() / sc.array()).square().mean()) / h;
  const double der12 = std::max(der2, dnf);
  const double h1 = der12 <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 0.2);
  h = std::min(100.0 * h, h1);
  if (options_.max_step > 0.0) h = std::min(h, options_.max_step);
  return h;
}

Eigen::VectorXd DormandPrince::Integrate(const Rhs& rhs, double t0, const Eigen::VectorXd& y0,
                                         double t1,
                                         const std::function<void(const DenseStep&)>& on_step,
                                         long* steps_taken) const {
  Eigen::VectorXd y = y0;
  Eigen::VectorXd f(y.size());
  double t = t0;
  rhs(t, y, f);
  if (t1 <= t0) return y;
  double h = std::min(InitialStep(rhs, t, y, f, 1.0), t1 - t0);
  bool rejected = false;
  long steps = 0;
  while (t < t1) {
    if (steps++ > options_.max_steps) {
      throw Error(ErrorKind::kStepUnderflow, "integrator exceeded the step budget");
    }
    bool last = false;
    if (t + h >= t1 || t + 1.01 * h >= t1) {
      h = t1 - t;
      last = true;
    }
    Trial trial = Step(rhs, t, y, f, h);
    if (!std::isfinite(trial.error)) trial.error = 1e10;
    if (trial.error <= 1.0) {
      if (on_step) on_step(trial.dense);
      t = last ? t1 : t + h;
      y = std::move(trial.y1);
      f = std::move(trial.f1);
      h = NextStep(h, trial.error, rejected);
      rejected = false;
    } else {
      h = NextStep(h, trial.error, true);
      rejected = true;
      if (h < options_.min_step) {
        throw Error(ErrorKind::kStepUnderflow, "integrator step size underflow");
      }
    }
  }
  if (steps_taken) *steps_taken = steps;
  return y;
}

}  // namespace suffkit
