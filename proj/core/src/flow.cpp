#include "suffkit/flow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include <boost/math/tools/toms748_solve.hpp>

#include "suffkit/errors.hpp"
#include "suffkit/variational.hpp"

namespace suffkit {
namespace {

using ConstMat = Eigen::Map<const Eigen::Matrix<double, 7, Eigen::Dynamic>>;
using MutMat = Eigen::Map<Eigen::Matrix<double, 7, Eigen::Dynamic>>;

// Positive once the control law has left `branch`.
double ExitMeasure(double thrust_gain, double lambda, Branch branch) {
  const double lo = std::min(lambda, 1.0);
  const double hi = 2.0 - lo;
  switch (branch) {
    case Branch::kCoast:
      return thrust_gain - lo;
    case Branch::kBurn:
      return hi - thrust_gain;
    case Branch::kInterior:
      return std::max(lo - thrust_gain, thrust_gain - hi);
  }
  return 0.0;
}

Branch NextBranch(Branch from, double thrust_gain, double lambda) {
  if (lambda >= 1.0) return from == Branch::kBurn ? Branch::kCoast : Branch::kBurn;
  if (from != Branch::kInterior) return Branch::kInterior;
  return thrust_gain < 1.0 ? Branch::kCoast : Branch::kBurn;
}

double RhoJump(Branch before, Branch after, double lambda) {
  if (lambda < 1.0) return 0.0;  // throttle is continuous for the smoothed cost
  if (before == after) return 0.0;
  return after == Branch::kBurn ? 1.0 : -1.0;
}

class AugmentedSystem {
 public:
  AugmentedSystem(const Dynamics& dynamics, double lambda, int columns)
      : dynamics_(dynamics), lambda_(lambda), columns_(columns) {}

  int size() const { return 14 + 14 * columns_; }
  void set_branch(Branch branch) { branch_ = branch; }
  Branch branch() const { return branch_; }

  void operator()(double, const Eigen::VectorXd& y, Eigen::VectorXd& dy) const {
    Eval(y, branch_, dy);
  }

  void Eval(const Eigen::VectorXd& y, Branch branch, Eigen::VectorXd& dy) const {
    const Vec7 x = y.head<7>();
    CheckGeometry(x);
    dy.resize(size());
    if (columns_ == 0) {
      dynamics_.CanonicalField(y.data(), lambda_, branch, dy.data());
      return;
    }
    const Vec7 p = y.segment<7>(7);
    const HamiltonianDerivatives d = dynamics_.DerivativesOnBranch(x, p, lambda_, branch);
    dy.head<7>() = d.H_p;
    dy.segment<7>(7) = -d.H_x.transpose();
    const ConstMat X(y.data() + 14, 7, columns_);
    const ConstMat P(y.data() + 14 + 7 * columns_, 7, columns_);
    MutMat dX(dy.data() + 14, 7, columns_);
    MutMat dP(dy.data() + 14 + 7 * columns_, 7, columns_);
    dX.noalias() = d.H_px * X + d.H_pp * P;
    dP.noalias() = -d.H_xx * X - d.H_xp * P;
  }

  double Exit(const double* z) const {
    const Vec7 x = Eigen::Map<const Vec7>(z);
    const Vec7 p = Eigen::Map<const Vec7>(z + 7);
    return ExitMeasure(dynamics_.ThrustGain(x, p), lambda_, branch_);
  }

 private:
  void CheckGeometry(const Vec7& x) const {
    if (dynamics_.chart() == Chart::kMeoe && !(x[0] > 0.0)) {
      throw Error(ErrorKind::kSingularity, "semilatus rectum became non-positive");
    }
    if (!(dynamics_.Radius(x) >= dynamics_.radius_floor())) {
      throw Error(ErrorKind::kSingularity, "radius below floor");
    }
  }

  const Dynamics& dynamics_;
  double lambda_;
  int columns_;
  Branch branch_ = Branch::kCoast;
};

double ExitOnDense(const AugmentedSystem& sys, const DenseStep& step, double t) {
  double z[14];
  for (int i = 0; i < 14; ++i) z[i] = step.EvalComponent(t, i);
  return sys.Exit(z);
}

Branch InitialBranch(const Dynamics& dynamics, const Vec7& x, const Vec7& p, double lambda) {
  return dynamics.ActiveBranch(x, p, lambda);
}

}  // namespace

Eigen::RowVectorXd SwitchingTimeGradient(const RowVec14& switching_gradient, double H1_dot,
                                         const SensitivityMatrix& X, const SensitivityMatrix& P,
                                         double regularity_floor) {
  if (!(std::abs(H1_dot) >= regularity_floor)) {
    throw Error(ErrorKind::kRegularityViolation, "switching is not regular: |dH1/dt| below floor");
  }
  return -(switching_gradient.head<7>() * X + switching_gradient.tail<7>() * P) / H1_dot;
}

SensitivityMatrix ExtremalTrajectory::FinalXq() const {
  return ConstMat(final_state.data() + 14, 7, columns);
}

SensitivityMatrix ExtremalTrajectory::FinalPq() const {
  return ConstMat(final_state.data() + 14 + 7 * columns, 7, columns);
}

std::size_t ExtremalTrajectory::ArcIndex(double t, Side side) const {
  if (arcs.empty()) throw Error(ErrorKind::kPrecondition, "trajectory has no arcs");
  if (side == Side::kAfter) {
    auto it = std::upper_bound(arcs.begin(), arcs.end(), t,
                               [](double v, const ArcSegment& a) { return v < a.t0; });
    if (it == arcs.begin()) return 0;
    return static_cast<std::size_t>(std::distance(arcs.begin(), it) - 1);
  }
  auto it = std::lower_bound(arcs.begin(), arcs.end(), t,
                             [](const ArcSegment& a, double v) { return a.t1 < v; });
  if (it == arcs.end()) return arcs.size() - 1;
  return static_cast<std::size_t>(std::distance(arcs.begin(), it));
}

Eigen::VectorXd ExtremalTrajectory::EvalOnArc(std::size_t arc, double t) const {
  const ArcSegment& a = arcs.at(arc);
  if (a.steps.empty()) {
    if (arc + 1 == arcs.size() && final_state.size() > 0) return final_state;
    throw Error(ErrorKind::kPrecondition, "trajectory was propagated without dense output");
  }
  auto it = std::upper_bound(a.steps.begin(), a.steps.end(), t,
                             [](double v, const DenseStep& s) { return v < s.t0; });
  if (it != a.steps.begin()) --it;
  return it->Eval(t);
}

Eigen::VectorXd ExtremalTrajectory::Eval(double t, Side side) const {
  return EvalOnArc(ArcIndex(t, side), t);
}

Vec7 ExtremalTrajectory::StateAt(double t, Side side) const { return Eval(t, side).head<7>(); }

Vec7 ExtremalTrajectory::CostateAt(double t, Side side) const {
  return Eval(t, side).segment<7>(7);
}

int ExtremalTrajectory::BurnArcCount() const {
  int count = 0;
  bool thrusting = false;
  for (const ArcSegment& a : arcs) {
    const bool on = a.branch != Branch::kCoast;
    if (on && !thrusting) ++count;
    thrusting = on;
  }
  return count;
}

int ExtremalTrajectory::SwitchingCount() const {
  int count = 0;
  for (const SwitchingEvent& e : events) {
    if (e.delta_rho != 0.0) ++count;
  }
  return count;
}

std::vector<double> ExtremalTrajectory::SwitchingTimes() const {
  std::vector<double> out;
  for (const SwitchingEvent& e : events) {
    if (e.delta_rho != 0.0) out.push_back(e.t);
  }
  return out;
}

ExtremalTrajectory Propagate(const Dynamics& dynamics, const Vec7& x0, const Vec7& p0,
                             double t_final, double lambda, const FlowOptions& options,
                             const VariationSeed* seed) {
  if (!(t_final >= 0.0)) throw Error(ErrorKind::kPrecondition, "final time must be non-negative");
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw Error(ErrorKind::kPrecondition, "homotopy parameter outside [0, 1]");
  }
  const int k = seed ? static_cast<int>(seed->X0.cols()) : 0;
  if (seed && seed->P0.cols() != k) {
    throw Error(ErrorKind::kPrecondition, "variation seed blocks have different widths");
  }
  dynamics.CheckAdmissible(x0);

  AugmentedSystem sys(dynamics, lambda, k);
  const DormandPrince::Rhs rhs = [&sys](double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
    sys(t, y, dy);
  };

  OdeOptions ode;
  ode.rel_tol = options.rel_tol;
  ode.abs_tol = options.abs_tol;
  ode.max_step = options.max_step;
  ode.max_steps = options.max_steps;
  if (k > 0 && !options.control_variation_error) {
    ode.error_weight = Eigen::VectorXd::Zero(sys.size());
    ode.error_weight.head<14>().setOnes();
  }
  const DormandPrince stepper(ode);

  ExtremalTrajectory traj;
  traj.lambda = lambda;
  traj.t0 = 0.0;
  traj.tf = t_final;
  traj.columns = k;

  Eigen::VectorXd y(sys.size());
  y.head<7>() = x0;
  y.segment<7>(7) = p0;
  if (k > 0) {
    MutMat(y.data() + 14, 7, k) = seed->X0;
    MutMat(y.data() + 14 + 7 * k, 7, k) = seed->P0;
  }

  sys.set_branch(InitialBranch(dynamics, x0, p0, lambda));
  ArcSegment arc;
  arc.t0 = 0.0;
  arc.branch = sys.branch();

  double t = 0.0;
  Eigen::VectorXd f(sys.size());
  rhs(t, y, f);
  if (t_final == 0.0) {
    arc.t1 = 0.0;
    traj.arcs.push_back(std::move(arc));
    traj.final_state = y;
    return traj;
  }

  double h = std::min(stepper.InitialStep(rhs, t, y, f, 1.0), t_final);
  bool rejected = false;
  long steps = 0;
  const double span_eps = 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, t_final);

  while (t < t_final) {
    if (++steps > options.max_steps) {
      throw Error(ErrorKind::kStepUnderflow, "flow exceeded the step budget");
    }
    bool last = false;
    if (t + 1.01 * h >= t_final) {
      h = t_final - t;
      last = true;
    }
    DormandPrince::Trial trial = stepper.Step(rhs, t, y, f, h);
    if (!std::isfinite(trial.error) || trial.error > 1.0) {
      h = stepper.NextStep(h, std::isfinite(trial.error) ? trial.error : 1e10, true);
      rejected = true;
      if (h < ode.min_step) throw Error(ErrorKind::kStepUnderflow, "flow step size underflow");
      continue;
    }

    // Search the accepted step for an exit from the current branch.
    const DenseStep& dense = trial.dense;
    const int samples = std::max(0, options.event_samples);
    double ta = t;
    double ga = ExitOnDense(sys, dense, t);
    double tb = 0.0;
    double gb = 0.0;
    bool crossed = false;
    for (int j = 1; j <= samples + 1; ++j) {
      const double tj = j == samples + 1 ? t + h : t + h * j / (samples + 1.0);
      const double gj = j == samples + 1 ? sys.Exit(trial.y1.data()) : ExitOnDense(sys, dense, tj);
      if (gj > 0.0) {
        tb = tj;
        gb = gj;
        crossed = true;
        break;
      }
      ta = tj;
      ga = gj;
    }

    if (!crossed) {
      if (options.store_dense) arc.steps.push_back(std::move(trial.dense));
      t = last ? t_final : t + h;
      y = std::move(trial.y1);
      f = std::move(trial.f1);
      dynamics.CheckAdmissible(y.head<7>());
      h = stepper.NextStep(h, trial.error, rejected);
      rejected = false;
      continue;
    }

    if (ga > 0.0) {
      throw Error(ErrorKind::kRegularityViolation,
                  "control branch left immediately after a switching");
    }
    const double width = std::max(1e-3 * options.event_tol, span_eps);
    std::uintmax_t iters = 200;
    const auto root = boost::math::tools::toms748_solve(
        [&](double s) { return ExitOnDense(sys, dense, s); }, ta, tb, ga, gb,
        [width](double a, double b) { return std::abs(b - a) <= width; }, iters);
    const double ts = 0.5 * (root.first + root.second);

    // Re-step exactly onto the switching time.
    const double hs = ts - t;
    Eigen::VectorXd ys;
    if (hs > span_eps) {
      DormandPrince::Trial exact = stepper.Step(rhs, t, y, f, hs);
      ys = std::move(exact.y1);
      if (options.store_dense) arc.steps.push_back(std::move(exact.dense));
    } else {
      ys = y;
    }
    dynamics.CheckAdmissible(ys.head<7>());

    SwitchingEvent ev;
    ev.t = ts;
    ev.x = ys.head<7>();
    ev.p = ys.segment<7>(7);
    ev.thrust_gain = dynamics.ThrustGain(ev.x, ev.p);
    ev.before = sys.branch();
    const Eigen::VectorXd zb = dense.Eval(tb);
    ev.after = NextBranch(ev.before, dynamics.ThrustGain(zb.head<7>(), zb.segment<7>(7)), lambda);
    ev.delta_rho = RhoJump(ev.before, ev.after, lambda);
    ev.H1_dot = dynamics.SwitchingFunctionDot(ev.x, ev.p);
    if (ev.delta_rho != 0.0 && !(std::abs(ev.H1_dot) >= options.regularity_floor)) {
      throw Error(ErrorKind::kRegularityViolation,
                  "switching is not regular: |dH1/dt| below floor");
    }

    if (k > 0 && ev.delta_rho != 0.0) {
      MutMat X(ys.data() + 14, 7, k);
      MutMat P(ys.data() + 14 + 7 * k, 7, k);
      const VariationalState minus{ts, X, P};
      const VariationalState plus =
          SwitchingJump(dynamics, lambda, ev, minus, options.regularity_floor, &ev.dt_dq);
      X = plus.X;
      P = plus.P;
    }

    arc.t1 = ts;
    traj.arcs.push_back(std::move(arc));
    traj.events.push_back(ev);

    const int n_events = static_cast<int>(traj.events.size());
    if (n_events > options.max_events) {
      throw Error(ErrorKind::kSingularArc, "switching count exceeded the event budget");
    }
    if (n_events >= options.chatter_events &&
        ts - traj.events[n_events - options.chatter_events].t < options.chatter_window) {
      throw Error(ErrorKind::kSingularArc, "switchings accumulate: singular arc suspected");
    }

    sys.set_branch(ev.after);
    arc = ArcSegment{};
    arc.t0 = ts;
    arc.branch = ev.after;
    t = ts;
    y = std::move(ys);
    rhs(t, y, f);
    h = std::max(h, 10.0 * ode.min_step);
    rejected = false;
  }

  arc.t1 = t_final;
  traj.arcs.push_back(std::move(arc));
  traj.final_state = y;
  traj.steps = steps;
  return traj;
}

double HamiltonianDrift(const Dynamics& dynamics, const ExtremalTrajectory& trajectory,
                        int samples_per_arc) {
  if (trajectory.arcs.empty()) return 0.0;
  const double lambda = trajectory.lambda;
  const Eigen::VectorXd z0 = trajectory.EvalOnArc(0, trajectory.arcs.front().t0);
  const double h0 = dynamics.HamiltonianOnBranch(z0.head<7>(), z0.segment<7>(7), lambda,
                                                 trajectory.arcs.front().branch);
  double drift = 0.0;
  const int n = std::max(samples_per_arc, 2);
  for (std::size_t a = 0; a < trajectory.arcs.size(); ++a) {
    const ArcSegment& arc = trajectory.arcs[a];
    if (arc.steps.empty()) continue;
    for (int j = 0; j < n; ++j) {
      const double t = arc.t0 + (arc.t1 - arc.t0) * j / (n - 1.0);
      const Eigen::VectorXd z = trajectory.EvalOnArc(a, t);
      const double h = dynamics.HamiltonianOnBranch(z.head<7>(), z.segment<7>(7), lambda,
                                                    arc.branch);
      drift = std::max(drift, std::abs(h - h0));
    }
  }
  return drift;
}

}  // namespace suffkit
