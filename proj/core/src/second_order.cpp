#include "suffkit/second_order.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <boost/math/tools/toms748_solve.hpp>

#include "suffkit/errors.hpp"

namespace suffkit {
namespace {

struct FamilyPoint {
  Vec7 x;
  Vec7 p;
  Vec14 zdot;
  SensitivityMatrix X;
  SensitivityMatrix P;
};

FamilyPoint PointOnArc(const Dynamics& dynamics, const ExtremalTrajectory& family,
                       std::size_t arc, double t) {
  const Eigen::VectorXd y = family.EvalOnArc(arc, t);
  const int k = family.columns;
  FamilyPoint out;
  out.x = y.head<7>();
  out.p = y.segment<7>(7);
  dynamics.CanonicalField(y.data(), family.lambda, family.arcs[arc].branch, out.zdot.data());
  out.X = Eigen::Map<const SensitivityMatrix>(y.data() + 14, 7, k);
  out.P = Eigen::Map<const SensitivityMatrix>(y.data() + 14 + 7 * k, 7, k);
  return out;
}

Mat7 StateJacobian(const FamilyPoint& pt) {
  Mat7 M;
  M.col(0) = pt.zdot.head<7>();
  M.rightCols<6>() = pt.X.leftCols<6>();
  return M;
}

double Sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

Verdict Combine(Verdict a, Verdict b) {
  if (a == Verdict::kFail || b == Verdict::kFail) return Verdict::kFail;
  if (a == Verdict::kIndeterminate || b == Verdict::kIndeterminate) {
    return Verdict::kIndeterminate;
  }
  return Verdict::kPass;
}

}  // namespace

const char* ToString(Verdict verdict) {
  switch (verdict) {
    case Verdict::kPass: return "pass";
    case Verdict::kFail: return "fail";
    case Verdict::kIndeterminate: return "indeterminate";
  }
  return "unknown";
}

double DeltaTrace::MaxAbs() const {
  double m = std::abs(delta_end);
  for (const DeltaArc& a : arcs) {
    for (const DeltaSample& s : a.samples) m = std::max(m, std::abs(s.delta));
  }
  for (const SwitchingDelta& s : switchings) {
    m = std::max({m, std::abs(s.minus), std::abs(s.plus)});
  }
  return m;
}

ExtremalTrajectory PropagateFamily(const Dynamics& dynamics, const Vec7& x0, const Vec7& p0,
                                   double t_end, double lambda, const FamilyBasis& E,
                                   const FlowOptions& flow) {
  const VariationSeed seed{SensitivityMatrix::Zero(7, kFamilyDim), E};
  FlowOptions opts = flow;
  opts.store_dense = true;
  return Propagate(dynamics, x0, p0, t_end, lambda, opts, &seed);
}

double DeltaAt(const Dynamics& dynamics, const ExtremalTrajectory& family, std::size_t arc,
               double t) {
  return StateJacobian(PointOnArc(dynamics, family, arc, t)).determinant();
}

DeltaTrace BuildDeltaTrace(const Dynamics& dynamics,
                           std::shared_ptr<const ExtremalTrajectory> family, double t_begin,
                           double t_end, int samples_per_arc, double one_sided_offset) {
  if (!family || family->columns != kFamilyDim) {
    throw Error(ErrorKind::kPrecondition, "delta trace needs a six-column family propagation");
  }
  const ExtremalTrajectory& fam = *family;
  const int n = std::max(samples_per_arc, 2);
  DeltaTrace tr;
  tr.t_begin = t_begin;
  tr.t_end = t_end;
  for (std::size_t a = 0; a < fam.arcs.size(); ++a) {
    const double lo = std::max(fam.arcs[a].t0, t_begin);
    const double hi = std::min(fam.arcs[a].t1, t_end);
    if (hi <= lo) continue;
    DeltaArc arc;
    arc.t0 = lo;
    arc.t1 = hi;
    arc.branch = fam.arcs[a].branch;
    arc.arc_index = a;
    arc.samples.reserve(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
      const double t = j == n - 1 ? hi : lo + (hi - lo) * j / (n - 1.0);
      arc.samples.push_back({t, DeltaAt(dynamics, fam, a, t)});
    }
    tr.arcs.push_back(std::move(arc));
  }
  for (std::size_t i = 0; i < fam.events.size(); ++i) {
    const SwitchingEvent& ev = fam.events[i];
    if (ev.delta_rho == 0.0 || ev.t <= t_begin || ev.t >= t_end) continue;
    SwitchingDelta sd;
    sd.t = ev.t;
    sd.H1_dot = ev.H1_dot;
    sd.minus = DeltaAt(dynamics, fam, i, ev.t - one_sided_offset);
    sd.plus = DeltaAt(dynamics, fam, i + 1, ev.t + one_sided_offset);
    tr.switchings.push_back(sd);
  }
  tr.delta_end = DeltaAt(dynamics, fam, fam.ArcIndex(t_end, Side::kBefore), t_end);
  tr.evaluate = [dynamics, family](std::size_t arc, double t) {
    return DeltaAt(dynamics, *family, arc, t);
  };
  return tr;
}

Condition1Result CheckCondition1(const DeltaTrace& trace, double zero_threshold, bool check_end) {
  Condition1Result out;
  for (const DeltaArc& arc : trace.arcs) {
    double running_max = 0.0;
    bool in_dip = false;
    for (std::size_t j = 0; j < arc.samples.size(); ++j) {
      const DeltaSample& s = arc.samples[j];
      if (s.t == 0.0) continue;  // delta(0) = 0 by construction
      const double v = std::abs(s.delta);
      if (j > 0 && arc.samples[j - 1].t != 0.0 &&
          Sign(arc.samples[j - 1].delta) * Sign(s.delta) < 0.0) {
        double ta = arc.samples[j - 1].t;
        double tb = s.t;
        double root;
        if (trace.evaluate) {
          std::uintmax_t iters = 100;
          const auto f = [&](double t) { return trace.evaluate(arc.arc_index, t); };
          const auto r = boost::math::tools::toms748_solve(
              f, ta, tb, arc.samples[j - 1].delta, s.delta,
              [](double a, double b) { return std::abs(b - a) <= 1e-12 * std::max(1.0, b); },
              iters);
          root = 0.5 * (r.first + r.second);
        } else {
          const double da = arc.samples[j - 1].delta;
          root = ta + (tb - ta) * da / (da - s.delta);
        }
        out.zeros.push_back(root);
      } else if (running_max > 0.0 && v < zero_threshold * running_max) {
        if (!in_dip) out.zeros.push_back(s.t);
        in_dip = true;
      } else {
        in_dip = false;
      }
      running_max = std::max(running_max, v);
    }
  }
  out.delta_end = trace.delta_end;
  if (check_end) {
    out.end_nonzero = std::abs(trace.delta_end) > zero_threshold * trace.MaxAbs();
  }
  out.verdict = out.zeros.empty() && out.end_nonzero ? Verdict::kPass : Verdict::kFail;
  return out;
}

Condition2Result CheckCondition2(const DeltaTrace& trace, double product_threshold) {
  Condition2Result out;
  const double scale = product_threshold * trace.MaxAbs();
  const double floor = scale * scale;
  for (const SwitchingDelta& s : trace.switchings) {
    SwitchingCheck c;
    c.t = s.t;
    c.minus = s.minus;
    c.plus = s.plus;
    c.product = s.minus * s.plus;
    if (std::abs(c.product) <= floor) {
      c.verdict = Verdict::kIndeterminate;
    } else {
      c.verdict = c.product > 0.0 ? Verdict::kPass : Verdict::kFail;
    }
    out.verdict = Combine(out.verdict, c.verdict);
    out.switchings.push_back(c);
  }
  return out;
}

Condition3Result CheckCondition3(const Dynamics& dynamics, const TargetManifold& manifold,
                                 const Vec7& x_f, const Vec7& p_f, Branch branch_f,
                                 const SensitivityMatrix& X_f, const SensitivityMatrix& P_f,
                                 double lambda, double pd_floor, bool force) {
  Condition3Result out;
  const int s = manifold.s();
  if (s == kStateDim) {
    out.vacuous = true;
    out.verdict = Verdict::kPass;
    return out;
  }
  Vec14 z, zdot;
  z << x_f, p_f;
  dynamics.CanonicalField(z.data(), lambda, branch_f, zdot.data());
  Mat7 dx, dp;
  dx.col(0) = zdot.head<7>();
  dx.rightCols<6>() = X_f.leftCols<6>();
  dp.col(0) = zdot.tail<7>();
  dp.rightCols<6>() = P_f.leftCols<6>();

  Eigen::FullPivLU<Mat7> lu(dx);
  if (lu.rank() < kStateDim && !force) {
    throw Error(ErrorKind::kPrecondition, "state Jacobian of the family is singular at tf");
  }
  out.singular = lu.rank() < kStateDim;
  // dp' dx^-1 = (dx^-T dp'^T)^T
  const Mat7 A = dx.transpose().partialPivLu().solve(dp.transpose()).transpose();

  const Eigen::RowVectorXd nu = ComputeMultipliers(manifold.Gradient(x_f), p_f);
  Mat7 curvature = Mat7::Zero();
  if (!manifold.affine()) {
    for (int i = 0; i < s; ++i) curvature += nu[i] * manifold.Hessian(i);
  }
  const Eigen::MatrixXd T = TangentBasis(manifold, x_f);
  out.matrix = T.transpose() * (A - curvature) * T;
  const Eigen::MatrixXd sym = 0.5 * (out.matrix + out.matrix.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  out.eigenvalues = eig.eigenvalues();
  const double scale = out.eigenvalues.cwiseAbs().sum();
  const double floor = pd_floor * scale;
  out.verdict = out.eigenvalues.minCoeff() > floor ? Verdict::kPass : Verdict::kFail;
  if (out.singular) out.verdict = Verdict::kIndeterminate;
  return out;
}

std::vector<double> FullSensitivityDeterminant(const Dynamics& dynamics, const Vec7& x0,
                                               const Vec7& p0, double tf, double lambda,
                                               const std::vector<double>& times,
                                               const FlowOptions& flow) {
  const VariationSeed seed{SensitivityMatrix::Zero(7, 7), SensitivityMatrix::Identity(7, 7)};
  FlowOptions opts = flow;
  opts.store_dense = true;
  const ExtremalTrajectory tr = Propagate(dynamics, x0, p0, tf, lambda, opts, &seed);
  std::vector<double> out;
  out.reserve(times.size());
  for (double t : times) {
    const Eigen::VectorXd y = tr.Eval(t, Side::kBefore);
    out.push_back(Eigen::Map<const Mat7>(y.data() + 14).determinant());
  }
  return out;
}

SufficiencyReport RunSufficiency(const ShootingProblem& problem, const ExtremalSolution& solution,
                                 const SufficiencyOptions& options) {
  const Dynamics& dyn = problem.dynamics;
  const double lambda = solution.lambda;
  const double tf = solution.unknowns.tf;
  const Vec7& p0 = solution.unknowns.p0;
  SufficiencyReport report;

  try {
    report.E = BuildFamilyBasis(dyn, problem.x0, p0, lambda);
  } catch (const Error& e) {
    report.assumptions.hamiltonian_regular = false;
    report.assumptions.detail = e.what();
    report.overall = Verdict::kFail;
    return report;
  }

  double min_h1dot = std::numeric_limits<double>::infinity();
  for (const SwitchingEvent& ev : solution.trajectory.events) {
    if (ev.delta_rho == 0.0) continue;
    min_h1dot = std::min(min_h1dot, std::abs(ev.H1_dot));
  }
  report.assumptions.min_abs_H1_dot = min_h1dot;
  if (min_h1dot < options.flow.regularity_floor) {
    report.assumptions.switchings_regular = false;
    report.assumptions.detail = "a switching has |dH1/dt| below the regularity floor";
    report.overall = Verdict::kFail;
    return report;
  }

  const FamilyBasis E = options.family_scale * report.E;
  const bool extend = options.extend_to > tf;
  std::shared_ptr<const ExtremalTrajectory> family;
  try {
    family = std::make_shared<const ExtremalTrajectory>(PropagateFamily(
        dyn, problem.x0, p0, extend ? options.extend_to : tf, lambda, E, options.flow));
  } catch (const Error& e) {
    if (!extend) throw;
    report.extension.performed = false;
    report.assumptions.detail = std::string("extension stopped: ") + e.what();
    family = std::make_shared<const ExtremalTrajectory>(
        PropagateFamily(dyn, problem.x0, p0, tf, lambda, E, options.flow));
  }

  const double offset =
      options.one_sided_offset > 0.0 ? options.one_sided_offset : 10.0 * options.flow.event_tol;
  report.trace = BuildDeltaTrace(dyn, family, 0.0, tf, options.samples_per_arc, offset);
  report.condition1 = CheckCondition1(report.trace, options.zero_threshold);
  report.condition2 = CheckCondition2(report.trace, options.product_threshold);

  const std::size_t arc_f = family->ArcIndex(tf, Side::kBefore);
  const FamilyPoint end = PointOnArc(dyn, *family, arc_f, tf);
  try {
    report.condition3 = CheckCondition3(dyn, problem.target, end.x, end.p,
                                        family->arcs[arc_f].branch, end.X, end.P, lambda,
                                        options.pd_floor);
  } catch (const Error&) {
    // Keep the matrix obtained through the numerically singular Jacobian for
    // the record; the verdict stays indeterminate.
    report.condition3 = CheckCondition3(dyn, problem.target, end.x, end.p,
                                        family->arcs[arc_f].branch, end.X, end.P, lambda,
                                        options.pd_floor, true);
  }

  // Determinant diagnostics along the sampled trace.
  const double beta_u = dyn.engine().beta * dyn.engine().u_max;
  DeterminantDiagnostics& diag = report.diagnostics;
  for (const DeltaArc& arc : report.trace.arcs) {
    for (const DeltaSample& s : arc.samples) {
      if (s.t == 0.0) continue;
      const FamilyPoint pt = PointOnArc(dyn, *family, arc.arc_index, s.t);
      const Mat7 M = StateJacobian(pt);
      double cols = 1.0;
      for (int j = 0; j < 7; ++j) cols *= M.col(j).norm();
      if (cols > 0.0) diag.max_hadamard_ratio = std::max(diag.max_hadamard_ratio, std::abs(s.delta) / cols);
      Vec7 w = pt.p;
      w[6] += 1.0 / beta_u;
      const double xn = pt.X.norm();
      if (xn > 0.0) {
        diag.cost_row_alignment =
            std::max(diag.cost_row_alignment, (w.transpose() * pt.X).norm() / (w.norm() * xn));
      }
    }
  }
  {
    const Mat7 M = StateJacobian(end);
    double cols = 1.0;
    for (int j = 0; j < 7; ++j) cols *= M.col(j).norm();
    diag.hadamard_ratio_end = cols > 0.0 ? std::abs(M.determinant()) / cols : 0.0;
    diag.hamiltonian_end = dyn.HamiltonianOnBranch(end.x, end.p, lambda, family->arcs[arc_f].branch);
  }

  if (extend && family->tf > tf) {
    ExtensionResult& ext = report.extension;
    ext.performed = true;
    ext.t_end = family->tf;
    ext.trace = BuildDeltaTrace(dyn, family, tf, family->tf, options.samples_per_arc, offset);
    ext.condition1 = CheckCondition1(ext.trace, options.zero_threshold, false);
    ext.condition2 = CheckCondition2(ext.trace, options.product_threshold);
    ext.conjugate_times = ext.condition1.zeros;
    for (const SwitchingCheck& c : ext.condition2.switchings) {
      if (c.verdict == Verdict::kFail) ext.conjugate_times.push_back(c.t);
    }
    std::sort(ext.conjugate_times.begin(), ext.conjugate_times.end());
  }

  report.family = family;
  Verdict overall = Combine(report.condition1.verdict, report.condition2.verdict);
  overall = Combine(overall, report.condition3.verdict);
  report.overall = overall;
  return report;
}

}  // namespace suffkit
