#include "suffkit/shooting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/LU>
#include <Eigen/QR>

namespace suffkit {
namespace {

struct Endpoint {
  Vec7 x;
  Vec7 p;
  Branch branch;
};

Endpoint PropagateEndpoint(const ShootingProblem& problem, const ShootingUnknowns& u,
                           double lambda) {
  if (!(u.tf > 0.0)) throw Error(ErrorKind::kPrecondition, "final time must be positive");
  FlowOptions flow = problem.flow;
  flow.store_dense = false;
  const ExtremalTrajectory tr = Propagate(problem.dynamics, problem.x0, u.p0, u.tf, lambda, flow);
  return {tr.FinalX(), tr.FinalP(), tr.arcs.back().branch};
}

Vec8 ResidualAt(const ShootingProblem& problem, const Endpoint& e, double lambda) {
  const TargetManifold& target = problem.target;
  const int s = target.s();
  Vec8 r;
  r.head(s) = target.Phi(e.x);
  if (s < kStateDim) {
    const Eigen::MatrixXd T = TangentBasis(target, e.x);
    r.segment(s, kStateDim - s) = T.transpose() * e.p;
  }
  r[7] = problem.dynamics.HamiltonianOnBranch(e.x, e.p, lambda, e.branch);
  return r;
}

}  // namespace

Vec8 ShootingUnknowns::ToVector() const {
  Vec8 v;
  v << p0, tf;
  return v;
}

ShootingUnknowns ShootingUnknowns::FromVector(const Vec8& v) {
  ShootingUnknowns u;
  u.p0 = v.head<7>();
  u.tf = v[7];
  return u;
}

Vec8 ShootingResidual(const ShootingProblem& problem, const ShootingUnknowns& u, double lambda) {
  return ResidualAt(problem, PropagateEndpoint(problem, u, lambda), lambda);
}

Eigen::Matrix<double, 8, 8> ShootingJacobianFd(const ShootingProblem& problem,
                                               const ShootingUnknowns& u, double lambda,
                                               double step) {
  const Vec8 v = u.ToVector();
  Eigen::Matrix<double, 8, 8> J;
  for (int j = 0; j < 8; ++j) {
    const double h = step * std::max(1.0, std::abs(v[j]));
    Vec8 vp = v, vm = v;
    vp[j] += h;
    vm[j] -= h;
    J.col(j) = (ShootingResidual(problem, ShootingUnknowns::FromVector(vp), lambda) -
                ShootingResidual(problem, ShootingUnknowns::FromVector(vm), lambda)) /
               (2.0 * h);
  }
  return J;
}

Eigen::Matrix<double, 8, 8> ShootingJacobianVariational(const ShootingProblem& problem,
                                                        const ShootingUnknowns& u,
                                                        double lambda) {
  const VariationSeed seed{SensitivityMatrix::Zero(7, 7), SensitivityMatrix::Identity(7, 7)};
  FlowOptions flow = problem.flow;
  flow.store_dense = false;
  const ExtremalTrajectory tr =
      Propagate(problem.dynamics, problem.x0, u.p0, u.tf, lambda, flow, &seed);
  const Vec7 xf = tr.FinalX();
  const Vec7 pf = tr.FinalP();
  const SensitivityMatrix X = tr.FinalXq();
  const SensitivityMatrix P = tr.FinalPq();

  Vec14 z, zdot;
  z << xf, pf;
  problem.dynamics.CanonicalField(z.data(), lambda, tr.arcs.back().branch, zdot.data());

  const int s = problem.target.s();
  const Eigen::MatrixXd G = problem.target.Gradient(xf);
  Eigen::Matrix<double, 8, 8> J = Eigen::Matrix<double, 8, 8>::Zero();
  J.topLeftCorner(s, 7) = G * X;
  J.block(0, 7, s, 1) = G * zdot.head<7>();
  if (s < kStateDim) {
    const Eigen::MatrixXd T = TangentBasis(problem.target, xf);
    J.block(s, 0, kStateDim - s, 7) = T.transpose() * P;
    J.block(s, 7, kStateDim - s, 1) = T.transpose() * zdot.tail<7>();
  }
  // H is a first integral: dH(tf)/dp0 = dH(0)/dp0 = H_p(x0, p0).
  Vec14 z0, z0dot;
  z0 << problem.x0, u.p0;
  problem.dynamics.CanonicalField(z0.data(), lambda, tr.arcs.front().branch, z0dot.data());
  J.block(7, 0, 1, 7) = z0dot.head<7>().transpose();
  J(7, 7) = 0.0;
  return J;
}

Eigen::RowVectorXd ComputeMultipliers(const Eigen::MatrixXd& dphi, const Vec7& p_f) {
  const Eigen::MatrixXd gram = dphi * dphi.transpose();
  Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
  lu.setThreshold(1e-12);
  if (lu.rank() < dphi.rows()) {
    throw Error(ErrorKind::kManifoldDegeneracy, "target constraint gradient is rank deficient");
  }
  const Eigen::VectorXd rhs = dphi * p_f;
  return lu.solve(rhs).transpose();
}

ExtremalSolution Evaluate(const ShootingProblem& problem, const ShootingUnknowns& u,
                          double lambda) {
  ExtremalSolution sol;
  sol.unknowns = u;
  sol.lambda = lambda;
  FlowOptions flow = problem.flow;
  flow.store_dense = true;
  sol.trajectory = Propagate(problem.dynamics, problem.x0, u.p0, u.tf, lambda, flow);
  const Endpoint e{sol.trajectory.FinalX(), sol.trajectory.FinalP(),
                   sol.trajectory.arcs.back().branch};
  sol.residual = ResidualAt(problem, e, lambda);
  sol.residual_norm = sol.residual.lpNorm<Eigen::Infinity>();
  sol.nu = ComputeMultipliers(problem.target.Gradient(e.x), e.p);
  return sol;
}

ExtremalSolution SolveShooting(const ShootingProblem& problem, const ShootingUnknowns& guess,
                               double lambda, const SolveOptions& options) {
  Vec8 v = guess.ToVector();
  Vec8 F;
  try {
    F = ShootingResidual(problem, guess, lambda);
  } catch (const Error& e) {
    throw DivergedError(std::string("initial guess does not propagate: ") + e.what(), guess,
                        std::numeric_limits<double>::infinity());
  }
  ShootingUnknowns best = guess;
  double best_norm = F.lpNorm<Eigen::Infinity>();
  int iter = 0;
  while (true) {
    const double norm_inf = F.lpNorm<Eigen::Infinity>();
    if (iter == 0 && options.on_iteration) options.on_iteration(iter, norm_inf, 1.0);
    if (norm_inf < options.tol) break;
    if (iter >= options.max_iterations) {
      throw DivergedError("shooting did not converge within the iteration cap", best, best_norm);
    }
    ++iter;
    const ShootingUnknowns cur = ShootingUnknowns::FromVector(v);
    Eigen::Matrix<double, 8, 8> J;
    try {
      J = options.variational_jacobian ? ShootingJacobianVariational(problem, cur, lambda)
                                       : ShootingJacobianFd(problem, cur, lambda, options.fd_step);
    } catch (const Error& e) {
      throw DivergedError(std::string("Jacobian evaluation failed: ") + e.what(), best, best_norm);
    }
    Vec8 dv = -J.fullPivLu().solve(F);
    if (!dv.allFinite()) {
      throw DivergedError("singular shooting Jacobian", best, best_norm);
    }
    const double tf_limit = options.max_tf_ratio * v[7];
    if (std::abs(dv[7]) > tf_limit) dv *= tf_limit / std::abs(dv[7]);

    const double f0 = F.norm();
    double alpha = 1.0;
    bool accepted = false;
    while (alpha >= options.min_damping) {
      const Vec8 trial = v + alpha * dv;
      try {
        const Vec8 Ft = ShootingResidual(problem, ShootingUnknowns::FromVector(trial), lambda);
        if (Ft.allFinite() && Ft.norm() <= (1.0 - 1e-4 * alpha) * f0) {
          v = trial;
          F = Ft;
          accepted = true;
          break;
        }
      } catch (const Error&) {
        // treat as a failed trial step
      }
      alpha *= 0.5;
    }
    if (options.on_iteration) options.on_iteration(iter, F.lpNorm<Eigen::Infinity>(), alpha);
    if (!accepted) {
      throw DivergedError("line search failed to reduce the shooting residual", best, best_norm);
    }
    const double n = F.lpNorm<Eigen::Infinity>();
    if (n < best_norm) {
      best_norm = n;
      best = ShootingUnknowns::FromVector(v);
    }
  }
  ExtremalSolution sol = Evaluate(problem, ShootingUnknowns::FromVector(v), lambda);
  sol.iterations = iter;
  return sol;
}

ExtremalSolution ContinueHomotopy(const ShootingProblem& problem, const ShootingUnknowns& guess,
                                  const std::vector<double>& schedule,
                                  const ContinuationOptions& options) {
  if (schedule.empty()) throw Error(ErrorKind::kPrecondition, "empty homotopy schedule");
  for (std::size_t i = 1; i < schedule.size(); ++i) {
    if (!(schedule[i] > schedule[i - 1])) {
      throw Error(ErrorKind::kPrecondition, "homotopy schedule must be increasing");
    }
  }
  std::vector<double> trace;
  ExtremalSolution sol;
  try {
    sol = SolveShooting(problem, guess, schedule.front(), options.solve);
  } catch (const Error& e) {
    throw ContinuationError(std::string("no solution at the first homotopy level: ") + e.what(),
                            trace, guess);
  }
  trace.push_back(sol.lambda);
  if (options.on_step) options.on_step(sol.lambda, sol);

  // Last two accepted points for the secant predictor.
  double lam_prev = sol.lambda;
  Vec8 v_prev = sol.unknowns.ToVector();
  bool have_prev = false;

  for (std::size_t k = 1; k < schedule.size(); ++k) {
    const double target = schedule[k];
    double step = std::min(target - sol.lambda, options.max_step);
    while (sol.lambda < target) {
      const double lam = std::min(sol.lambda + step, target);
      Vec8 pred = sol.unknowns.ToVector();
      if (options.secant_predictor && have_prev && sol.lambda > lam_prev) {
        pred += (lam - sol.lambda) / (sol.lambda - lam_prev) * (pred - v_prev);
      }
      try {
        ExtremalSolution next =
            SolveShooting(problem, ShootingUnknowns::FromVector(pred), lam, options.solve);
        lam_prev = sol.lambda;
        v_prev = sol.unknowns.ToVector();
        have_prev = true;
        sol = std::move(next);
        trace.push_back(lam);
        if (options.on_step) options.on_step(lam, sol);
        step = std::min(step * options.growth, options.max_step);
      } catch (const Error&) {
        step *= 0.5;
        if (step < options.min_step) {
          throw ContinuationError("homotopy step underflow", trace, sol.unknowns);
        }
      }
    }
  }
  return sol;
}

ShootingUnknowns CostateGuess(const Dynamics& dynamics, const Vec7& x0, double c, double tf,
                              double lambda) {
  if (dynamics.chart() != Chart::kMeoe) {
    throw Error(ErrorKind::kPrecondition, "cold-start guess needs the MEOE chart");
  }
  ShootingUnknowns u;
  u.p0 << c, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0;
  u.tf = tf;
  // H is affine in p_l on coast and nearly so elsewhere; a few secant steps settle it.
  const double ldot = dynamics.DriftField(x0)[5];
  for (int it = 0; it < 50; ++it) {
    const double h = dynamics.Hamiltonian(x0, u.p0, lambda);
    if (std::abs(h) < 1e-14) break;
    u.p0[5] -= h / ldot;
  }
  return u;
}

double EstimateTransferTime(const Vec7& x0, const TargetManifold& target) {
  if (target.chart() != Chart::kMeoe || target.s() < 6) {
    throw Error(ErrorKind::kPrecondition, "transfer time estimate needs an MEOE orbit target");
  }
  // Unpack P, e and l_f of the target assuming the [I6 0] layout of MeoeTarget.
  const Eigen::VectorXd& b = target.offset();
  auto mean_motion = [](double P, double ex, double ey) {
    const double a = P / (1.0 - ex * ex - ey * ey);
    return 1.0 / std::sqrt(a * a * a);
  };
  const double n0 = mean_motion(x0[0], x0[1], x0[2]);
  const double nf = mean_motion(b[0], b[1], b[2]);
  const double sweep = b[5] - x0[5];
  if (!(sweep > 0.0)) throw Error(ErrorKind::kPrecondition, "final longitude must exceed l0");
  return sweep / (0.5 * (n0 + nf));
}

ExtremalSolution SolveFromScratch(const ShootingProblem& problem,
                                  const std::vector<double>& schedule,
                                  const ContinuationOptions& options,
                                  const GuessStrategy& strategy) {
  if (schedule.empty()) throw Error(ErrorKind::kPrecondition, "empty homotopy schedule");
  const double tf0 = EstimateTransferTime(problem.x0, problem.target);
  const double lam0 = schedule.front();
  std::string last_error = "empty guess grid";
  for (double factor : strategy.tf_factors) {
    for (double c : strategy.scales) {
      const ShootingUnknowns guess =
          CostateGuess(problem.dynamics, problem.x0, c, factor * tf0, lam0);
      ExtremalSolution start;
      try {
        start = SolveShooting(problem, guess, lam0, options.solve);
      } catch (const Error& e) {
        last_error = e.what();
        if (strategy.on_attempt) strategy.on_attempt(c, guess.tf, false);
        continue;
      }
      if (strategy.on_attempt) strategy.on_attempt(c, guess.tf, true);
      try {
        return ContinueHomotopy(problem, start.unknowns, schedule, options);
      } catch (const ContinuationError& e) {
        last_error = e.what();
      }
    }
  }
  throw DivergedError("no guess of the grid converged: " + last_error, ShootingUnknowns{},
                      std::numeric_limits<double>::infinity());
}

}  // namespace suffkit
