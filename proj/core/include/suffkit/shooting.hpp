#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "suffkit/dynamics.hpp"
#include "suffkit/errors.hpp"
#include "suffkit/flow.hpp"
#include "suffkit/manifold.hpp"

namespace suffkit {

struct ShootingUnknowns {
  Vec7 p0 = Vec7::Zero();
  double tf = 0.0;

  Vec8 ToVector() const;
  static ShootingUnknowns FromVector(const Vec8& v);
};

struct ShootingProblem {
  Dynamics dynamics;
  Vec7 x0;
  TargetManifold target;
  FlowOptions flow;
};

// (phi(x(tf)), T' p(tf), H(tf)): s + (7 - s) + 1 = 8 equations.
Vec8 ShootingResidual(const ShootingProblem& problem, const ShootingUnknowns& u, double lambda);

// Central finite differences, relative step `step` on each unknown.
Eigen::Matrix<double, 8, 8> ShootingJacobianFd(const ShootingProblem& problem,
                                               const ShootingUnknowns& u, double lambda,
                                               double step = 1e-7);

// Jacobian from the full costate sensitivity dx/dp0, dp'/dp0. Exact for affine
// targets.
Eigen::Matrix<double, 8, 8> ShootingJacobianVariational(const ShootingProblem& problem,
                                                        const ShootingUnknowns& u,
                                                        double lambda);

// nu = p(tf) dphi' (dphi dphi')^-1.
// Throws Error(kManifoldDegeneracy) when dphi is rank deficient.
Eigen::RowVectorXd ComputeMultipliers(const Eigen::MatrixXd& dphi, const Vec7& p_f);

struct ExtremalSolution {
  ShootingUnknowns unknowns;
  double lambda = 1.0;
  ExtremalTrajectory trajectory;
  Vec8 residual = Vec8::Zero();
  double residual_norm = 0.0;  // infinity norm
  Eigen::RowVectorXd nu;
  int iterations = 0;
};

struct SolveOptions {
  double tol = 1e-10;
  int max_iterations = 40;
  double fd_step = 1e-7;
  bool variational_jacobian = false;
  double min_damping = 1.0 / 1024.0;
  // Largest relative change of tf accepted in a single Newton update.
  double max_tf_ratio = 0.3;
  std::function<void(int iteration, double residual_norm, double damping)> on_iteration;
};

class DivergedError : public Error {
 public:
  DivergedError(const std::string& what, ShootingUnknowns best, double best_norm)
      : Error(ErrorKind::kDiverged, what), best_(best), best_norm_(best_norm) {}
  const ShootingUnknowns& best() const { return best_; }
  double best_norm() const { return best_norm_; }

 private:
  ShootingUnknowns best_;
  double best_norm_;
};

// Damped Newton iteration with backtracking on the residual norm.
ExtremalSolution SolveShooting(const ShootingProblem& problem, const ShootingUnknowns& guess,
                               double lambda, const SolveOptions& options = {});

// Propagates a converged (or candidate) solution with dense output and fills
// the residual and multipliers.
ExtremalSolution Evaluate(const ShootingProblem& problem, const ShootingUnknowns& u,
                          double lambda);

struct ContinuationOptions {
  SolveOptions solve;
  double min_step = 1e-4;
  double max_step = 0.25;
  double growth = 1.5;
  bool secant_predictor = true;
  std::function<void(double lambda, const ExtremalSolution&)> on_step;
};

class ContinuationError : public Error {
 public:
  ContinuationError(const std::string& what, std::vector<double> trace, ShootingUnknowns last)
      : Error(ErrorKind::kContinuationStuck, what), trace_(std::move(trace)), last_(last) {}
  const std::vector<double>& lambda_trace() const { return trace_; }
  const ShootingUnknowns& last() const { return last_; }

 private:
  std::vector<double> trace_;
  ShootingUnknowns last_;
};

// Chain of solves along `schedule` (increasing, ending at the last entry),
// warm-started from the previous solution, halving the step on failure.
ExtremalSolution ContinueHomotopy(const ShootingProblem& problem, const ShootingUnknowns& guess,
                                  const std::vector<double>& schedule,
                                  const ContinuationOptions& options = {});

// Cold-start guess: p0 = (c, 0, 0, 0, 0, p_l, 0) with p_l chosen so that
// H(x0, p0) = 0 at `lambda`. MEOE chart only.
ShootingUnknowns CostateGuess(const Dynamics& dynamics, const Vec7& x0, double c, double tf,
                              double lambda);

// Revolution-count estimate of the transfer time: the longitude to sweep
// divided by the mean of the initial and final mean motions. MEOE chart only.
double EstimateTransferTime(const Vec7& x0, const TargetManifold& target);

struct GuessStrategy {
  std::vector<double> scales = {10.0, 5.0, 20.0, 40.0};
  std::vector<double> tf_factors = {1.05, 1.0, 1.15, 0.95, 1.3};
  std::function<void(double scale, double tf, bool converged)> on_attempt;
};

// Scans the guess grid with a solve at the first homotopy level and continues
// the first converged point along `schedule`.
ExtremalSolution SolveFromScratch(const ShootingProblem& problem,
                                  const std::vector<double>& schedule,
                                  const ContinuationOptions& options = {},
                                  const GuessStrategy& strategy = {});

}  // namespace suffkit
