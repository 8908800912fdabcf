#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "suffkit/dynamics.hpp"
#include "suffkit/flow.hpp"
#include "suffkit/manifold.hpp"
#include "suffkit/shooting.hpp"
#include "suffkit/variational.hpp"

namespace suffkit {

enum class Verdict { kPass, kFail, kIndeterminate };
const char* ToString(Verdict verdict);

struct DeltaSample {
  double t = 0.0;
  double delta = 0.0;
};

struct DeltaArc {
  double t0 = 0.0;
  double t1 = 0.0;
  Branch branch = Branch::kCoast;
  std::size_t arc_index = 0;  // index into the propagated trajectory
  std::vector<DeltaSample> samples;
};

struct SwitchingDelta {
  double t = 0.0;
  double minus = 0.0;  // delta(t_i-)
  double plus = 0.0;   // delta(t_i+)
  double H1_dot = 0.0;
};

// delta(t) = det[xdot | dx/dq] sampled per arc, with one-sided values at the
// switchings in the window.
struct DeltaTrace {
  double t_begin = 0.0;
  double t_end = 0.0;
  std::vector<DeltaArc> arcs;
  std::vector<SwitchingDelta> switchings;
  double delta_end = 0.0;
  // delta on a given arc of the underlying trajectory; empty for synthetic traces.
  std::function<double(std::size_t arc, double t)> evaluate;

  double MaxAbs() const;
};

struct Condition1Result {
  Verdict verdict = Verdict::kPass;
  std::vector<double> zeros;  // located sign changes or dips
  double delta_end = 0.0;
  bool end_nonzero = true;
};

struct SwitchingCheck {
  double t = 0.0;
  double minus = 0.0;
  double plus = 0.0;
  double product = 0.0;
  Verdict verdict = Verdict::kPass;
};

struct Condition2Result {
  Verdict verdict = Verdict::kPass;
  std::vector<SwitchingCheck> switchings;
};

struct Condition3Result {
  Verdict verdict = Verdict::kPass;
  bool vacuous = false;
  bool singular = false;        // [xdot | X] numerically rank deficient at tf
  Eigen::MatrixXd matrix;       // (7 - s) x (7 - s), canonical units
  Eigen::VectorXd eigenvalues;  // of the symmetric part
};

struct AssumptionChecks {
  bool hamiltonian_regular = true;  // f(x0, u(x0, p0)) != 0
  bool switchings_regular = true;   // |dH1/dt| above the floor at every switching
  double min_abs_H1_dot = 0.0;
  std::string detail;
};

struct ExtensionResult {
  bool performed = false;
  double t_end = 0.0;
  DeltaTrace trace;  // on [tf, t_end]
  Condition1Result condition1;
  Condition2Result condition2;
  std::vector<double> conjugate_times;
};

// Diagnostics of the determinant test. `hadamard_ratio` is
// |delta| / prod |columns| of [xdot | X] at t_f; `cost_row_alignment` is the
// largest relative size of w X along the trace, with w = p + e_m / (beta u_max).
struct DeterminantDiagnostics {
  double hadamard_ratio_end = 0.0;
  double max_hadamard_ratio = 0.0;
  double cost_row_alignment = 0.0;
  double hamiltonian_end = 0.0;
};

struct SufficiencyReport {
  AssumptionChecks assumptions;
  DeltaTrace trace;
  Condition1Result condition1;
  Condition2Result condition2;
  Condition3Result condition3;
  ExtensionResult extension;
  DeterminantDiagnostics diagnostics;
  FamilyBasis E;
  // Extremal with the q-family variations, over [0, max(tf, extend_to)].
  std::shared_ptr<const ExtremalTrajectory> family;
  Verdict overall = Verdict::kPass;
};

struct SufficiencyOptions {
  int samples_per_arc = 400;
  double zero_threshold = 1e-8;     // relative to the running max of |delta| on an arc
  double product_threshold = 1e-8;  // |delta-| |delta+| below (thr max|delta|)^2 is indeterminate
  double pd_floor = 1e-10;
  double extend_to = 0.0;  // canonical time; <= tf disables the extension
  double one_sided_offset = 0.0;  // 0: ten event tolerances
  // Multiplies E, for scale-covariance checks.
  double family_scale = 1.0;
  FlowOptions flow;
};

// Propagates the extremal with the family variations X(0) = 0, P(0) = E.
ExtremalTrajectory PropagateFamily(const Dynamics& dynamics, const Vec7& x0, const Vec7& p0,
                                   double t_end, double lambda, const FamilyBasis& E,
                                   const FlowOptions& flow);

double DeltaAt(const Dynamics& dynamics, const ExtremalTrajectory& family, std::size_t arc,
               double t);

DeltaTrace BuildDeltaTrace(const Dynamics& dynamics,
                           std::shared_ptr<const ExtremalTrajectory> family, double t_begin,
                           double t_end, int samples_per_arc, double one_sided_offset);

Condition1Result CheckCondition1(const DeltaTrace& trace, double zero_threshold = 1e-8,
                                 bool check_end = true);
Condition2Result CheckCondition2(const DeltaTrace& trace, double product_threshold = 1e-8);

// Tangent-projected final-manifold matrix from dx/dq, dp'/dq at tf.
// Throws Error(kPrecondition) when [xdot | X] is singular at tf, unless `force`
// is set; then the matrix is formed anyway and the verdict is indeterminate.
Condition3Result CheckCondition3(const Dynamics& dynamics, const TargetManifold& manifold,
                                 const Vec7& x_f, const Vec7& p_f, Branch branch_f,
                                 const SensitivityMatrix& X_f, const SensitivityMatrix& P_f,
                                 double lambda, double pd_floor = 1e-10,
                                 bool force = false);

// Determinant of the full costate sensitivity dx/dp0 (X(0) = 0, P(0) = I) at
// the given times.
std::vector<double> FullSensitivityDeterminant(const Dynamics& dynamics, const Vec7& x0,
                                               const Vec7& p0, double tf, double lambda,
                                               const std::vector<double>& times,
                                               const FlowOptions& flow);

SufficiencyReport RunSufficiency(const ShootingProblem& problem, const ExtremalSolution& solution,
                                 const SufficiencyOptions& options = {});

}  // namespace suffkit
