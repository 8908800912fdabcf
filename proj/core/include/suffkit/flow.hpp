#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "suffkit/dynamics.hpp"
#include "suffkit/ode.hpp"
#include "suffkit/types.hpp"

namespace suffkit {

struct FlowOptions {
  double rel_tol = 1e-12;
  double abs_tol = 1e-12;
  double event_tol = 1e-10;
  // |dH1/dt| below this at a bang-bang switching violates regularity.
  double regularity_floor = 1e-8;
  double max_step = 0.0;
  long max_steps = 2'000'000;
  // Dense samples per step searched for a branch exit in addition to the step end.
  int event_samples = 4;
  // More than `chatter_events` switchings within `chatter_window` is treated as a singular arc.
  int chatter_events = 40;
  double chatter_window = 1e-3;
  int max_events = 5000;
  // Keep the dense output of every accepted step.
  bool store_dense = true;
  // Local error control on the variational columns as well as on (x, p).
  bool control_variation_error = true;
};

struct SwitchingEvent {
  double t = 0.0;
  double delta_rho = 0.0;  // rho(t+) - rho(t-); zero for smoothed-cost kinks
  double H1_dot = 0.0;     // {H1, H0} at t
  double thrust_gain = 0.0;
  Vec7 x = Vec7::Zero();
  Vec7 p = Vec7::Zero();
  Branch before = Branch::kCoast;
  Branch after = Branch::kCoast;
  // Switching-time sensitivity dt/dq when variations are carried.
  Eigen::RowVectorXd dt_dq;
};

struct ArcSegment {
  double t0 = 0.0;
  double t1 = 0.0;
  Branch branch = Branch::kCoast;
  std::vector<DenseStep> steps;
};

// Initial sensitivities (dx/dq, dp'/dq) carried alongside the extremal.
struct VariationSeed {
  SensitivityMatrix X0;
  SensitivityMatrix P0;
};

enum class Side { kBefore, kAfter };

class ExtremalTrajectory {
 public:
  double lambda = 1.0;
  double t0 = 0.0;
  double tf = 0.0;
  int columns = 0;  // variational columns carried (0 when none)
  std::vector<ArcSegment> arcs;
  std::vector<SwitchingEvent> events;
  Eigen::VectorXd final_state;  // augmented state at tf
  long steps = 0;

  Vec7 FinalX() const { return final_state.head<7>(); }
  Vec7 FinalP() const { return final_state.segment<7>(7); }
  SensitivityMatrix FinalXq() const;
  SensitivityMatrix FinalPq() const;

  // Arc containing t; at a switching time `side` selects the arc before or after.
  std::size_t ArcIndex(double t, Side side = Side::kAfter) const;
  // Augmented state on a given arc (requires dense output).
  Eigen::VectorXd EvalOnArc(std::size_t arc, double t) const;
  Eigen::VectorXd Eval(double t, Side side = Side::kAfter) const;
  Vec7 StateAt(double t, Side side = Side::kAfter) const;
  Vec7 CostateAt(double t, Side side = Side::kAfter) const;

  // Maximal runs of thrusting (burn or interior) arcs.
  int BurnArcCount() const;
  int SwitchingCount() const;
  std::vector<double> SwitchingTimes() const;
};

// Integrates the canonical system of `dynamics` from (x0, p0) at t = 0 to
// t_final, restarting exactly at every branch change of the control law.
// With a seed, the variational matrices are propagated with jump updates at
// each switching.
//
// Errors: kFuelExhausted, kSingularity, kRegularityViolation, kSingularArc,
// kStepUnderflow.
ExtremalTrajectory Propagate(const Dynamics& dynamics, const Vec7& x0, const Vec7& p0,
                             double t_final, double lambda, const FlowOptions& options = {},
                             const VariationSeed* seed = nullptr);

// max_t |H(t) - H(0)| over `samples_per_arc` points of every arc.
double HamiltonianDrift(const Dynamics& dynamics, const ExtremalTrajectory& trajectory,
                        int samples_per_arc = 50);

// Sensitivity of a switching time: -(H1_x X + H1_p P) / dH1/dt.
// Throws Error(kRegularityViolation) when |H1_dot| < floor.
Eigen::RowVectorXd SwitchingTimeGradient(const RowVec14& switching_gradient, double H1_dot,
                                         const SensitivityMatrix& X, const SensitivityMatrix& P,
                                         double regularity_floor);

}  // namespace suffkit
