#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

namespace suffkit {

// Continuous extension of one accepted Dormand-Prince step (fourth order,
// Hairer's coefficients).
struct DenseStep {
  double t0 = 0.0;
  double h = 0.0;
  Eigen::Matrix<double, Eigen::Dynamic, 5> coeffs;

  double t1() const { return t0 + h; }
  bool Contains(double t) const { return t >= t0 && t <= t0 + h; }
  Eigen::VectorXd Eval(double t) const;
  double EvalComponent(double t, int i) const;
};

struct OdeOptions {
  double rel_tol = 1e-12;
  double abs_tol = 1e-12;
  double initial_step = 0.0;  // 0: automatic
  double max_step = 0.0;      // 0: unbounded
  double min_step = 1e-14;
  long max_steps = 2'000'000;
  double safety = 0.9;
  double min_factor = 0.2;
  double max_factor = 10.0;
  // Optional per-component weight on the local error (0 excludes a component).
  Eigen::VectorXd error_weight;
};

// Embedded Runge-Kutta 5(4) pair of Dormand and Prince with step size control
// and dense output.
class DormandPrince {
 public:
  using Rhs = std::function<void(double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy)>;

  struct Trial {
    double error = 0.0;  // weighted RMS norm, accept when <= 1
    Eigen::VectorXd y1;
    Eigen::VectorXd f1;
    DenseStep dense;
  };

  explicit DormandPrince(OdeOptions options) : options_(std::move(options)) {}

  const OdeOptions& options() const { return options_; }

  // One step of size h from (t, y) with f = rhs(t, y).
  Trial Step(const Rhs& rhs, double t, const Eigen::VectorXd& y, const Eigen::VectorXd& f,
             double h) const;

  // Proposed next step size after an attempt with the given error norm.
  double NextStep(double h, double error, bool last_rejected) const;

  double InitialStep(const Rhs& rhs, double t, const Eigen::VectorXd& y,
                     const Eigen::VectorXd& f, double direction) const;

  // Integrates from t0 to t1 (t1 > t0) and returns y(t1). Each accepted step
  // is passed to `on_step` when provided.
  Eigen::VectorXd Integrate(const Rhs& rhs, double t0, const Eigen::VectorXd& y0, double t1,
                            const std::function<void(const DenseStep&)>& on_step = {},
                            long* steps_taken = nullptr) const;

 private:
  double ErrorNorm(const Eigen::VectorXd& err, const Eigen::VectorXd& y0,
                   const Eigen::VectorXd& y1) const;

  OdeOptions options_;
};

}  // namespace suffkit
