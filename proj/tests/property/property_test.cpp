// Property suite: invariants that hold for any converged extremal, checked on
// short constructed transfers so no long continuation is needed.
#include <gtest/gtest.h>

#include "criteria.hpp"
#include "fixtures.hpp"

namespace {

using namespace suffkit;

const fixtures::ConstructedExtremal& Constructed() {
  static const fixtures::ConstructedExtremal c = fixtures::MakeConstructedExtremal();
  return c;
}

const fixtures::ShortTransfer& Short() {
  static const fixtures::ShortTransfer s = fixtures::SolveShortTransfer();
  return s;
}

TEST(ConstructedExtremal, HasTwoRegularSwitchingsAndZeroHamiltonian) {
  const auto& c = Constructed();
  ASSERT_EQ(c.trajectory.SwitchingCount(), 2);
  EXPECT_EQ(c.trajectory.BurnArcCount(), 2);
  EXPECT_EQ(c.trajectory.arcs.front().branch, Branch::kBurn);
  for (const SwitchingEvent& ev : c.trajectory.events) EXPECT_GT(std::abs(ev.H1_dot), 1e-3);
  EXPECT_LT(std::abs(c.dynamics.Hamiltonian(c.x0, c.p0, 1.0)), 1e-14);
}

TEST(HamiltonianStationarity, ConvergedShortTransfer) {
  const auto& s = Short();
  ASSERT_LT(s.solution.residual_norm, 1e-10);
  const criteria::Outcome o = criteria::HamiltonianStationarity(s.problem.dynamics, s.solution);
  EXPECT_TRUE(o.pass) << o.detail;
}

TEST(HamiltonianStationarity, ConstructedExtremal) {
  const auto& c = Constructed();
  EXPECT_LT(criteria::MaxAbsHamiltonian(c.dynamics, c.trajectory), 1e-8);
}

TEST(FreeTimeDegeneracy, FullDeterminantVanishesWhileFamilyDeterminantDoesNot) {
  const criteria::Outcome o = criteria::FreeTimeDegeneracy(Constructed());
  EXPECT_TRUE(o.pass) << o.detail;
}

TEST(FreeTimeDegeneracy, FullDeterminantIsNumericallyZero) {
  const criteria::DegeneracyMeasure m = criteria::MeasureDegeneracy(Constructed());
  // Scale of the 7x7 sensitivity entries is O(1e1..1e2); a structurally
  // nonsingular matrix would have a determinant many orders above this.
  EXPECT_LT(m.max_abs_full_det, 1e-6) << "max |det dx/dp0| = " << m.max_abs_full_det;
}

TEST(VariationalOracle, ColumnsMatchFiniteDifferenceFamilies) {
  const criteria::Outcome o = criteria::VariationalOracle(Constructed());
  EXPECT_TRUE(o.pass) << o.detail;
}

TEST(VariationalOracle, FirstOrderConvergenceOfForwardDifferences) {
  const auto& c = Constructed();
  const FamilyBasis E = BuildFamilyBasis(c.dynamics, c.x0, c.p0, 1.0);
  const ExtremalTrajectory family =
      PropagateFamily(c.dynamics, c.x0, c.p0, c.tf, 1.0, E, FlowOptions{});
  const double t = 0.5 * family.SwitchingTimes().front();
  const Eigen::VectorXd y = family.Eval(t);
  const Eigen::Matrix<double, 14, 1> base = criteria::EndpointOf(c, c.p0, t);
  for (int j = 0; j < 6; ++j) {
    Eigen::Matrix<double, 14, 1> var;
    var << y.segment<7>(14 + 7 * j), y.segment<7>(56 + 7 * j);
    auto err = [&](double eps) {
      const Vec7 p = c.p0 + eps * E.col(j);
      return ((criteria::EndpointOf(c, p, t) - base) / eps - var).norm() / var.norm();
    };
    // step sizes large enough that truncation dominates integrator noise
    const double e3 = err(1e-3), e4 = err(1e-4);
    EXPECT_LT(e4, 1e-3) << "column " << j;
    // forward differences: the error should shrink roughly tenfold, unless the
    // flow is linear along this column (homogeneous directions) and the error
    // is already at integrator level
    if (e3 > 1e-8) EXPECT_GT(e3 / e4, 3.0) << "column " << j << ": " << e3 << " vs " << e4;
  }
}

TEST(SwitchingTimeOracle, GradientMatchesFiniteDifferences) {
  const criteria::Outcome o = criteria::SwitchingTimeOracle(Constructed());
  EXPECT_TRUE(o.pass) << o.detail;
}

TEST(SwitchingTimeOracle, PerturbingAlongGradientDelaysTheSwitching) {
  const auto& c = Constructed();
  const FamilyBasis E = BuildFamilyBasis(c.dynamics, c.x0, c.p0, 1.0);
  const ExtremalTrajectory family =
      PropagateFamily(c.dynamics, c.x0, c.p0, c.tf, 1.0, E, FlowOptions{});
  for (std::size_t i = 0; i < family.events.size(); ++i) {
    const Eigen::RowVectorXd g = family.events[i].dt_dq;
    const Vec7 dp = 1e-6 * E * g.transpose() / g.norm();
    const ExtremalTrajectory moved = Propagate(c.dynamics, c.x0, c.p0 + dp, c.tf, 1.0);
    EXPECT_GT(moved.events.at(i).t, family.events[i].t) << "switching " << i;
  }
}

TEST(CoastVolume, StmDeterminantAndKeplerInvariants) {
  const criteria::Outcome o = criteria::CoastVolume();
  EXPECT_TRUE(o.pass) << o.detail;
}

TEST(CoastVolume, StmMatchesIndependentIntegration) {
  const criteria::CoastMeasure m = criteria::MeasureCoast();
  EXPECT_LT(m.stm_error, 1e-8);
}

TEST(ManifoldAlgebra, TangentBasisAndMultipliersAtConvergence) {
  const criteria::Outcome o = criteria::ManifoldAlgebra(Short());
  EXPECT_TRUE(o.pass) << o.detail;
}

TEST(ManifoldAlgebra, MultipliersAreTheFirstSixFinalCostates) {
  const auto& s = Short();
  const Vec7 pf = s.solution.trajectory.FinalP();
  ASSERT_EQ(s.solution.nu.size(), 6);
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(s.solution.nu[i], pf[i], 1e-12 * std::abs(pf[i]) + 1e-14);
  EXPECT_LT(std::abs(pf[6]), 1e-9);
}

TEST(DeltaScaleCovariance, ScalingTheBasisScalesDeltaBySixthPower) {
  const auto& c = Constructed();
  const FamilyBasis E = BuildFamilyBasis(c.dynamics, c.x0, c.p0, 1.0);
  const double scale = 2.0;
  const ExtremalTrajectory f1 = PropagateFamily(c.dynamics, c.x0, c.p0, c.tf, 1.0, E, FlowOptions{});
  const ExtremalTrajectory f2 =
      PropagateFamily(c.dynamics, c.x0, c.p0, c.tf, 1.0, scale * E, FlowOptions{});
  for (int k = 1; k <= 8; ++k) {
    const double t = c.tf * k / 8.5;
    const std::size_t a1 = f1.ArcIndex(t), a2 = f2.ArcIndex(t);
    const double d1 = DeltaAt(c.dynamics, f1, a1, t), d2 = DeltaAt(c.dynamics, f2, a2, t);
    // rounding floor: a determinant is only resolved relative to the product
    // of its column norms
    const Eigen::VectorXd y = f2.EvalOnArc(a2, t);
    Vec14 z = y.head<14>(), zdot;
    c.dynamics.CanonicalField(z.data(), 1.0, f2.arcs[a2].branch, zdot.data());
    double cols = zdot.head<7>().norm();
    for (int j = 0; j < 6; ++j) cols *= y.segment<7>(14 + 7 * j).norm();
    EXPECT_NEAR(d2, std::pow(scale, 6) * d1, 1e-6 * std::abs(std::pow(scale, 6) * d1) + 1e-12 * cols)
        << "t = " << t;
  }
}

TEST(DeltaScaleCovariance, VerdictsInvariantUnderScaling) {
  const auto& s = Short();
  SufficiencyOptions base;
  base.samples_per_arc = 100;
  SufficiencyOptions scaled = base;
  scaled.family_scale = 3.0;
  const SufficiencyReport r1 = RunSufficiency(s.problem, s.solution, base);
  const SufficiencyReport r2 = RunSufficiency(s.problem, s.solution, scaled);
  EXPECT_EQ(r1.condition1.verdict, r2.condition1.verdict);
  EXPECT_EQ(r1.condition2.verdict, r2.condition2.verdict);
  EXPECT_EQ(r1.condition3.verdict, r2.condition3.verdict);
  EXPECT_EQ(r1.overall, r2.overall);
}

TEST(DeltaTrace, VanishesAtTheInitialTime) {
  const auto& c = Constructed();
  const FamilyBasis E = BuildFamilyBasis(c.dynamics, c.x0, c.p0, 1.0);
  const ExtremalTrajectory f = PropagateFamily(c.dynamics, c.x0, c.p0, c.tf, 1.0, E, FlowOptions{});
  EXPECT_EQ(DeltaAt(c.dynamics, f, 0, 0.0), 0.0);
}

TEST(HamiltonianFirstIntegral, DriftStaysAtIntegratorLevel) {
  const auto& c = Constructed();
  EXPECT_LT(HamiltonianDrift(c.dynamics, c.trajectory), 1e-9);
}

}  // namespace
