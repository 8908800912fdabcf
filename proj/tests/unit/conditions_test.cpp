#include <cmath>
#include <memory>
#include <numbers>
#include <random>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "suffkit/errors.hpp"
#include "suffkit/second_order.hpp"

namespace {

using namespace suffkit;

DeltaArc Arc(double t0, double t1, const std::function<double(double)>& f, int n = 200) {
  DeltaArc a;
  a.t0 = t0;
  a.t1 = t1;
  for (int i = 0; i <= n; ++i) {
    const double t = t0 + (t1 - t0) * i / n;
    a.samples.push_back({t, f(t)});
  }
  return a;
}

TEST(Condition1, SmoothNonvanishingTracePasses) {
  DeltaTrace tr;
  tr.arcs.push_back(Arc(0.0, 1.0, [](double t) { return t * (2.0 - t); }));
  tr.arcs.push_back(Arc(1.0, 3.0, [](double t) { return 1.0 + t; }));
  tr.delta_end = 4.0;
  const Condition1Result r = CheckCondition1(tr);
  EXPECT_EQ(r.verdict, Verdict::kPass);
  EXPECT_TRUE(r.zeros.empty());
  EXPECT_TRUE(r.end_nonzero);
}

TEST(Condition1, InteriorSignChangeLocated) {
  DeltaTrace tr;
  tr.arcs.push_back(Arc(0.0, 2.0, [](double t) { return t * (1.3 - t); }, 201));
  tr.delta_end = -1.4;
  const Condition1Result r = CheckCondition1(tr);
  EXPECT_EQ(r.verdict, Verdict::kFail);
  ASSERT_EQ(r.zeros.size(), 1u);
  EXPECT_NEAR(r.zeros[0], 1.3, 1e-4);
}

TEST(Condition1, RootRefinedWithEvaluator) {
  DeltaTrace tr;
  const auto f = [](double t) { return std::sin(3.0 * t); };
  DeltaArc a = Arc(0.0, 2.0, f, 7);
  a.arc_index = 0;
  tr.arcs.push_back(a);
  tr.evaluate = [&](std::size_t, double t) { return f(t); };
  tr.delta_end = f(2.0);
  const Condition1Result r = CheckCondition1(tr);
  ASSERT_EQ(r.zeros.size(), 1u);
  EXPECT_NEAR(r.zeros[0], std::numbers::pi / 3.0, 1e-11);
}

TEST(Condition1, TouchingZeroIsCaught) {
  DeltaTrace tr;
  // double root at t = 1, no sign change
  tr.arcs.push_back(Arc(0.0, 2.0, [](double t) { return (t - 1.0) * (t - 1.0) + 1e-14; }));
  tr.delta_end = 1.0;
  const Condition1Result r = CheckCondition1(tr);
  EXPECT_EQ(r.verdict, Verdict::kFail);
  ASSERT_FALSE(r.zeros.empty());
  EXPECT_NEAR(r.zeros[0], 1.0, 0.02);
}

TEST(Condition1, VanishingEndFails) {
  DeltaTrace tr;
  tr.arcs.push_back(Arc(0.0, 1.0, [](double t) { return t * (1.0 - t) + 1e-3 * t; }));
  tr.delta_end = 1e-20;
  EXPECT_EQ(CheckCondition1(tr).verdict, Verdict::kFail);
  EXPECT_FALSE(CheckCondition1(tr).end_nonzero);
  // on an extension the end value is not part of the test
  EXPECT_TRUE(CheckCondition1(tr, 1e-8, false).end_nonzero);
}

TEST(Condition2, EqualOneSidedValuesPass) {
  DeltaTrace tr;
  tr.switchings.push_back({1.0, 0.7, 0.7, 0.3});
  tr.switchings.push_back({2.0, -0.2, -0.5, -0.3});
  const Condition2Result r = CheckCondition2(tr);
  EXPECT_EQ(r.verdict, Verdict::kPass);
  ASSERT_EQ(r.switchings.size(), 2u);
  EXPECT_NEAR(r.switchings[0].product, 0.49, 1e-15);
  EXPECT_GT(r.switchings[1].product, 0.0);
}

TEST(Condition2, FoldFails) {
  DeltaTrace tr;
  tr.switchings.push_back({1.0, 0.7, 0.7, 0.3});
  tr.switchings.push_back({2.5, 0.4, -0.6, 0.3});
  const Condition2Result r = CheckCondition2(tr);
  EXPECT_EQ(r.verdict, Verdict::kFail);
  EXPECT_EQ(r.switchings[0].verdict, Verdict::kPass);
  EXPECT_EQ(r.switchings[1].verdict, Verdict::kFail);
}

TEST(Condition2, TinyProductIndeterminate) {
  DeltaTrace tr;
  tr.switchings.push_back({1.0, 1.0, 1.0, 0.3});
  tr.switchings.push_back({2.0, 1e-12, -1e-12, 0.3});
  const Condition2Result r = CheckCondition2(tr);
  EXPECT_EQ(r.switchings[1].verdict, Verdict::kIndeterminate);
  EXPECT_EQ(r.verdict, Verdict::kIndeterminate);
}

TEST(Condition3, FixedEndpointIsVacuous) {
  const auto c = fixtures::MakeConstructedExtremal();
  const TargetManifold m = FixedEndpointTarget(Chart::kMeoe, c.trajectory.FinalX());
  const Condition3Result r = CheckCondition3(
      c.dynamics, m, c.trajectory.FinalX(), c.trajectory.FinalP(), Branch::kBurn,
      SensitivityMatrix::Zero(7, 6), SensitivityMatrix::Zero(7, 6), 1.0);
  EXPECT_TRUE(r.vacuous);
  EXPECT_EQ(r.verdict, Verdict::kPass);
  EXPECT_EQ(r.matrix.size(), 0);
}

// Independent evaluation of T'(dp' dx^-1 - sum nu_i Q_i)T on synthetic sensitivities.
TEST(Condition3, MatrixMatchesDirectFormula) {
  const auto c = fixtures::MakeConstructedExtremal();
  const Vec7 xf = c.trajectory.FinalX(), pf = c.trajectory.FinalP();
  std::mt19937_64 rng(43);
  std::normal_distribution<double> g;
  Eigen::MatrixXd A(5, 7);
  for (int i = 0; i < A.size(); ++i) A.data()[i] = g(rng);
  std::vector<Mat7> Q(5, Mat7::Zero());
  for (Mat7& q : Q) {
    for (int i = 0; i < 49; ++i) q.data()[i] = g(rng);
    q = (q + q.transpose()).eval();
  }
  Eigen::VectorXd b(5);  // x_f on the manifold
  for (int i = 0; i < 5; ++i) b[i] = A.row(i).dot(xf) + 0.5 * xf.dot(Q[i] * xf);
  const TargetManifold m = TargetManifold::Quadratic(Chart::kMeoe, A, Q, b);
  SensitivityMatrix X(7, 6), P(7, 6);
  for (int i = 0; i < 42; ++i) {
    X.data()[i] = g(rng);
    P.data()[i] = g(rng);
  }
  const Condition3Result r =
      CheckCondition3(c.dynamics, m, xf, pf, Branch::kBurn, X, P, 1.0);
  EXPECT_FALSE(r.singular);

  Vec14 z, zd;
  z << xf, pf;
  c.dynamics.CanonicalField(z.data(), 1.0, Branch::kBurn, zd.data());
  Mat7 dx, dp;
  dx << zd.head<7>(), X;
  dp << zd.tail<7>(), P;
  const Eigen::MatrixXd G = m.Gradient(xf);
  const Eigen::VectorXd nu = (G * G.transpose()).inverse() * (G * pf);
  Mat7 curv = Mat7::Zero();
  for (int i = 0; i < 5; ++i) curv += nu[i] * Q[i];
  const Eigen::MatrixXd T = TangentBasis(m, xf);
  const Eigen::MatrixXd want = T.transpose() * (dp * dx.inverse() - curv) * T;
  EXPECT_LT((r.matrix - want).norm(), 1e-9 * want.norm());
  const Eigen::MatrixXd sym = 0.5 * (want + want.transpose());
  const bool pd = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sym).eigenvalues().minCoeff() > 0;
  EXPECT_EQ(r.verdict, pd ? Verdict::kPass : Verdict::kFail);
}

TEST(Condition3, SingularJacobianRefusedUnlessForced) {
  const auto c = fixtures::MakeConstructedExtremal();
  const Vec7 xf = c.trajectory.FinalX(), pf = c.trajectory.FinalP();
  Meoe orbit = Meoe::FromVector(xf);
  const TargetManifold m = MeoeTarget(orbit, xf[5]);
  const SensitivityMatrix X = SensitivityMatrix::Zero(7, 6);
  const SensitivityMatrix P = SensitivityMatrix::Identity(7, 6);
  try {
    CheckCondition3(c.dynamics, m, xf, pf, Branch::kBurn, X, P, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kPrecondition);
  }
  const Condition3Result r =
      CheckCondition3(c.dynamics, m, xf, pf, Branch::kBurn, X, P, 1.0, 1e-10, true);
  EXPECT_TRUE(r.singular);
  EXPECT_EQ(r.verdict, Verdict::kIndeterminate);
}

TEST(Sufficiency, IrregularSwitchingIsAnAssumptionFailure) {
  const fixtures::ShortTransfer s = fixtures::SolveShortTransfer();
  SufficiencyOptions o;
  o.flow.regularity_floor = 1.0;  // above both |dH1/dt|
  const SufficiencyReport r = RunSufficiency(s.problem, s.solution, o);
  EXPECT_FALSE(r.assumptions.switchings_regular);
  EXPECT_TRUE(r.assumptions.hamiltonian_regular);
  EXPECT_GT(r.assumptions.min_abs_H1_dot, 0.5);
  EXPECT_LT(r.assumptions.min_abs_H1_dot, 1.0);
  EXPECT_EQ(r.overall, Verdict::kFail);
}

TEST(Sufficiency, ReportCarriesOneSidedValuesAtEverySwitching) {
  const fixtures::ShortTransfer s = fixtures::SolveShortTransfer();
  const SufficiencyReport r = RunSufficiency(s.problem, s.solution);
  EXPECT_TRUE(r.assumptions.switchings_regular);
  ASSERT_EQ(r.trace.switchings.size(), 2u);
  ASSERT_EQ(r.condition2.switchings.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_NEAR(r.trace.switchings[i].t, s.solution.trajectory.events[i].t, 1e-8);
  }
  EXPECT_EQ(r.trace.arcs.size(), 3u);
  ASSERT_TRUE(r.family);
  EXPECT_EQ(r.family->columns, 6);
}

// Coast-only Keplerian extremal over half a period: delta is expected to stay
// away from zero on (0, tf].
TEST(DeltaTrace, CoastOnlyKeplerianExtremalNeverVanishes) {
  const Dynamics dyn = fixtures::CartesianDynamics(10.0);
  Vec7 x0, p0 = Vec7::Zero();
  x0 << 1, 0, 0, 0, 1, 0, 1;
  p0[6] = 1.0;  // H1 < 0 throughout, H = 0
  ASSERT_LT(dyn.SwitchingFunction(x0, p0), 0.0);
  ASSERT_EQ(dyn.Hamiltonian(x0, p0, 1.0), 0.0);
  const double tf = std::numbers::pi;
  const FamilyBasis E = BuildFamilyBasis(dyn, x0, p0, 1.0);
  auto fam = std::make_shared<const ExtremalTrajectory>(
      PropagateFamily(dyn, x0, p0, tf, 1.0, E, FlowOptions{}));
  ASSERT_EQ(fam->SwitchingCount(), 0);
  const DeltaTrace tr = BuildDeltaTrace(dyn, fam, 0.0, tf, 100, 1e-9);
  double min_abs = 1e300;
  for (const DeltaArc& a : tr.arcs) {
    for (const DeltaSample& s : a.samples) {
      if (s.t > 0.0) min_abs = std::min(min_abs, std::abs(s.delta));
    }
  }
  EXPECT_GT(min_abs, 0.0) << "delta vanishes on the coast arc (min |delta| = " << min_abs << ")";
  EXPECT_EQ(CheckCondition1(tr).verdict, Verdict::kPass);
}

}  // namespace
