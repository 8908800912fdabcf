// Full transfer cases from the stored warm starts: solve, count, certify.
#include <cmath>
#include <filesystem>

#include <gtest/gtest.h>

#include "config.hpp"
#include "criteria.hpp"
#include "fixtures.hpp"
#include "pipeline.hpp"

namespace {

using namespace suffkit;
using namespace suffkit::app;
namespace fs = std::filesystem;

struct CaseRun {
  RunConfig config;
  Setup setup;
  ExtremalSolution solution;
  CheckOutcome check;
};

CaseRun Run(const std::string& name, const std::string& warm) {
  RunConfig cfg = LoadConfig(fs::path(fixtures::ConfigDir()) / name);
  Setup setup = BuildProblem(cfg);
  const SolutionFile start = LoadSolution(fs::path(fixtures::ConfigDir()) / warm);
  ExtremalSolution sol = SolveShooting(setup.problem, start.unknowns, 1.0);
  CheckOutcome check = RunCheck(setup, cfg, SolutionFile{sol.unknowns, 1.0},
                                BuildSufficiencyOptions(cfg, setup.scale));
  return {std::move(cfg), std::move(setup), std::move(sol), std::move(check)};
}

const CaseRun& CaseA() {
  static const CaseRun r = Run("case_a.json", "case_a_warm.json");
  return r;
}

const CaseRun& CaseB() {
  static const CaseRun r = Run("case_b.json", "case_b_warm.json");
  return r;
}

double HoursOf(const CaseRun& r, double t) { return t * r.setup.scale.time_s / 3600.0; }

TEST(CaseA, ConvergesToTransferTime) {
  const CaseRun& r = CaseA();
  EXPECT_LT(r.solution.residual_norm, 1e-9);
  EXPECT_NEAR(HoursOf(r, r.solution.unknowns.tf), 146.36, 0.005 * 146.36);
}

TEST(CaseA, ArcStructure) {
  const auto& tr = CaseA().solution.trajectory;
  EXPECT_EQ(tr.BurnArcCount(), 11);
  EXPECT_EQ(tr.SwitchingCount(), 20);
  EXPECT_EQ(tr.arcs.front().branch, Branch::kBurn);
}

TEST(CaseA, FreeTimeHamiltonianVanishes) {
  const CaseRun& r = CaseA();
  EXPECT_LT(criteria::MaxAbsHamiltonian(r.setup.problem.dynamics, r.solution.trajectory), 1e-8);
  EXPECT_LT(HamiltonianDrift(r.setup.problem.dynamics, r.solution.trajectory), 1e-8);
}

TEST(CaseA, MultipliersAreFinalCostates) {
  const CaseRun& r = CaseA();
  const Vec7 pf = r.solution.trajectory.FinalP();
  EXPECT_LT((r.solution.nu.transpose() - pf.head<6>()).norm(), 1e-12 * pf.norm());
}

TEST(CaseA, AssumptionsHold) {
  const CaseRun& r = CaseA();
  ASSERT_TRUE(r.check.certified) << r.check.refusal;
  EXPECT_TRUE(r.check.report.assumptions.hamiltonian_regular);
  EXPECT_TRUE(r.check.report.assumptions.switchings_regular);
  EXPECT_GT(r.check.report.assumptions.min_abs_H1_dot, 1e-8);
}

TEST(CaseA, Condition1NoZerosOnHalfOpenInterval) {
  const auto& c1 = CaseA().check.report.condition1;
  EXPECT_EQ(c1.verdict, Verdict::kPass) << c1.zeros.size() << " zeros located";
}

TEST(CaseA, Condition2AllProductsPositive) {
  const auto& c2 = CaseA().check.report.condition2;
  ASSERT_EQ(c2.switchings.size(), 20u);
  int positive = 0;
  for (const SwitchingCheck& s : c2.switchings) positive += s.product > 0.0;
  EXPECT_EQ(positive, 20);
  EXPECT_EQ(c2.verdict, Verdict::kPass);
}

TEST(CaseA, Condition3PositiveScalar) {
  const auto& c3 = CaseA().check.report.condition3;
  ASSERT_EQ(c3.matrix.rows(), 1);
  EXPECT_FALSE(c3.singular);
  EXPECT_GT(c3.matrix(0, 0), 0.0);
  EXPECT_EQ(c3.verdict, Verdict::kPass);
}

TEST(CaseA, VerdictStableUnderThresholdChange) {
  const CaseRun& r = CaseA();
  const auto& trace = r.check.report.trace;
  const Verdict base = CheckCondition1(trace, 1e-8).verdict;
  EXPECT_EQ(CheckCondition1(trace, 1e-7).verdict, base);
  EXPECT_EQ(CheckCondition1(trace, 1e-9).verdict, base);
  const Verdict base2 = CheckCondition2(trace, 1e-8).verdict;
  EXPECT_EQ(CheckCondition2(trace, 1e-7).verdict, base2);
  EXPECT_EQ(CheckCondition2(trace, 1e-9).verdict, base2);
}

TEST(CaseA, OverallCertified) {
  const CaseRun& r = CaseA();
  EXPECT_EQ(r.check.report.overall, Verdict::kPass);
  EXPECT_EQ(CheckExitCode(r.check), ExitCode::kPass);
}

TEST(CaseB, ConvergesToTransferTime) {
  const CaseRun& r = CaseB();
  EXPECT_LT(r.solution.residual_norm, 1e-9);
  EXPECT_NEAR(HoursOf(r, r.solution.unknowns.tf), 316.38, 0.005 * 316.38);
  EXPECT_LT(criteria::MaxAbsHamiltonian(r.setup.problem.dynamics, r.solution.trajectory), 1e-8);
}

TEST(CaseB, ConditionsOnNominalInterval) {
  const auto& rep = CaseB().check.report;
  EXPECT_EQ(rep.condition1.verdict, Verdict::kPass);
  EXPECT_EQ(rep.condition2.verdict, Verdict::kPass);
  EXPECT_EQ(rep.condition3.verdict, Verdict::kPass);
  ASSERT_EQ(rep.condition3.matrix.rows(), 1);
  EXPECT_GT(rep.condition3.matrix(0, 0), 0.0);
}

TEST(CaseB, ExtensionFindsFoldNear982Hours) {
  const CaseRun& r = CaseB();
  const auto& ext = r.check.report.extension;
  ASSERT_TRUE(ext.performed);
  EXPECT_NEAR(HoursOf(r, ext.t_end), 1000.0, 1e-6);
  bool found = false;
  for (const SwitchingCheck& s : ext.condition2.switchings) {
    if (s.verdict == Verdict::kFail && std::abs(HoursOf(r, s.t) - 982.63) < 0.02 * 982.63) {
      found = true;
    }
  }
  EXPECT_TRUE(found) << ext.condition2.switchings.size() << " switchings on the extension";
  EXPECT_EQ(ext.condition2.verdict, Verdict::kFail);
}

}  // namespace
