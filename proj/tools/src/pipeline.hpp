#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "config.hpp"

namespace suffkit::app {

enum class ExitCode : int {
  kPass = 0,
  kConfig = 1,
  kSolverFailure = 2,
  kFail = 3,
  kAssumption = 4,
};

struct SolveOutcome {
  ExtremalSolution solution;
  std::string start;  // "warm_start" or "cold_start"
  std::vector<double> lambda_trace;
  double seconds = 0.0;
};

// Continuation to lambda = 1 from the warm-start file when the config names
// one, otherwise from the cold-start guess grid. Throws Error(kDiverged) or
// ContinuationError on failure.
SolveOutcome RunSolve(const Setup& setup, const RunConfig& config,
                      const std::vector<double>& schedule);

struct CheckOutcome {
  ExtremalSolution solution;
  SufficiencyReport report;
  bool certified = false;   // false when the stored unknowns do not solve the problem
  std::string refusal;
  double seconds = 0.0;
};

CheckOutcome RunCheck(const Setup& setup, const RunConfig& config, const SolutionFile& stored,
                      const SufficiencyOptions& options);

ExitCode CheckExitCode(const CheckOutcome& outcome);

// Report pieces.
Json TrajectorySummary(const Setup& setup, const ExtremalSolution& solution);
Json SufficiencyToJson(const Setup& setup, const SufficiencyReport& report);

// sgn(d) |d|^exponent.
double RootScaled(double delta, double exponent);

// Time series with header t,P,ex,ey,hx,hy,l,m,pr1..pr7,rho,H1,pv_norm,delta,delta_rootscaled.
// t in hours, P in km, m in kg, everything else canonical. delta columns are
// empty unless a trace is given.
void WriteTrajectoryCsv(const std::filesystem::path& path, const Setup& setup,
                        const ExtremalTrajectory& trajectory, int samples_per_arc);
void WriteDeltaCsv(const std::filesystem::path& path, const Setup& setup,
                   const SufficiencyReport& report, double exponent);
void WriteSwitchingCsv(const std::filesystem::path& path, const Setup& setup,
                       const SufficiencyReport& report);

void WriteJson(const std::filesystem::path& path, const Json& j);

}  // namespace suffkit::app
