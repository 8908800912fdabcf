#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "suffkit/errors.hpp"
#include "suffkit/second_order.hpp"
#include "suffkit/shooting.hpp"
#include "suffkit/units.hpp"

namespace suffkit::app {

using Json = nlohmann::ordered_json;

inline constexpr const char* kConfigSchema = "suffkit.config/1";

struct EngineBlock {
  double thrust_n = 0.0;
  double isp_s = 0.0;
  double m0_kg = 0.0;
  double m_c_kg = 0.0;
  double g0_m_s2 = kStandardGravityMPerS2;
};

struct OrbitBlock {
  double P_km = 0.0;
  double ex = 0.0;
  double ey = 0.0;
  double hx = 0.0;
  double hy = 0.0;
  double l_rad = 0.0;  // only meaningful for the initial orbit
};

struct BoundaryBlock {
  OrbitBlock initial;
  OrbitBlock final_orbit;
  double l_f_rad = 0.0;
};

struct SolverBlock {
  double rel_tol = 1e-12;
  double abs_tol = 1e-12;
  double event_tol = 1e-10;
  double regularity_floor = 1e-8;
  double newton_tol = 1e-10;
  int max_iterations = 40;
  std::vector<double> lambda_schedule = {0.0, 1.0};
  double max_lambda_step = 0.25;
  double min_lambda_step = 1e-4;
  // Unknowns file used instead of the cold-start guess grid; relative to the config.
  std::optional<std::filesystem::path> warm_start;
};

struct SufficiencyBlock {
  int samples_per_arc = 400;
  double extend_to_h = 0.0;
  double zero_threshold = 1e-8;
  double product_threshold = 1e-8;
  double pd_floor = 1e-10;
  double root_scale_exponent = 0.1;
  // A stored solution whose residual exceeds this is not certified.
  double residual_tol = 1e-8;
};

struct OutputBlock {
  std::filesystem::path directory = "suffkit_out";
  int trajectory_samples_per_arc = 50;
};

struct RunConfig {
  std::filesystem::path source;
  Json raw;
  EngineBlock engine;
  BoundaryBlock boundary;
  SolverBlock solver;
  SufficiencyBlock sufficiency;
  OutputBlock output;
};

// Error(kConfig) whose message starts with the dotted key at fault.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& what)
      : Error(ErrorKind::kConfig, key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

RunConfig ParseConfig(const Json& j, const std::filesystem::path& source = {});
RunConfig LoadConfig(const std::filesystem::path& path);

// "0,0.5,1" -> {0, 0.5, 1}; throws ConfigError("--lambda-schedule", ...).
std::vector<double> ParseSchedule(const std::string& csv);

struct Setup {
  ScaleSet scale;
  ShootingProblem problem;
};

Setup BuildProblem(const RunConfig& config);
FlowOptions BuildFlowOptions(const SolverBlock& solver);
ContinuationOptions BuildContinuationOptions(const SolverBlock& solver);
SufficiencyOptions BuildSufficiencyOptions(const RunConfig& config, const ScaleSet& scale);

// Solution artifact: converged unknowns in canonical units.
struct SolutionFile {
  ShootingUnknowns unknowns;
  double lambda = 1.0;
};

Json SolutionToJson(const SolutionFile& s, const ScaleSet& scale);
SolutionFile LoadSolution(const std::filesystem::path& path);

}  // namespace suffkit::app
