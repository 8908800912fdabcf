// suffkit: solve, certify and convert fuel-optimal multi-burn transfers.
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "config.hpp"
#include "pipeline.hpp"
#include "suffkit/elements.hpp"

namespace fs = std::filesystem;
using namespace suffkit;
using namespace suffkit::app;

namespace {

constexpr const char* kReportSchema = "suffkit.report/1";

void SetupLogging() {
  auto logger = spdlog::stderr_color_mt("suffkit");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  const char* env = std::getenv("SUFFKIT_LOG");
  spdlog::level::level_enum level = spdlog::level::info;
  if (env && *env) {
    level = spdlog::level::from_str(env);
    // from_str maps unknown names to off; only honour that for the explicit spelling
    if (level == spdlog::level::off && std::string(env) != "off") {
      level = spdlog::level::info;
      spdlog::warn("SUFFKIT_LOG='{}' not recognised, using info", env);
    }
  }
  spdlog::set_level(level);
}

Json BaseReport(const std::string& command) {
  Json r;
  r["schema"] = kReportSchema;
  r["command"] = command;
  return r;
}

// Fills status fields, writes report.json (or stdout without a directory) and
// returns the exit code.
int Finish(Json report, ExitCode code, const std::optional<fs::path>& dir,
           const std::string& status) {
  report["status"] = status;
  report["exit_code"] = static_cast<int>(code);
  if (dir) {
    try {
      WriteJson(*dir / "report.json", report);
      std::cout << status << ": report written to " << (*dir / "report.json").string() << '\n';
      return static_cast<int>(code);
    } catch (const std::exception& e) {
      spdlog::error("{}", e.what());
    }
  }
  std::cout << report.dump(2) << '\n';
  return static_cast<int>(code);
}

Json ErrorJson(const Error& e) {
  return {{"kind", std::string(ToString(e.kind()))}, {"message", e.what()}};
}

struct CommonArgs {
  std::string config;
  std::string out;
};

// Loads the config and resolves the output directory (flag beats config).
std::optional<RunConfig> Load(const CommonArgs& a, Json& report, std::optional<fs::path>& dir) {
  if (!a.out.empty()) dir = fs::path(a.out);
  try {
    RunConfig c = LoadConfig(a.config);
    if (!dir) dir = c.output.directory;
    report["config_path"] = a.config;
    report["config"] = c.raw;
    return c;
  } catch (const Error& e) {
    report["error"] = ErrorJson(e);
    spdlog::error("{}", e.what());
    return std::nullopt;
  }
}

int CmdSolve(const CommonArgs& a, const std::string& schedule_csv) {
  Json report = BaseReport("solve");
  std::optional<fs::path> dir;
  std::optional<RunConfig> cfg = Load(a, report, dir);
  if (!cfg) return Finish(report, ExitCode::kConfig, dir, "config_error");

  std::vector<double> schedule = cfg->solver.lambda_schedule;
  std::optional<Setup> setup;
  try {
    if (!schedule_csv.empty()) schedule = ParseSchedule(schedule_csv);
    setup.emplace(BuildProblem(*cfg));
  } catch (const Error& e) {
    report["error"] = ErrorJson(e);
    spdlog::error("{}", e.what());
    return Finish(report, ExitCode::kConfig, dir, "config_error");
  }
  report["lambda_schedule"] = schedule;

  SolveOutcome out;
  try {
    out = RunSolve(*setup, *cfg, schedule);
  } catch (const ContinuationError& e) {
    report["error"] = ErrorJson(e);
    report["lambda_trace"] = e.lambda_trace();
    report["last_unknowns"] = SolutionToJson({e.last(), e.lambda_trace().empty() ? 0.0 : e.lambda_trace().back()}, setup->scale);
    spdlog::error("{}", e.what());
    return Finish(report, ExitCode::kSolverFailure, dir, "solver_failure");
  } catch (const DivergedError& e) {
    report["error"] = ErrorJson(e);
    report["best_residual"] = e.best_norm();
    spdlog::error("{}", e.what());
    return Finish(report, ExitCode::kSolverFailure, dir, "solver_failure");
  } catch (const Error& e) {
    report["error"] = ErrorJson(e);
    spdlog::error("{}", e.what());
    const ExitCode code =
        e.kind() == ErrorKind::kConfig ? ExitCode::kConfig : ExitCode::kSolverFailure;
    return Finish(report, code, dir,
                  code == ExitCode::kConfig ? "config_error" : "solver_failure");
  }

  report["start"] = out.start;
  report["lambda_trace"] = out.lambda_trace;
  report["solution"] = TrajectorySummary(*setup, out.solution);
  report["timings"] = {{"solve_s", out.seconds}};
  try {
    WriteJson(*dir / "solution.json",
              SolutionToJson({out.solution.unknowns, out.solution.lambda}, setup->scale));
    WriteTrajectoryCsv(*dir / "trajectory.csv", *setup, out.solution.trajectory,
                       cfg->output.trajectory_samples_per_arc);
    report["artifacts"] = {"solution.json", "trajectory.csv"};
  } catch (const Error& e) {
    report["error"] = ErrorJson(e);
    return Finish(report, ExitCode::kConfig, dir, "io_error");
  }
  spdlog::info("tf = {:.4f} h, {} burn arcs, {} switchings",
               report["solution"]["tf_h"].get<double>(), out.solution.trajectory.BurnArcCount(),
               out.solution.trajectory.SwitchingCount());
  return Finish(report, ExitCode::kPass, dir, "solved");
}

int CmdCheck(const CommonArgs& a, const std::string& solution_path,
             std::optional<double> extend_to_h) {
  Json report = BaseReport("check");
  std::optional<fs::path> dir;
  std::optional<RunConfig> cfg = Load(a, report, dir);
  if (!cfg) return Finish(report, ExitCode::kConfig, dir, "config_error");
  if (extend_to_h) {
    if (*extend_to_h < 0.0) {
      report["error"] = {{"kind", "config"}, {"message", "--extend-to: must not be negative"}};
      return Finish(report, ExitCode::kConfig, dir, "config_error");
    }
    cfg->sufficiency.extend_to_h = *extend_to_h;
  }

  std::optional<Setup> setup;
  SolutionFile stored;
  const fs::path sol_path = solution_path.empty() ? *dir / "solution.json" : fs::path(solution_path);
  try {
    setup.emplace(BuildProblem(*cfg));
    stored = LoadSolution(sol_path);
  } catch (const Error& e) {
    report["error"] = ErrorJson(e);
    spdlog::error("{}", e.what());
    return Finish(report, ExitCode::kConfig, dir, "config_error");
  }
  report["solution_path"] = sol_path.string();
  report["extend_to_h"] = cfg->sufficiency.extend_to_h;

  CheckOutcome out;
  try {
    out = RunCheck(*setup, *cfg, stored, BuildSufficiencyOptions(*cfg, setup->scale));
  } catch (const Error& e) {
    report["error"] = ErrorJson(e);
    spdlog::error("{}", e.what());
    return Finish(report, ExitCode::kSolverFailure, dir, "solver_failure");
  }
  report["timings"] = {{"check_s", out.seconds}};
  if (!out.certified) {
    report["refusal"] = out.refusal;
    spdlog::error("not certified: {}", out.refusal);
    return Finish(report, CheckExitCode(out), dir, "refused");
  }
  report["solution"] = TrajectorySummary(*setup, out.solution);
  report["sufficiency"] = SufficiencyToJson(*setup, out.report);
  try {
    WriteDeltaCsv(*dir / "delta.csv", *setup, out.report, cfg->sufficiency.root_scale_exponent);
    WriteSwitchingCsv(*dir / "switchings.csv", *setup, out.report);
    report["artifacts"] = {"delta.csv", "switchings.csv"};
  } catch (const Error& e) {
    report["error"] = ErrorJson(e);
    return Finish(report, ExitCode::kConfig, dir, "io_error");
  }
  const ExitCode code = CheckExitCode(out);
  const char* status = code == ExitCode::kPass ? "pass"
                       : code == ExitCode::kAssumption ? "assumption_violation"
                                                        : "fail";
  spdlog::info("condition 1 {}, condition 2 {}, condition 3 {}",
               ToString(out.report.condition1.verdict), ToString(out.report.condition2.verdict),
               ToString(out.report.condition3.verdict));
  return Finish(report, code, dir, status);
}

Json StateJson(const char* chart, const Vec7& v) {
  return {{"chart", chart}, {"values", std::vector<double>(v.data(), v.data() + 7)}};
}

int CmdConvert(const std::string& from, const std::string& state_csv, bool round_trip,
               double l_hint, const std::string& out) {
  Json report = BaseReport("convert");
  std::optional<fs::path> dir;
  if (!out.empty()) dir = fs::path(out);
  report["from"] = from;
  try {
    std::vector<double> v;
    {
      std::stringstream ss(state_csv);
      std::string item;
      while (std::getline(ss, item, ',')) v.push_back(std::stod(item));
    }
    if (v.size() == 6) v.push_back(1500.0);
    if (v.size() != 7) throw ConfigError("--state", "expected 6 or 7 comma-separated numbers");
    // Physical units in, physical units out; conversions run with mu in km^3/s^2.
    const double mu = kEarthMuKm3PerS2;
    Vec7 in = Eigen::Map<const Vec7>(v.data());
    report["input"] = StateJson(from.c_str(), in);
    Vec7 conv, back;
    if (from == "meoe") {
      conv = MeoeToCartesian(in, mu);
      report["output"] = StateJson("cartesian", conv);
      report["radius_km"] = conv.head<3>().norm();
      if (round_trip) back = CartesianToMeoe(conv, in[5], mu);
    } else if (from == "cartesian") {
      conv = CartesianToMeoe(in, l_hint, mu);
      report["output"] = StateJson("meoe", conv);
      if (round_trip) back = MeoeToCartesian(conv, mu);
    } else {
      throw ConfigError("--from", "expected 'meoe' or 'cartesian'");
    }
    if (round_trip) {
      const double err = (back - in).cwiseAbs().maxCoeff() / std::max(1.0, in.cwiseAbs().maxCoeff());
      report["round_trip_error"] = err;
      if (!(err < 1e-10)) {
        report["error"] = {{"kind", "precondition"}, {"message", "round trip is not the identity"}};
        return Finish(report, ExitCode::kFail, dir, "round_trip_mismatch");
      }
    }
  } catch (const Error& e) {
    report["error"] = ErrorJson(e);
    return Finish(report, ExitCode::kConfig, dir, "config_error");
  } catch (const std::invalid_argument&) {
    report["error"] = {{"kind", "config"}, {"message", "--state: not a number"}};
    return Finish(report, ExitCode::kConfig, dir, "config_error");
  }
  if (dir) WriteJson(*dir / "convert.json", report);
  std::cout << report.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  SetupLogging();
  CLI::App app{"Fuel-optimal multi-burn transfers with second-order sufficiency checks"};
  app.require_subcommand(1);

  CommonArgs solve_args, check_args;
  std::string schedule;
  auto* solve = app.add_subcommand("solve", "homotopy continuation to the fuel-optimal extremal");
  solve->add_option("--config", solve_args.config, "config file (JSON)")->required();
  solve->add_option("--out", solve_args.out, "output directory");
  solve->add_option("--lambda-schedule", schedule, "comma-separated homotopy levels ending at 1");

  std::string solution;
  std::optional<double> extend_to;
  auto* check = app.add_subcommand("check", "second-order sufficiency of a solved extremal");
  check->add_option("--config", check_args.config, "config file (JSON)")->required();
  check->add_option("--out", check_args.out, "output directory");
  check->add_option("--solution", solution, "solution.json (default: <out>/solution.json)");
  check->add_option("--extend-to", extend_to, "continue the determinant scan to HOURS");

  std::string from = "meoe", state, conv_out;
  bool round_trip = false;
  double l_hint = 0.0;
  auto* convert = app.add_subcommand("convert", "MEOE <-> Cartesian (km, km/s, kg, rad)");
  convert->add_option("--from", from, "meoe or cartesian");
  convert->add_option("--state", state, "P,ex,ey,hx,hy,l[,m] or rx,ry,rz,vx,vy,vz[,m]")->required();
  convert->add_flag("--round-trip", round_trip, "convert back and verify the identity");
  convert->add_option("--l-hint", l_hint, "longitude branch for cartesian input");
  convert->add_option("--out", conv_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    Json report = BaseReport("parse");
    report["error"] = {{"kind", "config"}, {"message", e.what()}};
    return Finish(report, ExitCode::kConfig, std::nullopt, "config_error");
  }

  if (*solve) return CmdSolve(solve_args, schedule);
  if (*check) return CmdCheck(check_args, solution, extend_to);
  return CmdConvert(from, state, round_trip, l_hint, conv_out);
}
