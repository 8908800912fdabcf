#include "pipeline.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <spdlog/spdlog.h>

namespace suffkit::app {
namespace {

double Seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

double Hours(const Setup& s, double t) { return t * s.scale.time_s / kSecondsPerHour; }

Json MatrixToJson(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

// Opens `path` for writing, creating its parent directories.
std::ofstream OpenOutput(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot write '" + path.string() + "'");
  out << std::setprecision(17);
  return out;
}

std::ofstream OpenCsv(const std::filesystem::path& path) {
  std::ofstream out = OpenOutput(path);
  out << "t,P,ex,ey,hx,hy,l,m,pr1,pr2,pr3,pr4,pr5,pr6,pr7,rho,H1,pv_norm,delta,delta_rootscaled\n";
  return out;
}

void WriteRow(std::ofstream& out, const Setup& s, double t, const Vec7& x, const Vec7& p,
              double lambda, const double* delta, double exponent) {
  const Dynamics& dyn = s.problem.dynamics;
  out << Hours(s, t) << ',' << x[0] * s.scale.length_km;
  for (int i = 1; i < 6; ++i) out << ',' << x[i];
  out << ',' << x[6] * s.scale.mass_kg;
  for (int i = 0; i < 7; ++i) out << ',' << p[i];
  out << ',' << dyn.Control(x, p, lambda).rho << ',' << dyn.SwitchingFunction(x, p) << ','
      << dyn.Primer(x, p).norm() << ',';
  if (delta) out << *delta << ',' << RootScaled(*delta, exponent);
  else out << ',';
  out << '\n';
}

}  // namespace

SolveOutcome RunSolve(const Setup& setup, const RunConfig& config,
                      const std::vector<double>& schedule) {
  const auto t0 = std::chrono::steady_clock::now();
  SolveOutcome out;
  ContinuationOptions co = BuildContinuationOptions(config.solver);
  co.on_step = [&](double lambda, const ExtremalSolution& s) {
    out.lambda_trace.push_back(lambda);
    spdlog::info("lambda {:.6f}: tf {:.4f} h, {} burn arcs, {} Newton iterations", lambda,
                 Hours(setup, s.unknowns.tf), s.trajectory.BurnArcCount(), s.iterations);
  };
  co.solve.on_iteration = [](int it, double norm, double damping) {
    spdlog::debug("  newton {}: |F| = {:.3e}, step {:.4g}", it, norm, damping);
  };

  if (config.solver.warm_start) {
    const SolutionFile warm = LoadSolution(*config.solver.warm_start);
    spdlog::info("warm start from {}", config.solver.warm_start->string());
    std::vector<double> tail = {warm.lambda};
    for (double l : schedule) {
      if (l > warm.lambda) tail.push_back(l);
    }
    out.start = "warm_start";
    out.solution = ContinueHomotopy(setup.problem, warm.unknowns, tail, co);
  } else {
    GuessStrategy strategy;
    strategy.on_attempt = [&](double c, double tf, bool ok) {
      spdlog::info("cold start c = {}, tf = {:.2f} h: {}", c, Hours(setup, tf),
                   ok ? "converged" : "no convergence");
    };
    out.start = "cold_start";
    out.solution = SolveFromScratch(setup.problem, schedule, co, strategy);
  }
  out.seconds = Seconds(t0);
  return out;
}

CheckOutcome RunCheck(const Setup& setup, const RunConfig& config, const SolutionFile& stored,
                      const SufficiencyOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  CheckOutcome out;
  if (stored.lambda != 1.0) {
    out.refusal = "solution is not at lambda = 1";
    out.seconds = Seconds(t0);
    return out;
  }
  try {
    out.solution = Evaluate(setup.problem, stored.unknowns, stored.lambda);
  } catch (const Error& e) {
    out.refusal = std::string("stored unknowns do not propagate: ") + e.what();
    out.seconds = Seconds(t0);
    return out;
  }
  if (!(out.solution.residual_norm <= config.sufficiency.residual_tol)) {
    std::ostringstream msg;
    msg << "shooting residual " << out.solution.residual_norm << " exceeds "
        << config.sufficiency.residual_tol;
    out.refusal = msg.str();
    out.seconds = Seconds(t0);
    return out;
  }
  out.certified = true;
  spdlog::info("residual {:.2e}; running the second-order checks", out.solution.residual_norm);
  out.report = RunSufficiency(setup.problem, out.solution, options);
  out.seconds = Seconds(t0);
  return out;
}

ExitCode CheckExitCode(const CheckOutcome& o) {
  if (!o.certified) return ExitCode::kFail;
  const AssumptionChecks& a = o.report.assumptions;
  if (!a.hamiltonian_regular || !a.switchings_regular) return ExitCode::kAssumption;
  return o.report.overall == Verdict::kPass ? ExitCode::kPass : ExitCode::kFail;
}

Json TrajectorySummary(const Setup& setup, const ExtremalSolution& sol) {
  const ExtremalTrajectory& tr = sol.trajectory;
  Json j;
  j["lambda"] = sol.lambda;
  j["tf"] = sol.unknowns.tf;
  j["tf_h"] = Hours(setup, sol.unknowns.tf);
  j["p0"] = std::vector<double>(sol.unknowns.p0.data(), sol.unknowns.p0.data() + 7);
  j["residual_inf"] = sol.residual_norm;
  j["newton_iterations"] = sol.iterations;
  j["burn_arcs"] = tr.BurnArcCount();
  j["switching_points"] = tr.SwitchingCount();
  const double m_f = tr.FinalX()[6] * setup.scale.mass_kg;
  j["final_mass_kg"] = m_f;
  j["fuel_kg"] = setup.problem.x0[6] * setup.scale.mass_kg - m_f;
  j["hamiltonian_drift"] = tr.arcs.front().steps.empty()
                               ? Json(nullptr)
                               : Json(HamiltonianDrift(setup.problem.dynamics, tr));
  Json arcs = Json::array();
  for (const ArcSegment& a : tr.arcs) {
    arcs.push_back({{"branch", ToString(a.branch)},
                    {"t0_h", Hours(setup, a.t0)},
                    {"t1_h", Hours(setup, a.t1)}});
  }
  j["arcs"] = arcs;
  Json nu = Json::array();
  for (Eigen::Index i = 0; i < sol.nu.size(); ++i) nu.push_back(sol.nu[i]);
  j["multipliers"] = nu;
  return j;
}

Json SufficiencyToJson(const Setup& setup, const SufficiencyReport& r) {
  Json j;
  j["overall"] = ToString(r.overall);
  j["assumptions"] = {{"hamiltonian_regular", r.assumptions.hamiltonian_regular},
                      {"switchings_regular", r.assumptions.switchings_regular},
                      {"min_abs_H1_dot", r.assumptions.min_abs_H1_dot},
                      {"detail", r.assumptions.detail}};
  {
    Json zeros = Json::array();
    for (double t : r.condition1.zeros) zeros.push_back(Hours(setup, t));
    j["condition1"] = {{"verdict", ToString(r.condition1.verdict)},
                       {"zero_count", r.condition1.zeros.size()},
                       {"zeros_h", zeros},
                       {"delta_end", r.condition1.delta_end},
                       {"delta_end_nonzero", r.condition1.end_nonzero},
                       {"delta_max_abs", r.trace.MaxAbs()}};
  }
  {
    Json rows = Json::array();
    for (const SwitchingCheck& c : r.condition2.switchings) {
      rows.push_back({{"t_h", Hours(setup, c.t)},
                      {"delta_minus", c.minus},
                      {"delta_plus", c.plus},
                      {"product", c.product},
                      {"verdict", ToString(c.verdict)}});
    }
    j["condition2"] = {{"verdict", ToString(r.condition2.verdict)}, {"switchings", rows}};
  }
  {
    const Condition3Result& c3 = r.condition3;
    Json c;
    c["verdict"] = ToString(c3.verdict);
    c["vacuous"] = c3.vacuous;
    c["singular_state_jacobian"] = c3.singular;
    c["matrix"] = MatrixToJson(c3.matrix);
    c["eigenvalues"] = MatrixToJson(c3.eigenvalues.transpose());
    if (c3.matrix.rows() == 1) {
      // The only free direction is the mass: d p_m / d m has units time / mass^2.
      c["scalar"] = c3.matrix(0, 0);
      c["scalar_si_s_per_kg2"] =
          c3.matrix(0, 0) * setup.scale.time_s / (setup.scale.mass_kg * setup.scale.mass_kg);
    }
    j["condition3"] = c;
  }
  {
    const ExtensionResult& e = r.extension;
    Json c;
    c["performed"] = e.performed;
    if (e.performed) {
      c["t_end_h"] = Hours(setup, e.t_end);
      c["condition1"] = {{"verdict", ToString(e.condition1.verdict)},
                         {"zero_count", e.condition1.zeros.size()}};
      Json fails = Json::array();
      for (const SwitchingCheck& s : e.condition2.switchings) {
        if (s.verdict == Verdict::kFail) fails.push_back(Hours(setup, s.t));
      }
      c["condition2"] = {{"verdict", ToString(e.condition2.verdict)},
                         {"switchings", e.condition2.switchings.size()},
                         {"sign_flips_h", fails}};
      Json conj = Json::array();
      for (double t : e.conjugate_times) conj.push_back(Hours(setup, t));
      c["conjugate_times_h"] = conj;
    }
    j["extension"] = c;
  }
  j["diagnostics"] = {{"hadamard_ratio_end", r.diagnostics.hadamard_ratio_end},
                      {"max_hadamard_ratio", r.diagnostics.max_hadamard_ratio},
                      {"cost_row_alignment", r.diagnostics.cost_row_alignment},
                      {"hamiltonian_end", r.diagnostics.hamiltonian_end}};
  j["family_basis"] = MatrixToJson(r.E);
  return j;
}

double RootScaled(double delta, double exponent) {
  const double m = std::pow(std::abs(delta), exponent);
  return delta > 0.0 ? m : (delta < 0.0 ? -m : 0.0);
}

void WriteTrajectoryCsv(const std::filesystem::path& path, const Setup& setup,
                        const ExtremalTrajectory& tr, int samples_per_arc) {
  std::ofstream out = OpenCsv(path);
  for (std::size_t a = 0; a < tr.arcs.size(); ++a) {
    const ArcSegment& arc = tr.arcs[a];
    for (int k = 0; k <= samples_per_arc; ++k) {
      const double t = arc.t0 + (arc.t1 - arc.t0) * k / samples_per_arc;
      const Eigen::VectorXd y = tr.EvalOnArc(a, t);
      WriteRow(out, setup, t, y.head<7>(), y.segment<7>(7), tr.lambda, nullptr, 0.0);
    }
  }
}

void WriteDeltaCsv(const std::filesystem::path& path, const Setup& setup,
                   const SufficiencyReport& r, double exponent) {
  std::ofstream out = OpenCsv(path);
  if (!r.family) return;
  auto dump = [&](const DeltaTrace& trace) {
    for (const DeltaArc& arc : trace.arcs) {
      for (const DeltaSample& s : arc.samples) {
        const Eigen::VectorXd y = r.family->EvalOnArc(arc.arc_index, s.t);
        WriteRow(out, setup, s.t, y.head<7>(), y.segment<7>(7), r.family->lambda, &s.delta,
                 exponent);
      }
    }
  };
  dump(r.trace);
  if (r.extension.performed) dump(r.extension.trace);
}

void WriteSwitchingCsv(const std::filesystem::path& path, const Setup& setup,
                       const SufficiencyReport& r) {
  std::ofstream out = OpenOutput(path);
  out << "index,t,delta_minus,delta_plus,product,verdict,window\n";
  int i = 0;
  auto dump = [&](const Condition2Result& c2, const char* window) {
    for (const SwitchingCheck& c : c2.switchings) {
      out << ++i << ',' << Hours(setup, c.t) << ',' << c.minus << ',' << c.plus << ','
          << c.product << ',' << ToString(c.verdict) << ',' << window << '\n';
    }
  };
  dump(r.condition2, "nominal");
  if (r.extension.performed) dump(r.extension.condition2, "extension");
}

void WriteJson(const std::filesystem::path& path, const Json& j) {
  std::ofstream out = OpenOutput(path);
  out << j.dump(2) << '\n';
}

}  // namespace suffkit::app
