#include "config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "suffkit/elements.hpp"
#include "suffkit/manifold.hpp"

namespace suffkit::app {
namespace {

// Walks one JSON object, remembering which keys were consumed so leftovers
// (usually typos) can be reported by name.
class Section {
 public:
  Section(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string Key(const std::string& name) const {
    return path_.empty() ? name : path_ + "." + name;
  }
  bool Has(const std::string& name) const { return j_.contains(name); }

  double Number(const std::string& name, std::optional<double> fallback = std::nullopt) {
    seen_.insert(name);
    if (!j_.contains(name)) {
      if (fallback) return *fallback;
      throw ConfigError(Key(name), "missing required number");
    }
    const Json& v = j_.at(name);
    if (!v.is_number()) throw ConfigError(Key(name), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(Key(name), "must be finite");
    return d;
  }

  double Positive(const std::string& name, std::optional<double> fallback = std::nullopt) {
    const double d = Number(name, fallback);
    if (!(d > 0.0)) throw ConfigError(Key(name), "must be positive");
    return d;
  }

  int Count(const std::string& name, int fallback) {
    seen_.insert(name);
    if (!j_.contains(name)) return fallback;
    const Json& v = j_.at(name);
    if (!v.is_number_integer() || v.get<long>() <= 0) {
      throw ConfigError(Key(name), "expected a positive integer");
    }
    return v.get<int>();
  }

  std::optional<std::string> Text(const std::string& name) {
    seen_.insert(name);
    if (!j_.contains(name)) return std::nullopt;
    const Json& v = j_.at(name);
    if (!v.is_string()) throw ConfigError(Key(name), "expected a string");
    return v.get<std::string>();
  }

  std::vector<double> Numbers(const std::string& name, std::vector<double> fallback) {
    seen_.insert(name);
    if (!j_.contains(name)) return fallback;
    const Json& v = j_.at(name);
    if (!v.is_array() || v.empty()) throw ConfigError(Key(name), "expected a non-empty array");
    std::vector<double> out;
    for (const Json& e : v) {
      if (!e.is_number()) throw ConfigError(Key(name), "array entries must be numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  // Angle given either in radians (`<stem>_rad`) or as a multiple of pi (`<stem>_pi`).
  double Angle(const std::string& stem) {
    const bool rad = Has(stem + "_rad"), pi = Has(stem + "_pi");
    if (rad && pi) throw ConfigError(Key(stem + "_rad"), "give either _rad or _pi, not both");
    if (pi) return std::numbers::pi * Number(stem + "_pi");
    return Number(stem + "_rad");
  }

  Section Child(const std::string& name, bool required = true) {
    seen_.insert(name);
    if (!j_.contains(name)) {
      if (required) throw ConfigError(Key(name), "missing section");
      return Section(kEmpty, Key(name));
    }
    return Section(j_.at(name), Key(name));
  }

  void RejectUnknown() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(Key(it.key()), "unknown key");
    }
  }

 private:
  static inline const Json kEmpty = Json::object();
  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

OrbitBlock ReadOrbit(Section s, bool with_longitude) {
  OrbitBlock o;
  o.P_km = s.Positive("P_km");
  o.ex = s.Number("ex", 0.0);
  o.ey = s.Number("ey", 0.0);
  o.hx = s.Number("hx", 0.0);
  o.hy = s.Number("hy", 0.0);
  if (std::hypot(o.ex, o.ey) >= 1.0) throw ConfigError(s.Key("ex"), "orbit must be elliptic (|e| < 1)");
  if (with_longitude) o.l_rad = s.Angle("l");
  s.RejectUnknown();
  return o;
}

}  // namespace

RunConfig ParseConfig(const Json& j, const std::filesystem::path& source) {
  RunConfig c;
  c.source = source;
  c.raw = j;
  Section root(j, "");
  if (auto schema = root.Text("schema"); schema && *schema != kConfigSchema) {
    throw ConfigError("schema", "unsupported schema '" + *schema + "'");
  }
  root.Text("name");

  {
    Section s = root.Child("engine");
    c.engine.thrust_n = s.Positive("thrust_n");
    c.engine.isp_s = s.Positive("isp_s");
    c.engine.m0_kg = s.Positive("m0_kg");
    c.engine.m_c_kg = s.Positive("m_c_kg");
    c.engine.g0_m_s2 = s.Positive("g0_m_s2", kStandardGravityMPerS2);
    if (!(c.engine.m_c_kg < c.engine.m0_kg)) {
      throw ConfigError(s.Key("m_c_kg"), "dry mass must be below the initial mass");
    }
    s.RejectUnknown();
  }
  {
    Section s = root.Child("boundary");
    c.boundary.initial = ReadOrbit(s.Child("initial"), true);
    c.boundary.final_orbit = ReadOrbit(s.Child("final"), false);
    c.boundary.l_f_rad = s.Angle("l_f");
    if (!(c.boundary.l_f_rad > c.boundary.initial.l_rad)) {
      throw ConfigError(s.Key(s.Has("l_f_pi") ? "l_f_pi" : "l_f_rad"),
                        "final longitude must exceed the initial one");
    }
    s.RejectUnknown();
  }
  {
    Section s = root.Child("solver", false);
    SolverBlock& b = c.solver;
    b.rel_tol = s.Positive("rel_tol", b.rel_tol);
    b.abs_tol = s.Positive("abs_tol", b.abs_tol);
    b.event_tol = s.Positive("event_tol", b.event_tol);
    b.regularity_floor = s.Positive("regularity_floor", b.regularity_floor);
    b.newton_tol = s.Positive("newton_tol", b.newton_tol);
    b.max_iterations = s.Count("max_iterations", b.max_iterations);
    b.lambda_schedule = s.Numbers("lambda_schedule", b.lambda_schedule);
    for (std::size_t i = 0; i < b.lambda_schedule.size(); ++i) {
      const double l = b.lambda_schedule[i];
      if (l < 0.0 || l > 1.0 || (i > 0 && !(l > b.lambda_schedule[i - 1]))) {
        throw ConfigError(s.Key("lambda_schedule"), "must increase within [0, 1]");
      }
    }
    if (b.lambda_schedule.back() != 1.0) {
      throw ConfigError(s.Key("lambda_schedule"), "must end at 1");
    }
    b.max_lambda_step = s.Positive("max_lambda_step", b.max_lambda_step);
    b.min_lambda_step = s.Positive("min_lambda_step", b.min_lambda_step);
    if (auto w = s.Text("warm_start")) {
      std::filesystem::path p(*w);
      if (p.is_relative() && !source.empty()) p = source.parent_path() / p;
      b.warm_start = p;
    }
    s.RejectUnknown();
  }
  {
    Section s = root.Child("sufficiency", false);
    SufficiencyBlock& b = c.sufficiency;
    b.samples_per_arc = s.Count("samples_per_arc", b.samples_per_arc);
    b.extend_to_h = s.Number("extend_to_h", b.extend_to_h);
    if (b.extend_to_h < 0.0) throw ConfigError(s.Key("extend_to_h"), "must not be negative");
    b.zero_threshold = s.Positive("zero_threshold", b.zero_threshold);
    b.product_threshold = s.Positive("product_threshold", b.product_threshold);
    b.pd_floor = s.Positive("pd_floor", b.pd_floor);
    b.root_scale_exponent = s.Positive("root_scale_exponent", b.root_scale_exponent);
    b.residual_tol = s.Positive("residual_tol", b.residual_tol);
    s.RejectUnknown();
  }
  {
    Section s = root.Child("output", false);
    if (auto d = s.Text("directory")) c.output.directory = *d;
    c.output.trajectory_samples_per_arc =
        s.Count("trajectory_samples_per_arc", c.output.trajectory_samples_per_arc);
    s.RejectUnknown();
  }
  root.RejectUnknown();
  return c;
}

RunConfig LoadConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open '" + path.string() + "'");
  Json j;
  try {
    j = Json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const Json::parse_error& e) {
    throw ConfigError("<root>", std::string("malformed config: ") + e.what());
  }
  return ParseConfig(j, path);
}

std::vector<double> ParseSchedule(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("--lambda-schedule", "not a number: '" + item + "'");
    }
  }
  if (out.empty()) throw ConfigError("--lambda-schedule", "empty list");
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i] < 0.0 || out[i] > 1.0 || (i > 0 && !(out[i] > out[i - 1]))) {
      throw ConfigError("--lambda-schedule", "must increase within [0, 1]");
    }
  }
  if (out.back() != 1.0) throw ConfigError("--lambda-schedule", "must end at 1");
  return out;
}

Setup BuildProblem(const RunConfig& c) {
  const ScaleSet scale = ScaleSet::Geo(c.engine.m0_kg);
  const EngineSpec engine =
      EngineSpec::FromPhysical(c.engine.thrust_n, c.engine.isp_s, c.engine.m_c_kg, scale,
                               c.engine.g0_m_s2);
  const OrbitBlock& o = c.boundary.initial;
  Vec7 x0;
  x0 << o.P_km / scale.length_km, o.ex, o.ey, o.hx, o.hy, o.l_rad, c.engine.m0_kg / scale.mass_kg;
  const OrbitBlock& f = c.boundary.final_orbit;
  Meoe target;
  target.P = f.P_km / scale.length_km;
  target.ex = f.ex;
  target.ey = f.ey;
  target.hx = f.hx;
  target.hy = f.hy;
  return Setup{scale, ShootingProblem{Dynamics(Chart::kMeoe, engine), x0,
                                      MeoeTarget(target, c.boundary.l_f_rad),
                                      BuildFlowOptions(c.solver)}};
}

FlowOptions BuildFlowOptions(const SolverBlock& s) {
  FlowOptions f;
  f.rel_tol = s.rel_tol;
  f.abs_tol = s.abs_tol;
  f.event_tol = s.event_tol;
  f.regularity_floor = s.regularity_floor;
  return f;
}

ContinuationOptions BuildContinuationOptions(const SolverBlock& s) {
  ContinuationOptions o;
  o.solve.tol = s.newton_tol;
  o.solve.max_iterations = s.max_iterations;
  o.max_step = s.max_lambda_step;
  o.min_step = s.min_lambda_step;
  return o;
}

SufficiencyOptions BuildSufficiencyOptions(const RunConfig& c, const ScaleSet& scale) {
  SufficiencyOptions o;
  o.samples_per_arc = c.sufficiency.samples_per_arc;
  o.zero_threshold = c.sufficiency.zero_threshold;
  o.product_threshold = c.sufficiency.product_threshold;
  o.pd_floor = c.sufficiency.pd_floor;
  o.extend_to = c.sufficiency.extend_to_h * kSecondsPerHour / scale.time_s;
  o.flow = BuildFlowOptions(c.solver);
  return o;
}

Json SolutionToJson(const SolutionFile& s, const ScaleSet& scale) {
  Json j;
  j["schema"] = "suffkit.solution/1";
  j["lambda"] = s.lambda;
  j["p0"] = std::vector<double>(s.unknowns.p0.data(), s.unknowns.p0.data() + 7);
  j["tf"] = s.unknowns.tf;
  j["tf_h"] = s.unknowns.tf * scale.time_s / kSecondsPerHour;
  return j;
}

SolutionFile LoadSolution(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--solution", "cannot open '" + path.string() + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("--solution", std::string("malformed solution file: ") + e.what());
  }
  if (j.value("schema", "") != "suffkit.solution/1") {
    throw ConfigError("schema", "not a suffkit.solution/1 file");
  }
  Section s(j, "");
  SolutionFile out;
  out.lambda = s.Number("lambda", 1.0);
  const std::vector<double> p0 = s.Numbers("p0", {});
  if (p0.size() != 7) throw ConfigError("p0", "expected 7 costate components");
  for (int i = 0; i < 7; ++i) out.unknowns.p0[i] = p0[i];
  out.unknowns.tf = s.Positive("tf");
  return out;
}

}  // namespace suffkit::app
