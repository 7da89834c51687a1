#include "wkb/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <sstream>

#include "json.hpp"

namespace wkb {

using nlohmann::json;
using nlohmann::ordered_json;

const char* to_string(Regime r) {
  switch (r) {
    case Regime::weak:
      return "weak";
    case Regime::super:
      return "super";
    case Regime::reference:
      return "reference";
  }
  return "?";
}

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) { throw ConfigError(path + ": " + what); }

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

void only_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail(path, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* k) { return it.key() == k; });
    if (!known) fail(path + "." + it.key(), "unknown key");
  }
}

double get_double(const json& j, const char* key, const std::string& path, double fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j[key];
  if (!v.is_number()) fail(path + "." + key, "expected a number");
  return v.get<double>();
}

int get_int(const json& j, const char* key, const std::string& path, int fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j[key];
  if (!v.is_number_integer()) fail(path + "." + key, "expected an integer");
  return v.get<int>();
}

bool get_bool(const json& j, const char* key, const std::string& path, bool fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j[key];
  if (!v.is_boolean()) fail(path + "." + key, "expected true or false");
  return v.get<bool>();
}

std::string get_string(const json& j, const char* key, const std::string& path, const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j[key];
  if (!v.is_string()) fail(path + "." + key, "expected a string");
  return v.get<std::string>();
}

std::vector<double> get_doubles(const json& j, const char* key, const std::string& path,
                                std::vector<double> fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j[key];
  if (!v.is_array()) fail(path + "." + key, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) fail(path + "." + key + "[" + std::to_string(i) + "]", "expected a number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

ProfileConfig parse_profile(const json& j, const std::string& path, ProfileConfig p) {
  only_keys(j, path, {"kind", "center", "width", "amplitude", "radius", "axis", "values"});
  p.kind = get_string(j, "kind", path, p.kind);
  p.center = get_doubles(j, "center", path, p.center);
  p.width = get_double(j, "width", path, p.width);
  p.amplitude = get_double(j, "amplitude", path, p.amplitude);
  p.radius = get_double(j, "radius", path, p.radius);
  p.axis = get_int(j, "axis", path, p.axis);
  p.values = get_doubles(j, "values", path, p.values);
  return p;
}

bool one_of(const std::string& s, std::initializer_list<const char*> options) {
  return std::any_of(options.begin(), options.end(), [&](const char* o) { return s == o; });
}

void validate_profile(const ProfileConfig& p, const std::string& path, const ScenarioConfig& c) {
  if (!one_of(p.kind, {"zero", "gaussian", "odd_gaussian", "bump", "table"})) {
    fail(path + ".kind", "expected zero, gaussian, odd_gaussian, bump or table, got \"" + p.kind + "\"");
  }
  if (!p.center.empty() && int(p.center.size()) != c.dim) {
    fail(path + ".center", "needs " + std::to_string(c.dim) + " coordinates");
  }
  for (double x : p.center) {
    if (!std::isfinite(x)) fail(path + ".center", "must be finite");
  }
  if (!(p.width > 0.0) || !std::isfinite(p.width)) fail(path + ".width", "must be positive");
  if (!(p.radius > 0.0) || !std::isfinite(p.radius)) fail(path + ".radius", "must be positive");
  if (!std::isfinite(p.amplitude)) fail(path + ".amplitude", "must be finite");
  if (p.axis < 0 || p.axis >= c.dim) fail(path + ".axis", "must lie in [0, " + std::to_string(c.dim) + ")");
  if (p.kind == "table") {
    const std::size_t want = c.dim == 1 ? std::size_t(c.points) : std::size_t(c.points) * std::size_t(c.points);
    if (p.values.size() != want) {
      fail(path + ".values", "needs " + std::to_string(want) + " node values, got " + std::to_string(p.values.size()));
    }
  }
}

Profile make_profile(const ProfileConfig& p, const ScenarioConfig& c) {
  const Point center = p.center.empty() ? Point(Point::Zero(c.dim)) : Point(Eigen::Map<const Point>(p.center.data(), c.dim));
  if (p.kind == "zero") return Profile::zero();
  if (p.kind == "gaussian") return Profile::gaussian(center, p.width, p.amplitude);
  if (p.kind == "odd_gaussian") return Profile::odd_gaussian(center, p.width, p.amplitude, p.axis);
  if (p.kind == "bump") return Profile::bump(center, p.radius, p.amplitude);
  return Profile::table(c.grid(), Eigen::Map<const RealArray>(p.values.data(), Eigen::Index(p.values.size())));
}

const std::vector<std::pair<std::string, const char*>>& preset_table() {
  static const std::vector<std::pair<std::string, const char*>> table = {
      {"caustic-delta0", R"({
  "name": "caustic-delta0",
  "regime": "weak",
  "grid": {"dim": 1, "points": 4096, "half_width": 12},
  "potential": {"kind": "zero"},
  "phase": {"kind": "quadratic_focusing", "focus_time": 1},
  "nonlinearity": {"kind": "cubic", "kappa": 1},
  "a0": {"kind": "gaussian", "width": 1, "amplitude": 1},
  "epsilons": [0.2, 0.1, 0.05],
  "t_final": 0.4,
  "snapshots": 40
})"},
      {"harmonic-trap", R"({
  "name": "harmonic-trap",
  "regime": "weak",
  "grid": {"dim": 1, "points": 4096, "half_width": 12},
  "potential": {"kind": "harmonic", "omega": [1]},
  "phase": {"kind": "zero"},
  "nonlinearity": {"kind": "cubic", "kappa": 1},
  "a0": {"kind": "gaussian", "width": 1, "amplitude": 1},
  "epsilons": [0.1, 0.05, 0.025],
  "t_final": 0.6,
  "snapshots": 60
})"},
      {"weak-critical", R"({
  "name": "weak-critical",
  "regime": "weak",
  "nonlinearity": {"kind": "cubic", "kappa": 1},
  "a0": {"kind": "gaussian", "width": 1, "amplitude": 1},
  "epsilons": [0.2, 0.1, 0.05, 0.025],
  "t_final": 0.5,
  "snapshots": 50
})"},
      {"weak-subcritical", R"({
  "name": "weak-subcritical",
  "regime": "weak",
  "nonlinearity": {"kind": "cubic", "kappa": 2},
  "a0": {"kind": "gaussian", "width": 1, "amplitude": 1},
  "epsilons": [0.2, 0.1, 0.05, 0.025],
  "t_final": 0.5,
  "snapshots": 50
})"},
      {"weak-intermediate", R"({
  "name": "weak-intermediate",
  "regime": "weak",
  "nonlinearity": {"kind": "cubic", "kappa": 0.75},
  "a0": {"kind": "gaussian", "width": 1, "amplitude": 1},
  "epsilons": [0.2, 0.1, 0.05, 0.025],
  "t_final": 0.5,
  "snapshots": 50
})"},
      {"super-cubic", R"({
  "name": "super-cubic",
  "regime": "super",
  "nonlinearity": {"kind": "cubic", "kappa": 0},
  "a0": {"kind": "gaussian", "width": 1, "amplitude": 1},
  "a1": {"kind": "odd_gaussian", "width": 1, "amplitude": 1},
  "epsilons": [0.1, 0.05, 0.025],
  "t_final": 0.5,
  "snapshots": 50,
  "small_time": {"epsilon": 0.01, "times": [0.02, 0.04, 0.08]}
})"},
      {"reference-linear", R"({
  "name": "reference-linear",
  "regime": "reference",
  "nonlinearity": {"kind": "none"},
  "a0": {"kind": "gaussian", "width": 1, "amplitude": 1},
  "epsilons": [0.1],
  "t_final": 0.5,
  "snapshots": 50
})"},
  };
  return table;
}

ScenarioConfig from_json(const json& j) {
  const std::string root = "config";
  only_keys(j, root,
            {"name", "regime", "grid", "potential", "phase", "nonlinearity", "a0", "a1", "epsilons", "t_final",
             "snapshots", "dt_max", "small_time", "tolerances", "output"});
  ScenarioConfig c;
  c.name = get_string(j, "name", root, c.name);
  const std::string regime = get_string(j, "regime", root, "reference");
  if (regime == "weak") {
    c.regime = Regime::weak;
  } else if (regime == "super") {
    c.regime = Regime::super;
  } else if (regime == "reference") {
    c.regime = Regime::reference;
  } else {
    fail(root + ".regime", "expected weak, super or reference, got \"" + regime + "\"");
  }
  if (j.contains("grid")) {
    const json& g = j["grid"];
    only_keys(g, root + ".grid", {"dim", "points", "half_width"});
    c.dim = get_int(g, "dim", root + ".grid", c.dim);
    c.points = get_int(g, "points", root + ".grid", c.points);
    c.half_width = get_double(g, "half_width", root + ".grid", c.half_width);
  }
  if (j.contains("potential")) {
    const json& p = j["potential"];
    only_keys(p, root + ".potential", {"kind", "omega"});
    c.potential = get_string(p, "kind", root + ".potential", c.potential);
    c.omega = get_doubles(p, "omega", root + ".potential", c.omega);
  }
  if (j.contains("phase")) {
    const json& p = j["phase"];
    only_keys(p, root + ".phase", {"kind", "focus_time", "delta"});
    c.phase = get_string(p, "kind", root + ".phase", c.phase);
    c.focus_time = get_double(p, "focus_time", root + ".phase", c.focus_time);
    c.delta = get_double(p, "delta", root + ".phase", c.delta);
  }
  if (j.contains("nonlinearity")) {
    const json& p = j["nonlinearity"];
    only_keys(p, root + ".nonlinearity", {"kind", "kappa"});
    c.nonlinearity = get_string(p, "kind", root + ".nonlinearity", c.nonlinearity);
    c.kappa = get_double(p, "kappa", root + ".nonlinearity", c.kappa);
  }
  if (j.contains("a0")) c.a0 = parse_profile(j["a0"], root + ".a0", c.a0);
  if (j.contains("a1")) c.a1 = parse_profile(j["a1"], root + ".a1", c.a1);
  c.epsilons = get_doubles(j, "epsilons", root, c.epsilons);
  c.t_final = get_double(j, "t_final", root, c.t_final);
  c.snapshots = get_int(j, "snapshots", root, c.snapshots);
  if (j.contains("dt_max") && !j["dt_max"].is_null()) c.dt_max = get_double(j, "dt_max", root, c.dt_max);
  if (j.contains("small_time") && !j["small_time"].is_null()) {
    const json& s = j["small_time"];
    only_keys(s, root + ".small_time", {"epsilon", "times"});
    SmallTimeConfig st;
    st.epsilon = get_double(s, "epsilon", root + ".small_time", st.epsilon);
    st.times = get_doubles(s, "times", root + ".small_time", st.times);
    c.small_time = st;
  }
  if (j.contains("tolerances")) {
    const json& t = j["tolerances"];
    only_keys(t, root + ".tolerances", {"min_slope", "min_r2", "max_affine_residual"});
    c.tolerances.min_slope = get_double(t, "min_slope", root + ".tolerances", c.tolerances.min_slope);
    c.tolerances.min_r2 = get_double(t, "min_r2", root + ".tolerances", c.tolerances.min_r2);
    c.tolerances.max_affine_residual =
        get_double(t, "max_affine_residual", root + ".tolerances", c.tolerances.max_affine_residual);
  }
  if (j.contains("output")) {
    const json& o = j["output"];
    only_keys(o, root + ".output", {"fields", "rays"});
    c.dump_fields = get_bool(o, "fields", root + ".output", c.dump_fields);
    c.dump_rays = get_bool(o, "rays", root + ".output", c.dump_rays);
  }
  validate(c);
  return c;
}

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(what + ": malformed JSON: " + e.what());
  }
}

}  // namespace

Grid ScenarioConfig::grid() const { return Grid(dim, points, half_width); }

PotentialSpec ScenarioConfig::potential_spec() const {
  return potential == "harmonic" ? PotentialSpec::harmonic(omega) : PotentialSpec::zero();
}

PhaseSpec ScenarioConfig::phase_spec() const {
  if (phase == "quadratic_focusing") return PhaseSpec::quadratic_focusing(focus_time);
  if (phase == "superquadratic") return PhaseSpec::superquadratic(focus_time, delta);
  return PhaseSpec::zero();
}

NonlinearitySpec ScenarioConfig::nonlinearity_spec() const {
  if (nonlinearity == "none") return NonlinearitySpec::none();
  if (nonlinearity == "cubic") return NonlinearitySpec::cubic(kappa);
  if (nonlinearity == "saturating") {
    return NonlinearitySpec::smooth_defocusing([](double y) { return y / (1.0 + y); },
                                               [](double y) { return 1.0 / ((1.0 + y) * (1.0 + y)); }, kappa,
                                               "saturating");
  }
  return NonlinearitySpec::smooth_defocusing([](double y) { return y + y * y; },
                                             [](double y) { return 1.0 + 2.0 * y; }, kappa, "cubic_quintic");
}

Profile ScenarioConfig::a0_profile() const { return make_profile(a0, *this); }
Profile ScenarioConfig::a1_profile() const { return make_profile(a1, *this); }

std::vector<double> ScenarioConfig::times() const {
  std::vector<double> ts;
  for (int k = 0; k <= snapshots; ++k) ts.push_back(t_final * k / snapshots);
  return ts;
}

void validate(const ScenarioConfig& c) {
  const std::string root = "config";
  if (c.name.empty()) fail(root + ".name", "must not be empty");
  if (c.dim != 1 && c.dim != 2) fail(root + ".grid.dim", "must be 1 or 2");
  if (c.points < 16 || (c.points & (c.points - 1)) != 0) {
    fail(root + ".grid.points", "must be a power of two >= 16, got " + std::to_string(c.points));
  }
  if (!(c.half_width > 0.0) || !std::isfinite(c.half_width)) fail(root + ".grid.half_width", "must be positive");
  if (!one_of(c.potential, {"zero", "harmonic"})) {
    fail(root + ".potential.kind", "expected zero or harmonic, got \"" + c.potential + "\"");
  }
  if (c.omega.empty() || (c.omega.size() != 1 && int(c.omega.size()) != c.dim)) {
    fail(root + ".potential.omega", "needs 1 or " + std::to_string(c.dim) + " frequencies");
  }
  for (double w : c.omega) {
    if (!(w > 0.0) || !std::isfinite(w)) fail(root + ".potential.omega", "frequencies must be positive");
  }
  if (!one_of(c.phase, {"zero", "quadratic_focusing", "superquadratic"})) {
    fail(root + ".phase.kind", "expected zero, quadratic_focusing or superquadratic, got \"" + c.phase + "\"");
  }
  if (!(c.focus_time > 0.0) || !std::isfinite(c.focus_time)) fail(root + ".phase.focus_time", "must be positive");
  if (!(c.delta >= 0.0) || !std::isfinite(c.delta)) fail(root + ".phase.delta", "must be >= 0");
  if (!one_of(c.nonlinearity, {"none", "cubic", "saturating", "cubic_quintic"})) {
    fail(root + ".nonlinearity.kind",
         "expected none, cubic, saturating or cubic_quintic, got \"" + c.nonlinearity + "\"");
  }
  if (!(c.kappa >= 0.0) || !std::isfinite(c.kappa)) fail(root + ".nonlinearity.kappa", "must be >= 0");
  if (c.regime == Regime::weak && c.nonlinearity != "none" && !(c.kappa > 0.5)) {
    fail(root + ".nonlinearity.kappa", "regime weak requires kappa > 1/2, got " + num(c.kappa));
  }
  if (c.regime == Regime::super) {
    if (c.nonlinearity == "none") fail(root + ".nonlinearity.kind", "regime super needs a nonlinearity");
    if (c.kappa != 0.0) fail(root + ".nonlinearity.kappa", "regime super requires kappa = 0, got " + num(c.kappa));
  }
  validate_profile(c.a0, root + ".a0", c);
  validate_profile(c.a1, root + ".a1", c);
  if (c.regime != Regime::reference && c.a0.kind == "zero") fail(root + ".a0.kind", "approximants need a0 != 0");
  if (c.epsilons.empty()) fail(root + ".epsilons", "must not be empty");
  for (std::size_t i = 0; i < c.epsilons.size(); ++i) {
    const double e = c.epsilons[i];
    const std::string at = root + ".epsilons[" + std::to_string(i) + "]";
    if (!(e > 0.0) || !std::isfinite(e)) fail(at, "must be positive");
    for (std::size_t k = 0; k < i; ++k) {
      if (c.epsilons[k] == e) fail(at, "duplicates an earlier entry");
    }
  }
  if (!(c.t_final > 0.0) || !std::isfinite(c.t_final)) fail(root + ".t_final", "must be positive");
  if (c.snapshots < 4) fail(root + ".snapshots", "must be >= 4");
  if (!(c.dt_max > 0.0)) fail(root + ".dt_max", "must be positive");
  if (c.small_time) {
    if (c.regime != Regime::super) fail(root + ".small_time", "only applies to regime super");
    const auto& st = *c.small_time;
    if (!(st.epsilon > 0.0) || !std::isfinite(st.epsilon)) fail(root + ".small_time.epsilon", "must be positive");
    if (st.times.size() < 3) fail(root + ".small_time.times", "needs at least three times");
    for (std::size_t i = 0; i < st.times.size(); ++i) {
      if (!(st.times[i] > (i ? st.times[i - 1] : 0.0))) {
        fail(root + ".small_time.times", "must be positive and increasing");
      }
    }
  }
  if (!(c.tolerances.max_affine_residual > 0.0)) fail(root + ".tolerances.max_affine_residual", "must be positive");
}

ScenarioConfig parse_config(const std::string& text) {
  json j = parse_json(text, "config");
  if (!j.is_object()) fail("config", "expected an object");
  if (j.contains("preset")) {
    if (!j["preset"].is_string()) fail("config.preset", "expected a string");
    const std::string name = j["preset"].get<std::string>();
    json base = json::parse(preset_json(name));
    j.erase("preset");
    base.merge_patch(j);
    return from_json(base);
  }
  return from_json(j);
}

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& [name, text] : preset_table()) names.push_back(name);
  return names;
}

std::string preset_json(const std::string& name) {
  for (const auto& [n, text] : preset_table()) {
    if (n == name) return text;
  }
  std::string known;
  for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
  throw ConfigError("config.preset: unknown preset \"" + name + "\" (known: " + known + ")");
}

ScenarioConfig preset(const std::string& name) { return parse_config(preset_json(name)); }

namespace {

ordered_json number_or_null(double x) { return std::isfinite(x) ? ordered_json(x) : ordered_json(nullptr); }

ordered_json profile_json(const ProfileConfig& p) {
  ordered_json j;
  j["kind"] = p.kind;
  j["center"] = p.center;
  j["width"] = p.width;
  j["amplitude"] = p.amplitude;
  j["radius"] = p.radius;
  j["axis"] = p.axis;
  j["values"] = p.values;
  return j;
}

ordered_json config_object(const ScenarioConfig& c) {
  ordered_json j;
  j["name"] = c.name;
  j["regime"] = to_string(c.regime);
  j["grid"] = {{"dim", c.dim}, {"points", c.points}, {"half_width", c.half_width}};
  j["potential"] = {{"kind", c.potential}, {"omega", c.omega}};
  j["phase"] = {{"kind", c.phase}, {"focus_time", c.focus_time}, {"delta", c.delta}};
  j["nonlinearity"] = {{"kind", c.nonlinearity}, {"kappa", c.kappa}};
  j["a0"] = profile_json(c.a0);
  j["a1"] = profile_json(c.a1);
  j["epsilons"] = c.epsilons;
  j["t_final"] = c.t_final;
  j["snapshots"] = c.snapshots;
  j["dt_max"] = number_or_null(c.dt_max);
  if (c.small_time) {
    j["small_time"] = {{"epsilon", c.small_time->epsilon}, {"times", c.small_time->times}};
  } else {
    j["small_time"] = nullptr;
  }
  j["tolerances"] = {{"min_slope", c.tolerances.min_slope},
                     {"min_r2", c.tolerances.min_r2},
                     {"max_affine_residual", c.tolerances.max_affine_residual}};
  j["output"] = {{"fields", c.dump_fields}, {"rays", c.dump_rays}};
  return j;
}

}  // namespace

std::string config_json(const ScenarioConfig& config) { return config_object(config).dump(2); }

// ---------------------------------------------------------------------------
// sweep

namespace {

template <class E>
[[noreturn]] void rethrow_as(const E& e, const std::string& context) {
  throw E(std::string(e.what()) + context);
}

[[noreturn]] void rethrow_annotated(std::exception_ptr p, const std::string& context) {
  try {
    std::rethrow_exception(p);
  } catch (const ShockError& e) {
    throw ShockError(std::string(e.what()) + context, e.time_reached());
  } catch (const PotentialError& e) {
    rethrow_as(e, context);
  } catch (const InversionError& e) {
    rethrow_as(e, context);
  } catch (const PastCausticError& e) {
    rethrow_as(e, context);
  } catch (const InstabilityError& e) {
    rethrow_as(e, context);
  } catch (const DomainTooSmallError& e) {
    rethrow_as(e, context);
  } catch (const SolverError& e) {
    rethrow_as(e, context);
  } catch (const GridMismatchError& e) {
    rethrow_as(e, context);
  } catch (const AssumptionError& e) {
    rethrow_as(e, context);
  } catch (const ConfigError& e) {
    rethrow_as(e, context);
  } catch (const IoError& e) {
    rethrow_as(e, context);
  } catch (const Error& e) {
    rethrow_as(e, context);
  }
}

/// Data shared read-only by every sweep member.
struct SweepContext {
  const ScenarioConfig& config;
  Grid grid;
  std::vector<double> times;
  PotentialSpec potential;
  PhaseSpec phase;
  NonlinearitySpec f;
  Profile a0;
  Profile a1;
  std::optional<TracedEikonal> traced;
  std::optional<WeakWkbField> weak;
  std::optional<GrenierTrajectory> limit;
  std::optional<CorrectorPair> corrector;
};

ClaimErrors summarize(std::string claim, std::vector<ErrorRecord> series) {
  ClaimErrors c{std::move(claim), std::move(series), 0.0, 0.0, 0.0};
  for (const auto& r : c.series) c.sup_l2 = std::max(c.sup_l2, r.l2);
  if (!c.series.empty()) {
    c.final_l2 = c.series.back().l2;
    c.final_linf = c.series.back().linf;
  }
  return c;
}

EpsilonResult run_member(const SweepContext& ctx, double eps) {
  const ScenarioConfig& cfg = ctx.config;
  NlsProblem problem{initial_data(ctx.grid, ctx.a0, ctx.a1, ctx.phase, eps), ctx.potential, ctx.f, ctx.times};
  problem.dt_max = cfg.dt_max;
  NlsRun run = solve(problem);

  EpsilonResult out;
  out.epsilon = eps;
  out.dt = run.dt;
  out.boundary_fraction = run.boundary_fraction;

  std::vector<Conserved> laws{Conserved::mass};
  const bool cubic = ctx.f.kind() != NonlinearitySpec::Kind::smooth;
  const bool free = ctx.potential.kind() == PotentialSpec::Kind::zero;
  if (cubic && !ctx.potential.time_dependent()) laws.push_back(Conserved::energy);
  if (free) laws.push_back(Conserved::momentum);
  if (cubic && free) laws.push_back(Conserved::pseudo_conformal);
  for (Conserved q : laws) {
    out.ledgers.push_back(conservation_ledger(run, ctx.potential, ctx.f, q));
    out.drifts[to_string(q)] = out.ledgers.back().max_drift;
  }

  auto compare = [&](const std::string& name, auto&& approximant) {
    std::vector<ErrorRecord> series;
    std::vector<WaveField> kept;
    for (std::size_t i = 0; i < ctx.times.size(); ++i) {
      WaveField w = approximant(i);
      series.push_back(field_error(run.fields[i], w, ctx.times[i]));
      if (cfg.dump_fields) kept.push_back(std::move(w));
    }
    out.claims.push_back(summarize(name, std::move(series)));
    if (cfg.dump_fields) out.approximant_fields.emplace(name, std::move(kept));
  };

  const EikonalField* eik = ctx.traced ? &ctx.traced->eikonal : nullptr;
  if (cfg.regime == Regime::weak) {
    compare("weak", [&](std::size_t i) { return assemble_weak(*ctx.weak, *eik, eps, i, true); });
    compare("weak_no_shift", [&](std::size_t i) { return assemble_weak(*ctx.weak, *eik, eps, i, false); });
  } else if (cfg.regime == Regime::super) {
    compare("super_corrected",
            [&](std::size_t i) { return assemble_super(*ctx.limit, &*ctx.corrector, *eik, eps, i, true); });
    compare("super_uncorrected",
            [&](std::size_t i) { return assemble_super(*ctx.limit, nullptr, *eik, eps, i, false); });
  }
  if (cfg.dump_fields) out.reference_fields = std::move(run.fields);
  return out;
}

SmallTimeResult run_small_time(const SweepContext& ctx) {
  const SmallTimeConfig& st = *ctx.config.small_time;
  const double t_max = st.times.back();
  std::vector<double> times;
  for (int k = 0; k <= 40; ++k) times.push_back(t_max * k / 40.0);
  for (double t : st.times) times.push_back(t);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end(),
                          [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, b); }),
              times.end());

  const TracedEikonal traced = trace_eikonal(ctx.potential, ctx.phase, ctx.grid, times);
  const WaveField A0(ctx.grid, ctx.a0.sample(ctx.grid).cast<Complex>());
  GrenierOptions opts;
  opts.snapshot_times = times;
  const GrenierTrajectory limit = solve_grenier(traced.eikonal, A0, ctx.f, 0.0, t_max, opts);

  NlsProblem problem{initial_data(ctx.grid, ctx.a0, ctx.a1, ctx.phase, st.epsilon), ctx.potential, ctx.f, times};
  problem.dt_max = ctx.config.dt_max;
  const NlsRun run = solve(problem);

  SmallTimeResult r;
  r.epsilon = st.epsilon;
  std::vector<double> xs, ys;
  for (double t : st.times) {
    const std::size_t i = time_index(times, t);
    r.errors.push_back(
        field_error(run.fields[i], assemble_super(limit, nullptr, traced.eikonal, st.epsilon, i, false), t));
    xs.push_back(t);
    ys.push_back(r.errors.back().l2);
  }
  r.fit = fit_affine(xs, ys);
  r.max_residual = ctx.config.tolerances.max_affine_residual;
  r.pass = r.fit.max_relative_residual < r.max_residual;
  return r;
}

}  // namespace

SweepReport run_sweep(const ScenarioConfig& config) {
  validate(config);
  const std::string where = " [scenario " + config.name + "]";
  SweepReport report;
  report.scenario = config.name;
  report.regime = config.regime;
  report.config = config_json(config);
  report.times = config.times();

  SweepContext ctx{config,
                   config.grid(),
                   report.times,
                   config.potential_spec(),
                   config.phase_spec(),
                   config.nonlinearity_spec(),
                   config.a0_profile(),
                   config.a1_profile(),
                   {},
                   {},
                   {},
                   {}};
  try {
    ctx.potential.validate(ctx.grid);
    ctx.phase.validate(ctx.grid);
    if (config.regime != Regime::reference || config.dump_rays) {
      ctx.traced = trace_eikonal(ctx.potential, ctx.phase, ctx.grid, ctx.times);
      const double h = caustic_horizon(ctx.traced->bundle, EikonalOptions{}.c0);
      if (h != kNoCaustic) report.caustic_horizon = h;
      if (config.dump_rays) report.rays_csv = rays_csv(ctx.traced->bundle);
    }
    if (config.regime == Regime::weak) {
      ctx.weak = build_weak(ctx.traced->bundle, ctx.a0, ctx.f, ctx.grid);
      if (!ctx.f.is_none()) {
        const auto mol = limit_phase_mol(*ctx.weak, ctx.traced->eikonal, ctx.f);
        double worst = 0.0;
        for (std::size_t i = 0; i < mol.size(); ++i) worst = std::max(worst, (mol[i] - ctx.weak->G[i]).abs().maxCoeff());
        report.phase_shift_agreement = worst;
      }
    } else if (config.regime == Regime::super) {
      const WaveField A0(ctx.grid, ctx.a0.sample(ctx.grid).cast<Complex>());
      const WaveField A1(ctx.grid, ctx.a1.sample(ctx.grid).cast<Complex>());
      try {
        ctx.limit = solve_grenier(ctx.traced->eikonal, A0, ctx.f, 0.0, config.t_final);
      } catch (const ShockError& e) {
        report.shock_time = e.time_reached();
        throw;
      }
      ctx.corrector = solve_corrector(*ctx.limit, ctx.traced->eikonal, A1, ctx.f);
      const std::size_t mid = ctx.times.size() / 2;
      report.euler = EulerCheck{ctx.times[mid],
                                euler_residual(*ctx.limit, ctx.traced->eikonal, ctx.potential, ctx.f, mid, 2),
                                euler_residual(*ctx.limit, ctx.traced->eikonal, ctx.potential, ctx.f, mid, 1)};
    }
  } catch (const Error&) {
    rethrow_annotated(std::current_exception(), where);
  }

  std::vector<std::future<EpsilonResult>> members;
  for (double eps : config.epsilons) {
    members.push_back(std::async(std::launch::async, [&ctx, eps] { return run_member(ctx, eps); }));
  }
  std::optional<SmallTimeResult> small;
  std::exception_ptr small_error;
  if (config.small_time) {
    try {
      small = run_small_time(ctx);
    } catch (const Error&) {
      small_error = std::current_exception();
    }
  }
  for (std::size_t k = 0; k < members.size(); ++k) {
    try {
      report.results.push_back(members[k].get());
    } catch (const Error&) {
      for (std::size_t m = k + 1; m < members.size(); ++m) members[m].wait();
      rethrow_annotated(std::current_exception(), " [scenario " + config.name + ", epsilon " +
                                                      num(config.epsilons[k]) + "]");
    }
  }
  if (small_error) {
    rethrow_annotated(small_error,
                      " [scenario " + config.name + ", epsilon " + num(config.small_time->epsilon) + "]");
  }
  report.small_time = small;

  if (config.regime != Regime::reference && config.epsilons.size() >= 3) {
    const bool weak = config.regime == Regime::weak;
    double min_slope = weak ? (config.kappa >= 1.0 || ctx.f.is_none() ? 0.8 : 0.55) : 0.7;
    double min_r2 = weak ? (config.kappa >= 1.0 || ctx.f.is_none() ? 0.98 : 0.95) : 0.0;
    if (config.tolerances.min_slope >= 0.0) min_slope = config.tolerances.min_slope;
    if (config.tolerances.min_r2 >= 0.0) min_r2 = config.tolerances.min_r2;
    for (std::size_t c = 0; c < report.results.front().claims.size(); ++c) {
      std::vector<double> ys;
      for (const auto& r : report.results) {
        ys.push_back(weak ? r.claims[c].final_l2 : r.claims[c].sup_l2);
      }
      if (std::any_of(ys.begin(), ys.end(), [](double y) { return !(y > 0.0); })) continue;
      ClaimFit fit{report.results.front().claims[c].claim, weak ? "final" : "sup", fit_rate(config.epsilons, ys),
                   min_slope, min_r2, false};
      fit.pass = fit.fit.slope >= min_slope && fit.fit.r2 >= min_r2;
      report.fits.push_back(std::move(fit));
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// report emission

std::string report_json(const SweepReport& report) {
  ordered_json j;
  j["scenario"] = report.scenario;
  j["regime"] = to_string(report.regime);
  j["config"] = report.config.empty() ? ordered_json(nullptr) : ordered_json::parse(report.config);
  j["times"] = report.times;
  j["horizons"] = {
      {"caustic", report.caustic_horizon ? ordered_json(*report.caustic_horizon) : ordered_json(nullptr)},
      {"shock", report.shock_time ? ordered_json(*report.shock_time) : ordered_json(nullptr)}};
  ordered_json results = ordered_json::array();
  for (const auto& r : report.results) {
    ordered_json e;
    e["epsilon"] = r.epsilon;
    e["dt"] = r.dt;
    e["boundary_fraction"] = r.boundary_fraction;
    ordered_json claims = ordered_json::array();
    for (const auto& c : r.claims) {
      ordered_json series = ordered_json::array();
      for (const auto& s : c.series) series.push_back({{"t", s.t}, {"l2", s.l2}, {"linf", s.linf}});
      claims.push_back({{"claim", c.claim},
                        {"sup_l2", c.sup_l2},
                        {"final_l2", c.final_l2},
                        {"final_linf", c.final_linf},
                        {"series", std::move(series)}});
    }
    e["claims"] = std::move(claims);
    ordered_json drifts = ordered_json::object();
    for (const auto& [k, v] : r.drifts) drifts[k] = number_or_null(v);
    e["drifts"] = std::move(drifts);
    results.push_back(std::move(e));
  }
  j["epsilons"] = std::move(results);
  ordered_json fits = ordered_json::array();
  for (const auto& f : report.fits) {
    fits.push_back({{"claim", f.claim},
                    {"measure", f.measure},
                    {"xs", f.fit.xs},
                    {"ys", f.fit.ys},
                    {"slope", f.fit.slope},
                    {"intercept", f.fit.intercept},
                    {"r2", f.fit.r2},
                    {"min_slope", f.min_slope},
                    {"min_r2", f.min_r2},
                    {"pass", f.pass}});
  }
  j["fits"] = std::move(fits);
  if (report.small_time) {
    const auto& s = *report.small_time;
    ordered_json errs = ordered_json::array();
    for (const auto& e : s.errors) errs.push_back({{"t", e.t}, {"l2", e.l2}, {"linf", e.linf}});
    j["small_time"] = {{"epsilon", s.epsilon},
                       {"errors", std::move(errs)},
                       {"slope", s.fit.slope},
                       {"intercept", s.fit.intercept},
                       {"max_relative_residual", s.fit.max_relative_residual},
                       {"max_allowed", s.max_residual},
                       {"pass", s.pass}};
  } else {
    j["small_time"] = nullptr;
  }
  if (report.euler) {
    const auto& e = *report.euler;
    j["euler"] = {{"t", e.t},
                  {"coarse", {{"mass", e.coarse.mass}, {"momentum", e.coarse.momentum}}},
                  {"fine", {{"mass", e.fine.mass}, {"momentum", e.fine.momentum}}},
                  {"shrink", {{"mass", number_or_null(e.coarse.mass / e.fine.mass)},
                              {"momentum", number_or_null(e.coarse.momentum / e.fine.momentum)}}}};
  } else {
    j["euler"] = nullptr;
  }
  j["phase_shift_agreement"] =
      report.phase_shift_agreement ? ordered_json(*report.phase_shift_agreement) : ordered_json(nullptr);
  return j.dump(2) + "\n";
}

std::string tables_csv(const SweepReport& report) {
  std::ostringstream out;
  out << "claim,epsilon,sup_l2,final_l2,final_linf\n";
  if (report.results.empty()) return out.str();
  char buf[160];
  for (std::size_t c = 0; c < report.results.front().claims.size(); ++c) {
    for (const auto& r : report.results) {
      const ClaimErrors& e = r.claims[c];
      std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%.17g,%.17g\n", e.claim.c_str(), r.epsilon, e.sup_l2,
                    e.final_l2, e.final_linf);
      out << buf;
    }
  }
  return out.str();
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  out.close();
  if (!out) throw IoError("failed writing " + path.string());
}

std::string field_csv(const Grid& g, const WaveField& u, const std::map<std::string, const WaveField*>& others) {
  std::ostringstream out;
  out << (g.dim() == 1 ? "x" : "x,y") << ",u_re,u_im";
  for (const auto& [name, w] : others) out << "," << name << "_re," << name << "_im";
  out << "\n";
  char buf[64];
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    const Point x = g.point(i);
    for (int a = 0; a < g.dim(); ++a) {
      std::snprintf(buf, sizeof buf, a ? ",%.17g" : "%.17g", x[a]);
      out << buf;
    }
    std::snprintf(buf, sizeof buf, ",%.17g,%.17g", u.values()[i].real(), u.values()[i].imag());
    out << buf;
    for (const auto& [name, w] : others) {
      std::snprintf(buf, sizeof buf, ",%.17g,%.17g", w->values()[i].real(), w->values()[i].imag());
      out << buf;
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace

void emit_report(const SweepReport& report, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
  write_file(out_dir / "report.json", report_json(report));
  write_file(out_dir / "tables.csv", tables_csv(report));
  for (std::size_t k = 0; k < report.results.size(); ++k) {
    const EpsilonResult& r = report.results[k];
    write_file(out_dir / ("ledger_eps" + std::to_string(k) + ".csv"), ledger_csv(r.ledgers));
    if (r.reference_fields.empty()) continue;
    const std::filesystem::path dir = out_dir / "fields";
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    for (std::size_t i = 0; i < r.reference_fields.size(); ++i) {
      std::map<std::string, const WaveField*> others;
      for (const auto& [name, fields] : r.approximant_fields) others[name] = &fields[i];
      write_file(dir / ("eps" + std::to_string(k) + "_t" + std::to_string(i) + ".csv"),
                 field_csv(r.reference_fields[i].grid(), r.reference_fields[i], others));
    }
  }
  if (!report.rays_csv.empty()) write_file(out_dir / "rays.csv", report.rays_csv);
}

}  // namespace wkb
