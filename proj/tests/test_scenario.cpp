#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <fstream>

#include "json.hpp"
#include "wkb/eikonal.hpp"
#include "wkb/scenario.hpp"

using namespace wkb;
using nlohmann::json;

namespace {

std::string config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

/// Cheap variants of the built-in scenarios for end-to-end checks.
ScenarioConfig small(const std::string& name) {
  ScenarioConfig c = preset(name);
  c.points = 256;
  c.t_final = 0.2;
  c.snapshots = 4;
  c.small_time.reset();
  return c;
}

ScenarioConfig small_reference() {
  ScenarioConfig c = small("reference-linear");
  c.epsilons = {0.2, 0.1};
  return c;
}

std::vector<double> uniform_times(double t_end, int steps) {
  std::vector<double> ts;
  for (int k = 0; k <= steps; ++k) ts.push_back(t_end * k / steps);
  return ts;
}

}  // namespace

TEST_CASE("defaults") {
  const ScenarioConfig c = parse_config("{}");
  CHECK(c.points == 1024);
  CHECK(c.half_width == 12.0);
  CHECK(c.snapshots == 50);
  CHECK(c.regime == Regime::reference);
  CHECK(c.times().size() == 51);
  CHECK(c.times().back() == c.t_final);
  CHECK(c.grid() == Grid(1, 1024, 12.0));
}

TEST_CASE("regime rules") {
  const std::string msg = config_error(R"({"regime": "weak", "nonlinearity": {"kind": "cubic", "kappa": 0.3}})");
  CHECK(msg.find("kappa > 1/2") != std::string::npos);
  CHECK(msg.find("config.nonlinearity.kappa") != std::string::npos);
  CHECK(config_error(R"({"regime": "weak", "nonlinearity": {"kind": "none"}})").empty());
  CHECK_FALSE(config_error(R"({"regime": "super", "nonlinearity": {"kind": "cubic", "kappa": 1}})").empty());
  CHECK_FALSE(config_error(R"({"regime": "super", "nonlinearity": {"kind": "none", "kappa": 0}})").empty());
  CHECK_FALSE(config_error(R"({"regime": "weak", "small_time": {"epsilon": 0.01, "times": [0.1, 0.2, 0.3]}})").empty());
  CHECK_FALSE(config_error(R"({"regime": "sideways"})").empty());
}

TEST_CASE("field paths in errors") {
  CHECK(config_error(R"({"bogus": 1})").find("config.bogus: unknown key") != std::string::npos);
  CHECK(config_error(R"({"grid": {"size": 64}})").find("config.grid.size") != std::string::npos);
  CHECK(config_error(R"({"t_final": "long"})").find("config.t_final") != std::string::npos);
  CHECK(config_error(R"({"grid": {"points": 1000}})").find("config.grid.points") != std::string::npos);
  CHECK(config_error(R"({"epsilons": [0.1, 0.1, 0.05]})").find("config.epsilons") != std::string::npos);
  CHECK(config_error(R"({"epsilons": [0.1, -0.05]})").find("config.epsilons") != std::string::npos);
  CHECK(config_error(R"({"snapshots": 2})").find("config.snapshots") != std::string::npos);
  CHECK_FALSE(config_error("{not json").empty());
  CHECK_FALSE(config_error(R"({"preset": "nope"})").empty());
}

TEST_CASE("preset expansion and overrides") {
  const ScenarioConfig c = parse_config(R"({"preset": "caustic-delta0"})");
  CHECK(c.name == "caustic-delta0");
  CHECK(c.regime == Regime::weak);
  CHECK(c.potential == "zero");
  CHECK(c.phase == "quadratic_focusing");
  CHECK(c.focus_time == 1.0);
  CHECK(c.kappa == 1.0);
  const ScenarioConfig o = parse_config(R"({"preset": "caustic-delta0", "grid": {"points": 2048}, "name": "mine"})");
  CHECK(o.points == 2048);
  CHECK(o.half_width == c.half_width);
  CHECK(o.phase == "quadratic_focusing");
  CHECK(o.name == "mine");
  for (const auto& name : preset_names()) {
    CHECK_NOTHROW(validate(preset(name)));
    CHECK(json::parse(preset_json(name))["name"] == name);
  }
  CHECK_THROWS_AS(preset("nope"), ConfigError);
}

TEST_CASE("canonical config round trip") {
  for (const auto& name : preset_names()) {
    const std::string text = config_json(preset(name));
    CHECK(config_json(parse_config(text)) == text);
  }
}

TEST_CASE("focusing preset carries the focusing eikonal") {
  ScenarioConfig c = preset("caustic-delta0");
  c.points = 256;
  const auto ts = uniform_times(0.4, 8);
  const EikonalField eik = eikonal_for(c.potential_spec(), c.phase_spec(), c.grid(), ts);
  const double T = c.focus_time;
  for (std::size_t i : {std::size_t(0), std::size_t(8)}) {
    const double t = ts[i];
    double err = 0.0;
    for (Eigen::Index k = 0; k < c.grid().size(); ++k) {
      const double x = c.grid().point(k)[0];
      if (std::abs(x) > 6.0) continue;
      err = std::max(err, std::abs(eik.snapshot(i).phi[k] + x * x / (2 * (T - t)) + 1 / (2 * T)));
    }
    CHECK(err < 1e-6);
  }
}

TEST_CASE("harmonic preset carries the harmonic eikonal") {
  ScenarioConfig c = preset("harmonic-trap");
  c.points = 256;
  const auto ts = uniform_times(0.6, 12);
  const EikonalField eik = eikonal_for(c.potential_spec(), c.phase_spec(), c.grid(), ts);
  const double t = ts.back();
  double err = 0.0;
  for (Eigen::Index k = 0; k < c.grid().size(); ++k) {
    const double x = c.grid().point(k)[0];
    if (std::abs(x) > 6.0) continue;
    err = std::max(err, std::abs(eik.snapshot(12).phi[k] + 0.5 * x * x * std::tan(t)));
  }
  CHECK(err < 1e-6);
}

TEST_CASE("reference regime reports ledgers only") {
  const SweepReport r = run_sweep(small_reference());
  REQUIRE(r.results.size() == 2);
  CHECK(r.fits.empty());
  CHECK_FALSE(r.small_time);
  CHECK_FALSE(r.euler);
  for (const auto& e : r.results) {
    CHECK(e.claims.empty());
    CHECK(e.ledgers.size() == 4);
    CHECK(e.drifts.at("mass") < 1e-11);
  }
  CHECK(tables_csv(r) == "claim,epsilon,sup_l2,final_l2,final_linf\n");
}

TEST_CASE("weak sweep end to end") {
  ScenarioConfig c = small("weak-critical");
  c.epsilons = {0.2, 0.1, 0.05};
  const SweepReport r = run_sweep(c);
  REQUIRE(r.results.size() == 3);
  REQUIRE(r.fits.size() == 2);
  CHECK(r.fits[0].claim == "weak");
  CHECK(r.fits[1].claim == "weak_no_shift");
  CHECK(r.fits[0].measure == "final");
  REQUIRE(r.phase_shift_agreement);
  CHECK(*r.phase_shift_agreement < 1e-10);
  CHECK_FALSE(r.caustic_horizon);
  const std::string csv = tables_csv(r);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 2 * 3);
  const json j = json::parse(report_json(r));
  CHECK(j["epsilons"].size() == 3);
  SUBCASE("report is deterministic") { CHECK(report_json(run_sweep(c)) == report_json(r)); }
}

TEST_CASE("super sweep with vanishing first-order data") {
  ScenarioConfig c = small("super-cubic");
  c.a1 = ProfileConfig{"zero", {}, 1.0, 1.0, 1.0, 0, {}};
  c.epsilons = {0.2, 0.1, 0.05};
  const SweepReport r = run_sweep(c);
  REQUIRE(r.euler);
  CHECK(r.fits.size() == 2);
  CHECK(r.fits[0].measure == "sup");
  for (const auto& e : r.results) {
    REQUIRE(e.claims.size() == 2);
    CHECK(e.claims[0].claim == "super_corrected");
    CHECK(e.claims[0].sup_l2 == doctest::Approx(e.claims[1].sup_l2).epsilon(1e-9));
  }
}

TEST_CASE("empty report is valid JSON") {
  const SweepReport r;
  const json j = json::parse(report_json(r));
  CHECK(j["epsilons"].is_array());
  CHECK(j["epsilons"].empty());
  CHECK(j["fits"].empty());
  CHECK(report_json(r).back() == '\n');
}

TEST_CASE("emit_report writes the output tree") {
  ScenarioConfig c = small_reference();
  c.dump_fields = true;
  c.dump_rays = true;
  const SweepReport r = run_sweep(c);
  CHECK_FALSE(r.rays_csv.empty());
  const auto dir = std::filesystem::temp_directory_path() / "wkb_scenario_test";
  std::filesystem::remove_all(dir);
  emit_report(r, dir);
  CHECK(std::filesystem::exists(dir / "report.json"));
  CHECK(std::filesystem::exists(dir / "tables.csv"));
  CHECK(std::filesystem::exists(dir / "rays.csv"));
  CHECK(std::filesystem::exists(dir / "ledger_eps0.csv"));
  CHECK(std::filesystem::exists(dir / "ledger_eps1.csv"));
  CHECK_FALSE(std::filesystem::is_empty(dir / "fields"));
  std::ifstream in(dir / "report.json");
  const json written = json::parse(in);
  CHECK(written["scenario"] == "reference-linear");

  const auto blocker = dir / "plain_file";
  std::ofstream(blocker) << "x";
  try {
    emit_report(r, blocker / "sub");
    FAIL("expected an I/O error");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("plain_file") != std::string::npos);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("solver errors name the scenario") {
  ScenarioConfig c = small_reference();
  c.name = "cramped";
  c.half_width = 3.0;
  try {
    run_sweep(c);
    FAIL("expected a domain error");
  } catch (const DomainTooSmallError& e) {
    CHECK(std::string(e.what()).find("[scenario cramped") != std::string::npos);
  }
}
