#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "wkb/scenario.hpp"

namespace {

std::string read_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw wkb::IoError("cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

/// Accepts a file path or a bare preset name.
wkb::ScenarioConfig load(const std::string& arg) {
  for (const auto& name : wkb::preset_names()) {
    if (arg == name) return wkb::preset(name);
  }
  return wkb::parse_config(read_config(arg));
}

void summarize(const wkb::SweepReport& r) {
  std::printf("scenario %s (%s)\n", r.scenario.c_str(), wkb::to_string(r.regime));
  for (const auto& e : r.results) {
    std::printf("  eps %-8g dt %-10.3g", e.epsilon, e.dt);
    for (const auto& c : e.claims) std::printf("  %s %.3e", c.claim.c_str(), c.sup_l2);
    auto mass = e.drifts.find("mass");
    if (mass != e.drifts.end()) std::printf("  mass drift %.2e", mass->second);
    std::printf("\n");
  }
  for (const auto& f : r.fits) {
    std::printf("  rate %-18s slope %.4f r2 %.4f  %s\n", f.claim.c_str(), f.fit.slope, f.fit.r2,
                f.pass ? "ok" : "below threshold");
  }
  if (r.small_time) {
    std::printf("  small-time eps %g affine residual %.3e  %s\n", r.small_time->epsilon,
                r.small_time->fit.max_relative_residual, r.small_time->pass ? "ok" : "above threshold");
  }
  if (r.euler) {
    std::printf("  euler t %g mass %.3e -> %.3e momentum %.3e -> %.3e\n", r.euler->t, r.euler->coarse.mass,
                r.euler->fine.mass, r.euler->coarse.momentum, r.euler->fine.momentum);
  }
  if (r.phase_shift_agreement) std::printf("  phase shift agreement %.3e\n", *r.phase_shift_agreement);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semiclassical NLS experiments: reference solves, WKB approximants and rate studies"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::vector<double> eps_override;
  bool quiet = false;

  auto* run = app.add_subcommand("run", "run an epsilon sweep and write the report");
  run->add_option("config", config_path, "config JSON file or preset name")->required();
  run->add_option("--out", out_dir, "output directory")->capture_default_str();
  run->add_option("--epsilon-override", eps_override, "replace the epsilon list")->delimiter(',');
  run->add_flag("--quiet", quiet, "suppress the summary");

  auto* presets = app.add_subcommand("presets", "list presets, or print one as JSON");
  std::string preset_name;
  presets->add_option("name", preset_name, "preset to print");

  auto* check = app.add_subcommand("check", "validate a config without running it");
  check->add_option("config", config_path, "config JSON file or preset name")->required();
  check->add_option("--epsilon-override", eps_override, "replace the epsilon list")->delimiter(',');
  check->add_flag("--quiet", quiet, "print nothing on success");

  CLI11_PARSE(app, argc, argv);

  try {
    if (presets->parsed()) {
      if (preset_name.empty()) {
        for (const auto& n : wkb::preset_names()) std::printf("%s\n", n.c_str());
      } else {
        std::printf("%s\n", wkb::preset_json(preset_name).c_str());
      }
      return 0;
    }
    wkb::ScenarioConfig config = load(config_path);
    if (!eps_override.empty()) {
      config.epsilons = eps_override;
      wkb::validate(config);
    }
    if (check->parsed()) {
      if (!quiet) std::printf("%s\n", wkb::config_json(config).c_str());
      return 0;
    }
    const wkb::SweepReport report = wkb::run_sweep(config);
    wkb::emit_report(report, out_dir);
    if (!quiet) {
      summarize(report);
      std::printf("wrote %s\n", out_dir.c_str());
    }
    return 0;
  } catch (const wkb::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const wkb::SolverError& e) {
    std::fprintf(stderr, "solver error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
