#pragma once

#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wkb/diagnostics.hpp"
#include "wkb/wkb_super.hpp"
#include "wkb/wkb_weak.hpp"

namespace wkb {

enum class Regime { weak, super, reference };

const char* to_string(Regime r);

struct ProfileConfig {
  std::string kind = "gaussian";
  std::vector<double> center;
  double width = 1.0;
  double amplitude = 1.0;
  double radius = 1.0;
  int axis = 0;
  std::vector<double> values;
};

struct SmallTimeConfig {
  double epsilon = 0.01;
  std::vector<double> times;
};

/// Pass thresholds applied to the fits in a report; negative means the
/// regime default.
struct Tolerances {
  double min_slope = -1.0;
  double min_r2 = -1.0;
  double max_affine_residual = 0.1;
};

struct ScenarioConfig {
  std::string name = "custom";
  Regime regime = Regime::reference;
  int dim = 1;
  int points = 1024;
  double half_width = 12.0;
  std::string potential = "zero";
  std::vector<double> omega{1.0};
  std::string phase = "zero";
  double focus_time = 1.0;
  double delta = 0.0;
  std::string nonlinearity = "cubic";
  double kappa = 1.0;
  ProfileConfig a0{};
  ProfileConfig a1{"zero", {}, 1.0, 1.0, 1.0, 0, {}};
  std::vector<double> epsilons{0.2, 0.1, 0.05, 0.025};
  double t_final = 0.5;
  int snapshots = 50;
  double dt_max = std::numeric_limits<double>::infinity();
  std::optional<SmallTimeConfig> small_time;
  Tolerances tolerances{};
  bool dump_fields = false;
  bool dump_rays = false;

  Grid grid() const;
  PotentialSpec potential_spec() const;
  PhaseSpec phase_spec() const;
  NonlinearitySpec nonlinearity_spec() const;
  Profile a0_profile() const;
  Profile a1_profile() const;
  /// snapshots + 1 equispaced times on [0, t_final].
  std::vector<double> times() const;
};

/// Parses and validates a JSON config. A "preset" key expands the named preset
/// and the remaining keys are merged over it. Unknown keys, type errors and
/// violated invariants raise ConfigError naming the offending field path.
ScenarioConfig parse_config(const std::string& text);

/// Re-checks the invariants of a config built in code.
void validate(const ScenarioConfig& config);

std::vector<std::string> preset_names();
/// JSON text of a preset; ConfigError for an unknown name.
std::string preset_json(const std::string& name);
ScenarioConfig preset(const std::string& name);

/// Canonical JSON of a config (all fields, fixed key order).
std::string config_json(const ScenarioConfig& config);

struct ClaimErrors {
  std::string claim;
  std::vector<ErrorRecord> series;
  double sup_l2 = 0.0;
  double final_l2 = 0.0;
  double final_linf = 0.0;
};

struct EpsilonResult {
  double epsilon = 0.0;
  double dt = 0.0;
  double boundary_fraction = 0.0;
  std::vector<ClaimErrors> claims;
  std::map<std::string, double> drifts;
  std::vector<Ledger> ledgers;
  /// Filled when the config asks for field dumps.
  std::vector<WaveField> reference_fields;
  std::map<std::string, std::vector<WaveField>> approximant_fields;
};

struct ClaimFit {
  std::string claim;
  /// "final" or "sup": which error of each epsilon entered the fit.
  std::string measure;
  RateFit fit;
  double min_slope = 0.0;
  double min_r2 = 0.0;
  bool pass = false;
};

struct SmallTimeResult {
  double epsilon = 0.0;
  std::vector<ErrorRecord> errors;
  AffineFit fit;
  double max_residual = 0.0;
  bool pass = false;
};

struct EulerCheck {
  double t = 0.0;
  EulerResidual coarse;
  EulerResidual fine;
};

struct SweepReport {
  std::string scenario;
  Regime regime = Regime::reference;
  std::string config;
  std::vector<double> times;
  std::vector<EpsilonResult> results;
  std::vector<ClaimFit> fits;
  std::optional<SmallTimeResult> small_time;
  std::optional<EulerCheck> euler;
  /// Caustic horizon of the traced rays, absent when none was met.
  std::optional<double> caustic_horizon;
  /// Time the shock monitor fired, absent when it stayed quiet.
  std::optional<double> shock_time;
  std::optional<double> phase_shift_agreement;
  std::string rays_csv;
};

/// Reference solves and regime approximants for every epsilon, run
/// concurrently, followed by the rate fits. Solver errors are rethrown with
/// the scenario and epsilon appended to the message.
SweepReport run_sweep(const ScenarioConfig& config);

/// report.json, tables.csv, ledger CSVs and optional field dumps under
/// out_dir. IoError names the failing path.
void emit_report(const SweepReport& report, const std::filesystem::path& out_dir);

std::string report_json(const SweepReport& report);
/// One row per claim per epsilon.
std::string tables_csv(const SweepReport& report);

}  // namespace wkb
