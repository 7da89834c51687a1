// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <string>

#include "wkb/scenario.hpp"

using namespace wkb;

namespace {

std::map<int, std::pair<bool, std::string>> verdicts;
std::vector<double> mass_drifts;

void verdict(int id, bool pass, const std::string& what) { verdicts[id] = {pass, what}; }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

void guarded(int id, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    verdict(id, false, std::string("threw: ") + e.what());
  }
}

std::vector<double> steps(double dt, double t_end) {
  std::vector<double> ts;
  const int n = int(std::lround(t_end / dt));
  for (int k = 0; k <= n; ++k) ts.push_back(dt * k);
  return ts;
}

void record_drifts(const SweepReport& r) {
  for (const auto& e : r.results) mass_drifts.push_back(e.drifts.at("mass"));
}

const ClaimFit& fit_for(const SweepReport& r, const std::string& claim) {
  for (const auto& f : r.fits) {
    if (f.claim == claim) return f;
  }
  throw std::runtime_error("no fit for claim " + claim);
}

/// Max over `mask` of |phi_eik - exact| at every stored time.
double fixture_error(const EikonalField& eik, const std::function<double(double, double)>& exact) {
  const Grid& g = eik.grid();
  const RealArray mask = central_mask(g, 0.5);
  double worst = 0.0;
  for (std::size_t i = 0; i < eik.size(); ++i) {
    for (Eigen::Index k = 0; k < g.size(); ++k) {
      if (mask[k] == 0.0) continue;
      worst = std::max(worst, std::abs(eik.snapshot(i).phi[k] - exact(eik.times()[i], g.point(k)[0])));
    }
  }
  return worst;
}

void eikonal_fixtures() {
  const Grid g(1, 1024, 12.0);
  const Grid labels(1, 1024, 18.0);
  const double c0 = EikonalOptions{}.c0;

  const ScenarioConfig focus = preset("caustic-delta0");
  const double T = focus.focus_time;
  const double h_focus =
      caustic_horizon(trace_rays(focus.potential_spec(), focus.phase_spec(), labels, steps(0.01, 1.2)), c0);
  const EikonalField ef = eikonal_for(focus.potential_spec(), focus.phase_spec(), g, steps(0.01, 0.5 * h_focus));
  const double e_focus =
      fixture_error(ef, [T](double t, double x) { return x * x / (2 * (t - T)) - 1 / (2 * T); });

  const ScenarioConfig trap = preset("harmonic-trap");
  const double w = trap.omega[0];
  const double h_trap =
      caustic_horizon(trace_rays(trap.potential_spec(), trap.phase_spec(), labels, steps(0.01, 2.0)), c0);
  const EikonalField eh = eikonal_for(trap.potential_spec(), trap.phase_spec(), g, steps(0.01, 0.5 * h_trap));
  const double e_trap = fixture_error(eh, [w](double t, double x) { return -0.5 * w * x * x * std::tan(w * t); });

  verdict(1, e_focus < 1e-6 && e_trap < 1e-6,
          fmt("eikonal fixtures: focusing %.2e to t = %.3g, harmonic %.2e to t = %.3g (< 1e-6)", e_focus,
              ef.times().back(), e_trap, eh.times().back()));
}

void caustic_detection() {
  const double dt = 0.01;
  const ScenarioConfig focus = preset("caustic-delta0");
  const double T = focus.focus_time;
  // Threshold half a step's worth of det = 1 - t/T.
  const double c0 = 0.5 * dt / T;
  const RayBundle b = trace_rays(focus.potential_spec(), focus.phase_spec(), Grid(1, 1024, 18.0), steps(dt, 1.5));
  const double h0 = caustic_horizon(b, c0);

  const double delta = 0.5;
  const Grid rings(1, 256, 6.0);
  const RayBundle s = trace_rays(PotentialSpec::zero(), PhaseSpec::superquadratic(T, delta), rings, steps(dt, 1.5));
  const double hs = caustic_horizon(s, c0);
  double ring_focus = kNoCaustic;
  for (int j = 0; j < rings.points_per_axis(); ++j) {
    const double R = rings.coordinate(j);
    ring_focus = std::min(ring_focus, T / std::pow(R * R + 1, delta));
  }
  verdict(2, std::abs(h0 - T) <= dt && hs <= ring_focus + dt,
          fmt("caustic detection: delta = 0 horizon %.4g vs T = %.4g; delta = %.1f horizon %.4g <= ring focus %.4g "
              "(step %.2g)",
              h0, T, delta, hs, ring_focus, dt));
}

void linear_oracle() {
  const Grid g(1, 1024, 12.0);
  const WaveField u0 =
      initial_data(g, Profile::gaussian(Point::Zero(1), 1.0, 1.0), Profile::zero(), PhaseSpec::zero(), 0.1);
  const NlsRun run = solve(NlsProblem{u0, PotentialSpec::zero(), NonlinearitySpec::none(), {0.5}});
  mass_drifts.push_back(run.max_mass_drift);
  const double e = field_error(run.fields.back(), free_propagate(u0, 0.5)).l2;
  verdict(3, e < 1e-8, fmt("linear oracle: L2 error %.2e at t = 0.5, eps = 0.1 (< 1e-8)", e));
}

void weak_rates(const SweepReport& critical, const SweepReport& sub, const SweepReport& inter) {
  const ClaimFit& c = fit_for(critical, "weak");
  verdict(5, c.fit.slope >= 0.8 && c.fit.r2 >= 0.98,
          fmt("critical rate: slope %.4f (>= 0.8), r2 %.4f (>= 0.98)", c.fit.slope, c.fit.r2));
  const ClaimFit& s = fit_for(sub, "weak_no_shift");
  verdict(6, s.fit.slope >= 0.8, fmt("subcritical rate without G: slope %.4f (>= 0.8), r2 %.4f", s.fit.slope, s.fit.r2));
  const ClaimFit& m = fit_for(inter, "weak");
  verdict(7, m.fit.slope >= 0.55 && m.fit.r2 >= 0.95,
          fmt("intermediate rate: slope %.4f (>= 0.55), r2 %.4f (>= 0.95)", m.fit.slope, m.fit.r2));
}

void super_laws(const SweepReport& r) {
  if (!r.small_time) throw std::runtime_error("super-cubic preset ran without the small-time study");
  const SmallTimeResult& st = *r.small_time;
  verdict(8, st.fit.max_relative_residual < 0.1,
          fmt("small-time law at eps = %g: affine residual %.2f%% (< 10%%)", st.epsilon,
              100 * st.fit.max_relative_residual));
  const ClaimFit& f = fit_for(r, "super_corrected");
  verdict(9, f.fit.slope >= 0.7, fmt("uniform law with corrector: sup-error slope %.4f (>= 0.7)", f.fit.slope));
  if (!r.euler) throw std::runtime_error("super-cubic preset ran without the Euler check");
  const EulerCheck& e = *r.euler;
  const double rm = e.coarse.mass / e.fine.mass, rp = e.coarse.momentum / e.fine.momentum;
  const bool small = e.coarse.mass < 1e-3 && e.coarse.momentum < 1e-3;
  verdict(11, small && rm >= 4.0 && rp >= 4.0,
          fmt("Euler residuals at t = %g: mass %.3e -> %.3e (x%.4f), momentum %.3e -> %.3e (x%.4f); need < 1e-3 and "
              "x >= 4",
              e.t, e.coarse.mass, e.fine.mass, rm, e.coarse.momentum, e.fine.momentum, rp));
}

void conservation(const SweepReport& super) {
  double energy = 0.0, pc = 0.0;
  for (const auto& e : super.results) {
    energy = std::max(energy, e.drifts.at("energy"));
    pc = std::max(pc, e.drifts.at("pseudo_conformal"));
  }
  double mass = 0.0;
  for (double d : mass_drifts) mass = std::max(mass, d);
  verdict(4, mass < 1e-11 && energy < 1e-6 && pc < 1e-5,
          fmt("conservation: mass %.2e over %zu runs (< 1e-11), cubic kappa = 0 energy %.2e (< 1e-6), "
              "pseudo-conformal %.2e (< 1e-5)",
              mass, mass_drifts.size(), energy, pc));
}

void grenier_oracle() {
  const ScenarioConfig c = preset("super-cubic");
  const double eps = 0.05;
  const Grid g = c.grid();
  const auto ts = c.times();
  const Profile a0 = c.a0_profile(), a1 = c.a1_profile();
  const EikonalField eik = eikonal_for(c.potential_spec(), c.phase_spec(), g, ts);
  const WaveField data(g, (a0.sample(g) + eps * a1.sample(g)).cast<Complex>());
  GrenierOptions opts;
  opts.snapshot_times = ts;
  const GrenierTrajectory traj = solve_grenier(eik, data, c.nonlinearity_spec(), eps, c.t_final, opts);
  const NlsRun run = solve(NlsProblem{initial_data(g, a0, a1, c.phase_spec(), eps), c.potential_spec(),
                                      c.nonlinearity_spec(), ts});
  mass_drifts.push_back(run.max_mass_drift);
  double worst = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    worst = std::max(worst, field_error(run.fields[i], reconstruct(traj, eik, i)).l2);
  }
  verdict(10, worst < 1e-3, fmt("finite-eps system vs Schroedinger solve at eps = 0.05: L2 %.2e (< 1e-3)", worst));
}

}  // namespace

int main() {
  const auto start = std::chrono::steady_clock::now();
  guarded(1, eikonal_fixtures);
  guarded(2, caustic_detection);
  guarded(3, linear_oracle);

  std::optional<SweepReport> critical, super;
  guarded(5, [&] {
    critical = run_sweep(preset("weak-critical"));
    const SweepReport sub = run_sweep(preset("weak-subcritical"));
    const SweepReport inter = run_sweep(preset("weak-intermediate"));
    record_drifts(*critical);
    record_drifts(sub);
    record_drifts(inter);
    weak_rates(*critical, sub, inter);
  });
  guarded(8, [&] {
    super = run_sweep(preset("super-cubic"));
    record_drifts(*super);
    super_laws(*super);
  });
  guarded(10, grenier_oracle);
  guarded(4, [&] {
    if (!super) throw std::runtime_error("super-cubic sweep unavailable");
    conservation(*super);
  });
  guarded(12, [&] {
    if (!critical || !critical->phase_shift_agreement) throw std::runtime_error("weak-critical sweep unavailable");
    const double d = *critical->phase_shift_agreement;
    verdict(12, d < 1e-4, fmt("Eulerian phase vs G on the cubic free-flow preset: max %.2e (< 1e-4)", d));
  });

  int failures = 0;
  for (int id = 1; id <= 12; ++id) {
    auto it = verdicts.find(id);
    if (it == verdicts.end()) {
      std::printf("FAIL %2d not evaluated\n", id);
      ++failures;
      continue;
    }
    std::printf("%s %2d %s\n", it->second.first ? "PASS" : "FAIL", id, it->second.second.c_str());
    if (!it->second.first) ++failures;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::printf("%s: %d failing criteria, %.1f s\n", failures ? "FAIL" : "PASS", failures, secs);
  return failures ? 1 : 0;
}
