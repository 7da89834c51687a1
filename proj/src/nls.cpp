#include "wkb/nls.hpp"

#include <cmath>

namespace wkb {

NonlinearitySpec NonlinearitySpec::cubic(double kappa) {
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw ConfigError("nonlinearity.kappa: must be >= 0");
  NonlinearitySpec n;
  n.kind_ = Kind::cubic;
  n.name_ = "cubic";
  n.kappa_ = kappa;
  return n;
}

NonlinearitySpec NonlinearitySpec::smooth_defocusing(Fn f, Fn df, double kappa, std::string name) {
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw ConfigError("nonlinearity.kappa: must be >= 0");
  if (!f || !df) throw ConfigError("nonlinearity: smooth nonlinearity needs f and f'");
  NonlinearitySpec n;
  n.kind_ = Kind::smooth;
  n.name_ = std::move(name);
  n.kappa_ = kappa;
  n.f_ = std::move(f);
  n.df_ = std::move(df);
  return n;
}

double NonlinearitySpec::f(double y) const {
  switch (kind_) {
    case Kind::none:
      return 0.0;
    case Kind::cubic:
      return y;
    case Kind::smooth:
      return f_(y);
  }
  return 0.0;
}

double NonlinearitySpec::df(double y) const {
  switch (kind_) {
    case Kind::none:
      return 0.0;
    case Kind::cubic:
      return 1.0;
    case Kind::smooth:
      return df_(y);
  }
  return 0.0;
}

RealArray NonlinearitySpec::f(const RealArray& y) const {
  switch (kind_) {
    case Kind::none:
      return RealArray::Zero(y.size());
    case Kind::cubic:
      return y;
    case Kind::smooth:
      return y.unaryExpr([this](double v) { return f_(v); });
  }
  return RealArray::Zero(y.size());
}

RealArray NonlinearitySpec::df(const RealArray& y) const {
  switch (kind_) {
    case Kind::none:
      return RealArray::Zero(y.size());
    case Kind::cubic:
      return RealArray::Ones(y.size());
    case Kind::smooth:
      return y.unaryExpr([this](double v) { return df_(v); });
  }
  return RealArray::Zero(y.size());
}

double NonlinearitySpec::coupling(double epsilon) const {
  return is_none() ? 0.0 : std::pow(epsilon, kappa_);
}

void NonlinearitySpec::validate(double y_max) const {
  if (is_none() || kappa_ >= 1.0) return;
  constexpr int samples = 4001;
  for (int i = 0; i < samples; ++i) {
    const double y = y_max * i / (samples - 1);
    if (!(df(y) > 0.0)) {
      throw AssumptionError("nonlinearity: f' must be positive on [0, " + std::to_string(y_max) +
                            "] when kappa < 1; f'(" + std::to_string(y) + ") = " + std::to_string(df(y)));
    }
  }
}

Profile Profile::gaussian(Point center, double width, double amplitude) {
  if (!(width > 0.0)) throw ConfigError("profile.width: must be positive");
  Profile p;
  p.kind_ = Kind::gaussian;
  p.center_ = std::move(center);
  p.width_ = width;
  p.amplitude_ = amplitude;
  return p;
}

Profile Profile::odd_gaussian(Point center, double width, double amplitude, int axis) {
  Profile p = gaussian(std::move(center), width, amplitude);
  if (axis < 0 || axis >= p.center_.size()) throw ConfigError("profile.axis: out of range");
  p.kind_ = Kind::odd_gaussian;
  p.axis_ = axis;
  return p;
}

Profile Profile::bump(Point center, double radius, double amplitude) {
  if (!(radius > 0.0)) throw ConfigError("profile.radius: must be positive");
  Profile p;
  p.kind_ = Kind::bump;
  p.center_ = std::move(center);
  p.width_ = radius;
  p.amplitude_ = amplitude;
  return p;
}

Profile Profile::table(Grid grid, RealArray values) {
  if (values.size() != grid.size()) throw ConfigError("profile.values: length does not match the grid");
  if (!values.allFinite()) throw ConfigError("profile.values: non-finite entry");
  Profile p;
  p.kind_ = Kind::table;
  p.table_grid_ = std::move(grid);
  p.table_ = std::move(values);
  return p;
}

double Profile::operator()(const Point& x) const {
  switch (kind_) {
    case Kind::zero:
      return 0.0;
    case Kind::gaussian:
      return amplitude_ * std::exp(-(x - center_).squaredNorm() / (2.0 * width_ * width_));
    case Kind::odd_gaussian:
      return amplitude_ * (x[axis_] - center_[axis_]) *
             std::exp(-(x - center_).squaredNorm() / (2.0 * width_ * width_));
    case Kind::bump: {
      const double r2 = (x - center_).squaredNorm() / (width_ * width_);
      return r2 < 1.0 ? amplitude_ * std::exp(1.0 - 1.0 / (1.0 - r2)) : 0.0;
    }
    case Kind::table:
      throw ConfigError("profile: a table profile can only be sampled on its own grid");
  }
  return 0.0;
}

RealArray Profile::sample(const Grid& grid) const {
  if (kind_ == Kind::table) {
    if (*table_grid_ != grid) throw GridMismatchError("profile: table grid differs from the requested grid");
    return table_;
  }
  if (kind_ != Kind::zero && center_.size() != grid.dim()) {
    throw ConfigError("profile.center: dimension does not match the grid");
  }
  RealArray v(grid.size());
  for (Eigen::Index i = 0; i < grid.size(); ++i) v[i] = (*this)(grid.point(i));
  return v;
}

void check_phase_resolution(const Grid& grid, double max_phase_gradient, double epsilon,
                            double resolution_factor, const std::string& where) {
  if (!(max_phase_gradient > 0.0)) return;
  const double needed = resolution_factor * 2.0 * M_PI * epsilon / max_phase_gradient;
  if (grid.spacing() <= needed) return;
  int n = grid.points_per_axis();
  while (2.0 * grid.half_width() / n > needed) n *= 2;
  throw ConfigError(where + ": grid spacing " + std::to_string(grid.spacing()) +
                    " does not resolve the phase at eps = " + std::to_string(epsilon) +
                    "; use at least " + std::to_string(n) + " points per axis");
}

namespace {

constexpr double kSupportThreshold = 1e-8;

WaveField assemble_initial(const Grid& grid, const Profile& a0, const Profile& a1, const RealArray& phi,
                           double max_grad, double epsilon, const InitialDataOptions& options) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) throw ConfigError("initial_data: epsilon must lie in (0, 1]");
  check_phase_resolution(grid, max_grad, epsilon, options.resolution_factor, "initial_data");
  const RealArray amp = a0.sample(grid) + epsilon * a1.sample(grid);
  ComplexArray u(grid.size());
  for (Eigen::Index i = 0; i < grid.size(); ++i) u[i] = amp[i] * std::polar(1.0, phi[i] / epsilon);
  return WaveField(grid, std::move(u), epsilon);
}

RealArray support_weight(const Grid& grid, const Profile& a0, const Profile& a1) {
  RealArray w = a0.sample(grid).abs() + a1.sample(grid).abs();
  const double m = w.maxCoeff();
  return m > 0.0 ? RealArray(w / m) : w;
}

}  // namespace

WaveField initial_data(const Grid& grid, const Profile& a0, const Profile& a1, const PhaseSpec& phase,
                       double epsilon, const InitialDataOptions& options) {
  const RealArray weight = support_weight(grid, a0, a1);
  const double max_grad = phase.max_gradient(grid, weight, kSupportThreshold);
  return assemble_initial(grid, a0, a1, phase.sample(grid), max_grad, epsilon, options);
}

WaveField initial_data(const Grid& grid, const Profile& a0, const Profile& a1, const EikonalField& eikonal,
                       double epsilon, const InitialDataOptions& options) {
  if (eikonal.grid() != grid) throw GridMismatchError("initial_data: eikonal grid differs");
  const RealArray weight = support_weight(grid, a0, a1);
  const EikonalSnapshot& s = eikonal.snapshot(0);
  RealArray g2 = RealArray::Zero(grid.size());
  for (const auto& g : s.grad) g2 += g.square();
  double max_grad = 0.0;
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    if (weight[i] > kSupportThreshold) max_grad = std::max(max_grad, std::sqrt(g2[i]));
  }
  return assemble_initial(grid, a0, a1, s.phi, max_grad, epsilon, options);
}

StrangStepper::StrangStepper(const Grid& grid, double epsilon, double dt, const PotentialSpec& potential,
                             const NonlinearitySpec& nonlinearity)
    : spectral_(spectral_for(grid)),
      grid_(grid),
      epsilon_(epsilon),
      dt_(dt),
      potential_(potential),
      nonlinearity_(nonlinearity),
      coupling_(nonlinearity.coupling(epsilon)) {
  if (!(dt > 0.0)) throw ConfigError("strang_step: dt must be positive");
  if (!(epsilon > 0.0)) throw ConfigError("strang_step: epsilon must be positive");
  const RealArray phase = -epsilon * spectral_.k_squared() * dt / 4.0;
  kinetic_half_ = phase.unaryExpr([](double p) { return std::polar(1.0, p); });
  if (!potential.time_dependent()) static_potential_ = potential.sample(grid, 0.0);
}

void StrangStepper::step(ComplexArray& u, double t) const {
  spectral_.apply_in_place(u, kinetic_half_);
  RealArray theta = potential_.time_dependent() ? potential_.sample(grid_, t + 0.5 * dt_) : static_potential_;
  if (coupling_ != 0.0) theta += coupling_ * nonlinearity_.f(RealArray(u.abs2()));
  theta *= -dt_ / epsilon_;
  u *= theta.unaryExpr([](double p) { return std::polar(1.0, p); });
  spectral_.apply_in_place(u, kinetic_half_);
}

WaveField strang_step(const WaveField& u, double t, double dt, const PotentialSpec& potential,
                      const NonlinearitySpec& nonlinearity) {
  if (!u.epsilon()) throw ConfigError("strang_step: field carries no epsilon");
  const StrangStepper stepper(u.grid(), *u.epsilon(), dt, potential, nonlinearity);
  ComplexArray v = u.values();
  stepper.step(v, t);
  return u.with_values(std::move(v));
}

double default_time_step(double t_final, double epsilon, double dt_max) {
  return std::min({t_final / 2000.0, 0.1 * epsilon, dt_max});
}

double boundary_mass_fraction(const WaveField& u) {
  const Grid& g = u.grid();
  const RealArray rho = u.values().abs2();
  const double total = rho.sum();
  if (!(total > 0.0)) return 0.0;
  double edge = 0.0;
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    if (g.distance_to_boundary(g.point(i)) < g.half_width() / 8.0) edge += rho[i];
  }
  return edge / total;
}

NlsRun solve(const NlsProblem& p) {
  const WaveField& u0 = p.initial;
  if (!u0.epsilon()) throw ConfigError("solve: initial field carries no epsilon");
  const double eps = *u0.epsilon();
  const auto& ts = p.snapshot_times;
  if (ts.empty()) throw ConfigError("solve: no snapshot times");
  if (ts.front() < 0.0) throw ConfigError("solve: snapshot times must be nonnegative");
  for (std::size_t k = 1; k < ts.size(); ++k) {
    if (!(ts[k] > ts[k - 1])) throw ConfigError("solve: snapshot times must be strictly increasing");
  }
  const Grid& grid = u0.grid();
  const double t_final = ts.back();
  const double dt = p.dt > 0.0 ? p.dt : default_time_step(std::max(t_final, 1e-300), eps, p.dt_max);

  NlsRun run;
  run.epsilon = eps;
  run.dt = dt;
  ComplexArray u = u0.values();
  const double dv = grid.cell_volume();
  const double mass0 = u.abs2().sum() * dv;
  run.step_times.push_back(0.0);
  run.step_mass.push_back(mass0);

  auto snapshot = [&](double t) {
    WaveField f(grid, u, eps);
    if (p.check_boundary) {
      const double frac = boundary_mass_fraction(f);
      run.boundary_fraction = std::max(run.boundary_fraction, frac);
      if (frac > 1e-8) {
        throw DomainTooSmallError("solve: mass fraction " + std::to_string(frac) + " within L/8 of the edge at t = " +
                                  std::to_string(t) + " (eps = " + std::to_string(eps) + "); enlarge the box");
      }
    }
    run.times.push_back(t);
    run.fields.push_back(std::move(f));
  };

  double t = 0.0;
  for (double target : ts) {
    const double span = target - t;
    if (span > 0.0) {
      const long steps = std::max(1L, long(std::ceil(span / dt - 1e-9)));
      const double h = span / double(steps);
      const StrangStepper local(grid, eps, h, p.potential, p.nonlinearity);
      for (long s = 0; s < steps; ++s) {
        local.step(u, t + s * h);
        const double m = u.abs2().sum() * dv;
        const double drift = std::abs(m - mass0) / mass0;
        run.max_mass_drift = std::max(run.max_mass_drift, drift);
        run.step_times.push_back(t + (s + 1) * h);
        run.step_mass.push_back(m);
        if (!std::isfinite(m) || drift > p.mass_tolerance) {
          throw InstabilityError("solve: relative mass drift " + std::to_string(drift) + " at t = " +
                                 std::to_string(t + (s + 1) * h) + " (eps = " + std::to_string(eps) + ")");
        }
      }
      t = target;
    }
    snapshot(target);
  }
  return run;
}

WaveField free_propagate(const WaveField& u, double t) {
  if (!u.epsilon()) throw ConfigError("free_propagate: field carries no epsilon");
  const Spectral& sp = spectral_for(u.grid());
  const RealArray phase = -(*u.epsilon()) * sp.k_squared() * t / 2.0;
  const ComplexArray m = phase.unaryExpr([](double p) { return std::polar(1.0, p); });
  return u.with_values(sp.apply(u.values(), m));
}

}  // namespace wkb
