#include "wkb/wkb_super.hpp"

#include "wkb/interp.hpp"

namespace wkb {

double symmetrizer_floor(const NonlinearitySpec& f, double a0_sup) {
  if (!(a0_sup >= 0.0) || !std::isfinite(a0_sup)) throw ConfigError("symmetrizer_floor: a0_sup must be finite and >= 0");
  const double y_max = 4.0 * a0_sup * a0_sup;
  constexpr int samples = 4001;
  double floor = std::numeric_limits<double>::infinity();
  for (int i = 0; i < samples; ++i) floor = std::min(floor, f.df(y_max * i / (samples - 1)));
  if (!(floor > 0.0)) {
    throw AssumptionError("symmetrizer_floor: inf f' over [0, " + std::to_string(y_max) + "] is " +
                          std::to_string(floor) + "; the nonlinearity must be defocusing on this range");
  }
  return floor;
}

std::vector<double> GrenierTrajectory::times() const {
  std::vector<double> t;
  for (const auto& s : states) t.push_back(s.t);
  return t;
}

GrenierState GrenierTrajectory::sample(double t) const {
  const TimeStencil st = time_stencil(times(), t, 4);
  if (st.weights.size() == 1) return states[st.first];
  const GrenierState& s0 = states[st.first];
  GrenierState out{t, ComplexArray::Zero(s0.a.size()), std::vector<RealArray>(s0.v.size()),
                   RealArray::Zero(s0.phi.size())};
  for (auto& v : out.v) v = RealArray::Zero(s0.phi.size());
  for (std::size_t j = 0; j < st.weights.size(); ++j) {
    const GrenierState& s = states[st.first + j];
    const double w = st.weights[j];
    out.a += w * s.a;
    out.phi += w * s.phi;
    for (std::size_t d = 0; d < s.v.size(); ++d) out.v[d] += w * s.v[d];
  }
  return out;
}

namespace {

struct Vars {
  ComplexArray a;
  std::vector<RealArray> v;
  RealArray phi;
};

Vars axpy(const Vars& x, double h, const Vars& k) {
  Vars r{x.a + h * k.a, x.v, x.phi + h * k.phi};
  for (std::size_t d = 0; d < r.v.size(); ++d) r.v[d] += h * k.v[d];
  return r;
}

void rk4_combine(Vars& x, double h, const Vars& k1, const Vars& k2, const Vars& k3, const Vars& k4) {
  x.a += h / 6.0 * (k1.a + 2.0 * k2.a + 2.0 * k3.a + k4.a);
  x.phi += h / 6.0 * (k1.phi + 2.0 * k2.phi + 2.0 * k3.phi + k4.phi);
  for (std::size_t d = 0; d < x.v.size(); ++d) x.v[d] += h / 6.0 * (k1.v[d] + 2.0 * k2.v[d] + 2.0 * k3.v[d] + k4.v[d]);
}

/// Spectral helpers that share one forward transform.
class Calculus {
 public:
  Calculus(const Grid& grid, bool dealias) : sp_(spectral_for(grid)), dim_(grid.dim()), dealias_(dealias) {
    const Eigen::Index n = grid.size();
    ones_ = RealArray::Ones(n);
    for (int a = 0; a < dim_; ++a) {
      ik_.push_back(Complex(0.0, 1.0) * first_derivative_symbol(a).cast<Complex>());
    }
  }

  ComplexArray hat(const ComplexArray& f) const {
    ComplexArray g = f;
    sp_.forward(g);
    return g;
  }
  ComplexArray hat(const RealArray& f) const { return hat(ComplexArray(f.cast<Complex>())); }

  ComplexArray back(ComplexArray g) const {
    sp_.inverse(g);
    return g;
  }

  ComplexArray d(const ComplexArray& fhat, int axis) const { return back(fhat * ik_[axis]); }
  ComplexArray lap(const ComplexArray& fhat) const { return back(fhat * (-sp_.k_squared()).cast<Complex>()); }

  ComplexArray project(const ComplexArray& f) const {
    if (!dealias_) return f;
    ComplexArray g = hat(f);
    g *= mask();
    return back(g);
  }
  RealArray project(const RealArray& f) const {
    if (!dealias_) return f;
    return project(ComplexArray(f.cast<Complex>())).real();
  }
  ComplexArray mask() const { return (dealias_ ? sp_.dealias_mask() : ones_).cast<Complex>(); }

  int dim() const { return dim_; }

 private:
  RealArray first_derivative_symbol(int axis) const {
    // Nyquist mode zeroed, as in Spectral::derivative
    RealArray k = sp_.k(axis);
    const Grid& g = sp_.grid();
    for (Eigen::Index i = 0; i < g.size(); ++i) {
      if (g.multi_index(i)[axis] == g.points_per_axis() / 2) k[i] = 0.0;
    }
    return k;
  }

  const Spectral& sp_;
  int dim_;
  bool dealias_;
  RealArray ones_;
  std::vector<ComplexArray> ik_;
};

double max_abs(const RealArray& x) { return x.size() ? x.abs().maxCoeff() : 0.0; }

double stable_step(const Grid& grid, const Vars& s, const EikonalField& eikonal, const NonlinearitySpec& f,
                   double coupling, double epsilon, double cfl, bool dealias) {
  double speed = 0.0;
  RealArray u2 = RealArray::Zero(grid.size());
  for (int d = 0; d < grid.dim(); ++d) u2 += s.v[d].square();
  double gmax = 0.0;
  if (!eikonal.is_zero()) {
    for (std::size_t k = 0; k < eikonal.size(); ++k) {
      RealArray g2 = RealArray::Zero(grid.size());
      for (const auto& g : eikonal.snapshot(k).grad) g2 += g.square();
      gmax = std::max(gmax, std::sqrt(g2.maxCoeff()));
    }
  }
  speed = std::sqrt(u2.maxCoeff()) + gmax;
  const RealArray rho = s.a.abs2();
  const double sound2 = f.is_none() ? 0.0 : (coupling * f.df(rho) * rho).maxCoeff();
  speed += std::sqrt(std::max(sound2, 0.0));
  double kmax = M_PI / grid.spacing();
  if (dealias) kmax *= 2.0 / 3.0;
  const double rate = grid.dim() * (speed * kmax + 0.5 * epsilon * kmax * kmax) + 1e-12;
  return std::min(cfl * 2.8 / rate, 1e-2);
}

}  // namespace

GrenierTrajectory solve_grenier(const EikonalField& eikonal, const WaveField& a0, const NonlinearitySpec& f,
                                double epsilon, double T, const GrenierOptions& options) {
  const Grid& grid = a0.grid();
  if (eikonal.grid() != grid) throw GridMismatchError("solve_grenier: eikonal grid differs from the data grid");
  if (!(epsilon >= 0.0)) throw ConfigError("solve_grenier: epsilon must be >= 0");
  if (!(T > 0.0)) throw ConfigError("solve_grenier: T must be positive");
  if (T >= eikonal.valid_until()) {
    throw PastCausticError("solve_grenier: T = " + std::to_string(T) + " is not below the eikonal horizon " +
                           std::to_string(eikonal.valid_until()));
  }
  if (T > eikonal.times().back() * (1.0 + 1e-12)) throw ConfigError("solve_grenier: T beyond the stored eikonal times");
  const int n = grid.dim();
  const double c = options.coupling >= 0.0 ? options.coupling : 1.0;
  const double a_sup = a0.values().abs().maxCoeff();

  GrenierTrajectory traj{grid, 0.0, 1.0, 0.0, {}, 0.0, 0.0};
  traj.epsilon = epsilon;
  traj.coupling = c;
  traj.symmetrizer_delta = f.is_none() ? 0.0 : symmetrizer_floor(f, a_sup);

  std::vector<double> stops = options.snapshot_times;
  if (stops.empty()) {
    for (double t : eikonal.times()) {
      if (t <= T * (1.0 + 1e-12)) stops.push_back(t);
    }
  }
  if (stops.empty() || stops.front() != 0.0) stops.insert(stops.begin(), 0.0);
  for (std::size_t k = 1; k < stops.size(); ++k) {
    if (!(stops[k] > stops[k - 1])) throw ConfigError("solve_grenier: snapshot times must increase");
  }

  const Calculus calc(grid, options.dealias);
  auto rhs = [&](double t, const Vars& s) {
    const EikonalSnapshot e = eikonal.sample(t);
    RealArray B = 0.5 * s.v[0].square() + e.grad[0] * s.v[0];
    for (int d = 1; d < n; ++d) B += 0.5 * s.v[d].square() + e.grad[d] * s.v[d];
    const RealArray rho = s.a.abs2();
    if (c != 0.0 && !f.is_none()) B += c * f.f(rho);
    ComplexArray Bhat = calc.hat(B);
    Bhat *= calc.mask();
    Vars k;
    k.phi = -calc.back(Bhat).real();
    k.v.resize(n);
    for (int d = 0; d < n; ++d) k.v[d] = -calc.d(Bhat, d).real();

    const ComplexArray ahat = calc.hat(s.a);
    RealArray div = e.lap;
    for (int d = 0; d < n; ++d) div += calc.d(calc.hat(s.v[d]), d).real();
    ComplexArray da = -0.5 * s.a * div.cast<Complex>();
    for (int d = 0; d < n; ++d) da -= (s.v[d] + e.grad[d]).cast<Complex>() * calc.d(ahat, d);
    if (epsilon > 0.0) da += Complex(0.0, 0.5 * epsilon) * calc.lap(ahat);
    k.a = calc.project(da);
    return k;
  };

  Vars s{a0.values(), std::vector<RealArray>(n, RealArray::Zero(grid.size())), RealArray::Zero(grid.size())};
  double grad_base = 0.0;
  {
    const RealArray mod = s.a.abs();
    const ComplexArray mhat = calc.hat(mod);
    for (int d = 0; d < n; ++d) grad_base = std::max(grad_base, max_abs(calc.d(mhat, d).real()));
  }
  if (!(grad_base > 0.0)) grad_base = 1.0;

  auto record = [&](double t) {
    const RealArray rho = s.a.abs2();
    if (!f.is_none()) {
      const double m = f.df(rho).minCoeff();
      traj.min_fprime = traj.states.empty() ? m : std::min(traj.min_fprime, m);
    }
    traj.states.push_back(GrenierState{t, s.a, s.v, s.phi});
  };
  record(0.0);

  const double dt = options.dt > 0.0 ? options.dt
                                     : stable_step(grid, s, eikonal, f, c, epsilon, options.cfl, options.dealias);
  traj.dt = dt;
  double t = 0.0;
  for (std::size_t k = 1; k < stops.size(); ++k) {
    const double span = stops[k] - stops[k - 1];
    const int steps = std::max(1, int(std::ceil(span / dt - 1e-9)));
    const double h = span / steps;
    for (int step = 0; step < steps; ++step) {
      const Vars k1 = rhs(t, s);
      const Vars k2 = rhs(t + 0.5 * h, axpy(s, 0.5 * h, k1));
      const Vars k3 = rhs(t + 0.5 * h, axpy(s, 0.5 * h, k2));
      const Vars k4 = rhs(t + h, axpy(s, h, k3));
      rk4_combine(s, h, k1, k2, k3, k4);
      t = stops[k - 1] + (step + 1) * h;

      const double amax = s.a.abs().maxCoeff();
      if (!std::isfinite(amax) || amax > options.amplitude_blowup * std::max(a_sup, 1e-300)) {
        throw ShockError("solve_grenier: amplitude blow-up at t = " + std::to_string(t), t);
      }
    }
    double grad_v = 0.0;
    for (int d = 0; d < n; ++d) {
      const ComplexArray vhat = calc.hat(s.v[d]);
      for (int e = 0; e < n; ++e) grad_v = std::max(grad_v, max_abs(calc.d(vhat, e).real()));
    }
    if (!std::isfinite(grad_v) || grad_v > options.gradient_blowup * grad_base) {
      throw ShockError("solve_grenier: velocity gradient " + std::to_string(grad_v) + " exceeds " +
                           std::to_string(options.gradient_blowup) + "x its initial scale at t = " + std::to_string(t),
                       t);
    }
    record(stops[k]);
    if (!f.is_none() && traj.min_fprime < traj.symmetrizer_delta * (1.0 - 1e-12)) {
      throw InstabilityError("solve_grenier: f'(|a|^2) fell below the symmetrizer floor at t = " + std::to_string(t));
    }
  }
  return traj;
}

CorrectorPair solve_corrector(const GrenierTrajectory& limit, const EikonalField& eikonal, const WaveField& a1,
                              const NonlinearitySpec& f, const GrenierOptions& options) {
  const Grid& grid = limit.grid;
  if (a1.grid() != grid || eikonal.grid() != grid) throw GridMismatchError("solve_corrector: grid mismatch");
  if (limit.states.size() < 2) throw ConfigError("solve_corrector: limit trajectory has no time span");
  const int n = grid.dim();
  const double c = limit.coupling;
  const Calculus calc(grid, options.dealias);

  struct Coefficients {
    std::vector<RealArray> w;
    std::vector<ComplexArray> grad_a;
    ComplexArray a;
    ComplexArray half_lap_a;
    RealArray div;
    RealArray fprime;
  };
  auto coefficients = [&](double t) {
    const GrenierState s = limit.sample(t);
    const EikonalSnapshot e = eikonal.sample(t);
    Coefficients co;
    co.a = s.a;
    const ComplexArray ahat = calc.hat(s.a);
    co.div = e.lap;
    for (int d = 0; d < n; ++d) {
      co.w.push_back(s.v[d] + e.grad[d]);
      co.grad_a.push_back(calc.d(ahat, d));
      co.div += calc.d(calc.hat(s.v[d]), d).real();
    }
    co.half_lap_a = Complex(0.0, 0.5) * calc.lap(ahat);
    co.fprime = f.is_none() ? RealArray::Zero(grid.size()) : RealArray(f.df(RealArray(s.a.abs2())));
    return co;
  };

  struct Pair {
    ComplexArray a1;
    RealArray phi1;
  };
  auto rhs = [&](const Coefficients& co, const Pair& p) {
    const ComplexArray phat = calc.hat(p.phi1);
    const ComplexArray ahat = calc.hat(p.a1);
    RealArray dphi = -2.0 * c * (co.a.conjugate() * p.a1).real() * co.fprime;
    ComplexArray da = -0.5 * p.a1 * co.div.cast<Complex>() - 0.5 * co.a * calc.lap(phat).real().cast<Complex>() +
                      co.half_lap_a;
    for (int d = 0; d < n; ++d) {
      const RealArray dphi_d = calc.d(phat, d).real();
      dphi -= co.w[d] * dphi_d;
      da -= co.w[d].cast<Complex>() * calc.d(ahat, d) + dphi_d.cast<Complex>() * co.grad_a[d];
    }
    return Pair{calc.project(da), calc.project(dphi)};
  };
  auto step_to = [](const Pair& p, double h, const Pair& k) { return Pair{p.a1 + h * k.a1, p.phi1 + h * k.phi1}; };

  CorrectorPair out;
  const std::vector<double> ts = limit.times();
  Pair p{a1.values(), RealArray::Zero(grid.size())};
  out.times.push_back(ts.front());
  out.a1.push_back(p.a1);
  out.phi1.push_back(p.phi1);
  const double dt = options.dt > 0.0 ? options.dt : limit.dt;
  if (!(dt > 0.0)) throw ConfigError("solve_corrector: no time step available");
  for (std::size_t k = 1; k < ts.size(); ++k) {
    const double span = ts[k] - ts[k - 1];
    const int steps = std::max(1, int(std::ceil(span / dt - 1e-9)));
    const double h = span / steps;
    Coefficients c0 = coefficients(ts[k - 1]);
    for (int step = 0; step < steps; ++step) {
      const double t = ts[k - 1] + step * h;
      const Coefficients cm = coefficients(t + 0.5 * h);
      Coefficients c1 = coefficients(step + 1 == steps ? ts[k] : t + h);
      const Pair k1 = rhs(c0, p);
      const Pair k2 = rhs(cm, step_to(p, 0.5 * h, k1));
      const Pair k3 = rhs(cm, step_to(p, 0.5 * h, k2));
      const Pair k4 = rhs(c1, step_to(p, h, k3));
      p.a1 += h / 6.0 * (k1.a1 + 2.0 * k2.a1 + 2.0 * k3.a1 + k4.a1);
      p.phi1 += h / 6.0 * (k1.phi1 + 2.0 * k2.phi1 + 2.0 * k3.phi1 + k4.phi1);
      if (!p.a1.allFinite() || !p.phi1.allFinite()) {
        throw InstabilityError("solve_corrector: non-finite corrector at t = " + std::to_string(t + h));
      }
      c0 = std::move(c1);
    }
    out.times.push_back(ts[k]);
    out.a1.push_back(p.a1);
    out.phi1.push_back(p.phi1);
  }
  return out;
}

namespace {

void check_total_phase(const Grid& g, const ComplexArray& a, const std::vector<RealArray>& v,
                       const EikonalSnapshot& e, double epsilon, double factor, const char* where) {
  const RealArray amp = a.abs();
  const double amax = amp.maxCoeff();
  RealArray g2 = RealArray::Zero(g.size());
  for (int d = 0; d < g.dim(); ++d) g2 += (v[d] + e.grad[d]).square();
  double m = 0.0;
  for (Eigen::Index k = 0; k < g.size(); ++k) {
    if (amp[k] > 1e-8 * amax) m = std::max(m, std::sqrt(g2[k]));
  }
  check_phase_resolution(g, m, epsilon, factor, where);
}

}  // namespace

WaveField assemble_super(const GrenierTrajectory& limit, const CorrectorPair* corrector, const EikonalField& eikonal,
                         double epsilon, std::size_t i, bool with_corrector, double resolution_factor) {
  if (!(epsilon > 0.0)) throw ConfigError("assemble_super: epsilon must be positive");
  const GrenierState& s = limit.states.at(i);
  const EikonalSnapshot e = eikonal.sample(s.t);
  check_total_phase(limit.grid, s.a, s.v, e, epsilon, resolution_factor, "assemble_super");
  RealArray phase = (s.phi + e.phi) / epsilon;
  if (with_corrector) {
    if (!corrector) throw ConfigError("assemble_super: corrector requested but not supplied");
    phase += corrector->phi1.at(i);
  }
  const ComplexArray u = s.a * phase.unaryExpr([](double p) { return std::polar(1.0, p); });
  return WaveField(limit.grid, u, epsilon);
}

WaveField reconstruct(const GrenierTrajectory& traj, const EikonalField& eikonal, std::size_t i) {
  if (!(traj.epsilon > 0.0)) throw ConfigError("reconstruct: trajectory belongs to the limit system");
  const GrenierState& s = traj.states.at(i);
  const EikonalSnapshot e = eikonal.sample(s.t);
  const RealArray phase = (s.phi + e.phi) / traj.epsilon;
  const ComplexArray u = s.a * phase.unaryExpr([](double p) { return std::polar(1.0, p); });
  return WaveField(traj.grid, u, traj.epsilon);
}

EulerResidual euler_residual(const GrenierTrajectory& limit, const EikonalField& eikonal,
                             const PotentialSpec& potential, const NonlinearitySpec& f, std::size_t i,
                             std::size_t stride) {
  if (stride == 0 || i < stride || i + stride >= limit.states.size()) {
    throw ConfigError("euler_residual: index needs neighbours at distance stride");
  }
  const Grid& g = limit.grid;
  const int n = g.dim();
  const Calculus calc(g, false);
  const GrenierState& sm = limit.states[i - stride];
  const GrenierState& s = limit.states[i];
  const GrenierState& sp = limit.states[i + stride];
  const double span = sp.t - sm.t;
  const EikonalSnapshot e = eikonal.sample(s.t);

  const RealArray rho = s.a.abs2();
  const ComplexArray rho_hat = calc.hat(rho);
  RealArray mass = (sp.a.abs2() - sm.a.abs2()) / span + rho * e.lap;
  for (int d = 0; d < n; ++d) {
    mass += calc.d(calc.hat(RealArray(rho * s.v[d])), d).real() + e.grad[d] * calc.d(rho_hat, d).real();
  }

  // d_t grad phi_eik from the stored eikonal times
  std::vector<RealArray> dg(n, RealArray::Zero(g.size()));
  if (!eikonal.is_zero()) {
    const auto& ts = eikonal.times();
    const std::size_t width = std::min<std::size_t>(5, ts.size());
    const auto it = std::lower_bound(ts.begin(), ts.end(), s.t);
    std::size_t centre = std::size_t(it - ts.begin());
    std::size_t first = centre >= width / 2 ? centre - width / 2 : 0;
    first = std::min(first, ts.size() - width);
    const std::vector<double> nodes(ts.begin() + first, ts.begin() + first + width);
    const auto w = lagrange_derivative_weights(nodes, s.t);
    for (std::size_t j = 0; j < width; ++j) {
      for (int d = 0; d < n; ++d) dg[d] += w[j] * eikonal.snapshot(first + j).grad[d];
    }
  }

  std::vector<RealArray> u(n);
  for (int d = 0; d < n; ++d) u[d] = s.v[d] + e.grad[d];
  const ComplexArray press_hat = calc.hat(RealArray(limit.coupling * f.f(rho)));
  double mom2 = 0.0;
  RealArray gv[2];
  for (int d = 0; d < n; ++d) gv[d] = RealArray(g.size());
  for (Eigen::Index k = 0; k < g.size(); ++k) {
    const Point gp = potential.gradient(s.t, g.point(k));
    for (int d = 0; d < n; ++d) gv[d][k] = gp[d];
  }
  for (int j = 0; j < n; ++j) {
    RealArray r = (sp.v[j] - sm.v[j]) / span + dg[j] + gv[j] + calc.d(press_hat, j).real();
    const ComplexArray vj_hat = calc.hat(s.v[j]);
    for (int k = 0; k < n; ++k) r += u[k] * (calc.d(vj_hat, k).real() + e.hess[j + n * k]);
    mom2 += integrate(g, RealArray(r.square()));
  }
  return EulerResidual{s.t, l2_norm(g, mass), std::sqrt(mom2)};
}

double phase_gradient_drift(const GrenierTrajectory& traj) {
  const Calculus calc(traj.grid, false);
  double worst = 0.0;
  for (const auto& s : traj.states) {
    const ComplexArray phat = calc.hat(s.phi);
    for (int d = 0; d < traj.grid.dim(); ++d) {
      worst = std::max(worst, max_abs(calc.d(phat, d).real() - s.v[d]));
    }
  }
  return worst;
}

double max_curl(const GrenierTrajectory& traj) {
  if (traj.grid.dim() == 1) return 0.0;
  const Calculus calc(traj.grid, false);
  double worst = 0.0;
  for (const auto& s : traj.states) {
    const RealArray curl = calc.d(calc.hat(s.v[1]), 0).real() - calc.d(calc.hat(s.v[0]), 1).real();
    worst = std::max(worst, max_abs(curl));
  }
  return worst;
}

}  // namespace wkb
