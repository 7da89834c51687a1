#include "wkb/wkb_weak.hpp"

#include "wkb/interp.hpp"

namespace wkb {

std::size_t time_index(const std::vector<double>& times, double t) {
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (std::abs(times[i] - t) <= 1e-12 * std::max(1.0, std::abs(t))) return i;
  }
  throw ConfigError("time " + std::to_string(t) + " is not a stored time");
}

namespace {

struct WeakSlice {
  ComplexArray a;
  RealArray G;
  RealArray J;
  RealArray a0sq;
};

WeakSlice weak_slice(const RayBundle& bundle, const Profile& a0, const NonlinearitySpec& f, std::size_t ti,
                     const Grid& grid) {
  if (bundle.dim() != grid.dim()) throw GridMismatchError("weak WKB: bundle and grid dimensions differ");
  const int n = grid.dim();
  const Eigen::Index size = grid.size();
  WeakSlice s{ComplexArray(size), RealArray::Zero(size), RealArray(size), RealArray(size)};
  const std::vector<double> nodes(bundle.times.begin(), bundle.times.begin() + ti + 1);
  const std::vector<double> w = simpson_weights(nodes);
  LabelInterpolant interp(bundle.label_grid);
  Point prev(n), row_start(n);
  for (Eigen::Index i = 0; i < size; ++i) {
    const Point* guess = nullptr;
    if (n == 2 && i > 0) guess = (i % grid.points_per_axis() == 0) ? &row_start : &prev;
    const Point y = invert_flow(bundle, ti, grid.point(i), guess);
    prev = y;
    if (n == 2 && i % grid.points_per_axis() == 0) row_start = y;
    interp.locate(y);
    const double J = ti == 0 ? 1.0 : interp(bundle.jac_det[ti]);
    if (!(J > 0.0)) {
      throw PastCausticError("weak WKB: nonpositive Jacobian " + std::to_string(J) + " at t = " +
                             std::to_string(bundle.times[ti]));
    }
    const double a0y = a0(y);
    s.a[i] = a0y / std::sqrt(J);
    s.J[i] = J;
    s.a0sq[i] = a0y * a0y;
    if (f.is_none() || ti == 0 || a0y == 0.0) continue;
    double g = 0.0;
    for (std::size_t k = 0; k <= ti; ++k) {
      const double Jk = k == 0 ? 1.0 : interp(bundle.jac_det[k]);
      g += w[k] * f.f(a0y * a0y / Jk);
    }
    s.G[i] = -g;
  }
  return s;
}

}  // namespace

WaveField transport_amplitude(const RayBundle& bundle, const Profile& a0, double t, const Grid& grid) {
  const std::size_t ti = time_index(bundle.times, t);
  return WaveField(grid, weak_slice(bundle, a0, NonlinearitySpec::none(), ti, grid).a);
}

RealField phase_shift_G(const RayBundle& bundle, const Profile& a0, const NonlinearitySpec& f, double t,
                        const Grid& grid) {
  const std::size_t ti = time_index(bundle.times, t);
  return RealField(grid, weak_slice(bundle, a0, f, ti, grid).G);
}

WeakWkbField build_weak(const RayBundle& bundle, const Profile& a0, const NonlinearitySpec& f, const Grid& grid) {
  if (!f.is_none() && !(f.kappa() > 0.5)) {
    throw ConfigError("weak WKB: requires kappa > 1/2, got " + std::to_string(f.kappa()) +
                      "; use the supercritical solver for kappa = 0");
  }
  WeakWkbField w{grid, bundle.times, {}, {}, {}, {}, f.is_none() ? 1.0 : f.kappa()};
  for (std::size_t ti = 0; ti < bundle.times.size(); ++ti) {
    WeakSlice s = weak_slice(bundle, a0, f, ti, grid);
    w.a.push_back(std::move(s.a));
    w.G.push_back(std::move(s.G));
    w.jacobian.push_back(std::move(s.J));
    w.a0_squared.push_back(std::move(s.a0sq));
  }
  return w;
}

WaveField assemble_weak(const WeakWkbField& wkb, const EikonalField& eikonal, double epsilon, std::size_t i,
                        bool include_phase_shift, double resolution_factor) {
  if (!(wkb.kappa > 0.5)) throw ConfigError("assemble_weak: requires kappa > 1/2");
  if (eikonal.grid() != wkb.grid) throw GridMismatchError("assemble_weak: eikonal grid differs");
  const Grid& g = wkb.grid;
  const EikonalSnapshot e = eikonal.sample(wkb.times.at(i));
  const double shift = include_phase_shift ? std::pow(epsilon, wkb.kappa - 1.0) : 0.0;

  // resolution of the total phase (phi_eik + eps^kappa G) / eps over the support of a
  const Spectral& sp = spectral_for(g);
  const RealArray amp = wkb.a[i].abs();
  const double amax = amp.maxCoeff();
  RealArray grad2 = RealArray::Zero(g.size());
  for (int a = 0; a < g.dim(); ++a) {
    RealArray total = e.grad[a];
    if (shift != 0.0) total += epsilon * shift * sp.derivative(wkb.G[i], a, 1);
    grad2 += total.square();
  }
  double max_grad = 0.0;
  for (Eigen::Index k = 0; k < g.size(); ++k) {
    if (amp[k] > 1e-8 * amax) max_grad = std::max(max_grad, std::sqrt(grad2[k]));
  }
  check_phase_resolution(g, max_grad, epsilon, resolution_factor, "assemble_weak");

  ComplexArray u(g.size());
  for (Eigen::Index k = 0; k < g.size(); ++k) {
    u[k] = wkb.a[i][k] * std::polar(1.0, shift * wkb.G[i][k] + e.phi[k] / epsilon);
  }
  return WaveField(g, std::move(u), epsilon);
}

std::vector<RealArray> limit_phase_mol(const WeakWkbField& wkb, const EikonalField& eikonal,
                                       const NonlinearitySpec& f) {
  const Grid& g = wkb.grid;
  const Spectral& sp = spectral_for(g);
  const auto& ts = wkb.times;
  std::vector<RealArray> rho;
  for (const auto& a : wkb.a) rho.push_back(a.abs2());

  auto rho_at = [&](double t) {
    const TimeStencil st = time_stencil(ts, t, 4);
    RealArray r = RealArray::Zero(g.size());
    for (std::size_t j = 0; j < st.weights.size(); ++j) r += st.weights[j] * rho[st.first + j];
    return r;
  };
  auto rhs = [&](double t, const RealArray& phi) {
    RealArray d = -f.f(rho_at(t));
    if (!eikonal.is_zero()) {
      const EikonalSnapshot e = eikonal.sample(t);
      for (int a = 0; a < g.dim(); ++a) d -= e.grad[a] * sp.derivative(phi, a, 1);
    }
    return d;
  };

  double speed = 0.0;
  for (std::size_t k = 0; k < eikonal.size() && !eikonal.is_zero(); ++k) {
    for (const auto& gr : eikonal.snapshot(k).grad) speed = std::max(speed, gr.abs().maxCoeff());
  }
  const double kmax = M_PI * g.points_per_axis() / (2.0 * g.half_width());
  const double h_max = std::min(2.5e-3, speed > 0.0 ? 1.5 / (speed * kmax * g.dim()) : 1.0);

  std::vector<RealArray> out{RealArray::Zero(g.size())};
  RealArray phi = out.front();
  for (std::size_t k = 1; k < ts.size(); ++k) {
    const double span = ts[k] - ts[k - 1];
    const int steps = std::max(1, int(std::ceil(span / h_max)));
    const double h = span / steps;
    for (int s = 0; s < steps; ++s) {
      const double t = ts[k - 1] + s * h;
      const RealArray k1 = rhs(t, phi);
      const RealArray k2 = rhs(t + 0.5 * h, phi + 0.5 * h * k1);
      const RealArray k3 = rhs(t + 0.5 * h, phi + 0.5 * h * k2);
      const RealArray k4 = rhs(t + h, phi + h * k3);
      phi += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    out.push_back(phi);
  }
  return out;
}

namespace {

std::vector<double> derivative_stencil(const std::vector<double>& ts, std::size_t i, std::size_t& first) {
  const std::size_t width = std::min<std::size_t>(5, ts.size());
  if (width < 2) throw ConfigError("time derivative: need at least two stored times");
  first = i >= width / 2 ? i - width / 2 : 0;
  first = std::min(first, ts.size() - width);
  const std::vector<double> nodes(ts.begin() + first, ts.begin() + first + width);
  return lagrange_derivative_weights(nodes, ts[i]);
}

}  // namespace

double transport_residual(const WeakWkbField& wkb, const EikonalField& eikonal, std::size_t i,
                          const RealArray& mask) {
  const Grid& g = wkb.grid;
  const Spectral& sp = spectral_for(g);
  std::size_t first = 0;
  const auto w = derivative_stencil(wkb.times, i, first);
  ComplexArray r = ComplexArray::Zero(g.size());
  for (std::size_t j = 0; j < w.size(); ++j) r += w[j] * wkb.a[first + j];
  const EikonalSnapshot e = eikonal.sample(wkb.times[i]);
  for (int a = 0; a < g.dim(); ++a) r += e.grad[a] * sp.derivative(wkb.a[i], a, 1);
  r += 0.5 * wkb.a[i] * e.lap;
  return l2_norm(g, ComplexArray(r * mask));
}

double modulus_residual(const WeakWkbField& wkb, const EikonalField& eikonal, std::size_t i,
                        const RealArray& mask) {
  const Grid& g = wkb.grid;
  const Spectral& sp = spectral_for(g);
  std::size_t first = 0;
  const auto w = derivative_stencil(wkb.times, i, first);
  RealArray r = RealArray::Zero(g.size());
  for (std::size_t j = 0; j < w.size(); ++j) r += w[j] * wkb.a[first + j].abs2();
  const RealArray rho = wkb.a[i].abs2();
  const EikonalSnapshot e = eikonal.sample(wkb.times[i]);
  for (int a = 0; a < g.dim(); ++a) r += e.grad[a] * sp.derivative(rho, a, 1);
  r += rho * e.lap;
  return integrate(g, RealArray((r * mask).abs()));
}

}  // namespace wkb
