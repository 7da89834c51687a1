#include "wkb/eikonal.hpp"

#include "wkb/interp.hpp"

namespace wkb {

EikonalField::EikonalField(Grid grid, std::vector<double> times, std::vector<EikonalSnapshot> snapshots,
                           double valid_until)
    : grid_(std::move(grid)), times_(std::move(times)), snapshots_(std::move(snapshots)), valid_until_(valid_until) {
  if (times_.empty() || times_.size() != snapshots_.size()) {
    throw ConfigError("eikonal: need one snapshot per stored time");
  }
  for (std::size_t k = 1; k < times_.size(); ++k) {
    if (!(times_[k] > times_[k - 1])) throw ConfigError("eikonal: times must be strictly increasing");
  }
}

EikonalField EikonalField::zero(const Grid& grid, std::vector<double> times) {
  const int n = grid.dim();
  EikonalSnapshot s;
  s.phi = RealArray::Zero(grid.size());
  s.grad.assign(n, RealArray::Zero(grid.size()));
  s.hess.assign(n * n, RealArray::Zero(grid.size()));
  s.lap = RealArray::Zero(grid.size());
  std::vector<EikonalSnapshot> snaps(times.size(), s);
  EikonalField e(grid, std::move(times), std::move(snaps), kNoCaustic);
  e.zero_ = true;
  return e;
}

EikonalSnapshot EikonalField::sample(double t) const {
  if (zero_) return snapshots_.front();
  const auto stencil = time_stencil(times_, t, 4);
  if (stencil.weights.size() == 1) return snapshots_[stencil.first];
  auto combine = [&](auto member) {
    RealArray out = RealArray::Zero(grid_.size());
    for (std::size_t j = 0; j < stencil.weights.size(); ++j) {
      out += stencil.weights[j] * member(snapshots_[stencil.first + j]);
    }
    return out;
  };
  EikonalSnapshot s;
  s.phi = combine([](const EikonalSnapshot& e) -> const RealArray& { return e.phi; });
  s.lap = combine([](const EikonalSnapshot& e) -> const RealArray& { return e.lap; });
  const std::size_t ng = snapshots_.front().grad.size();
  const std::size_t nh = snapshots_.front().hess.size();
  for (std::size_t a = 0; a < ng; ++a) {
    s.grad.push_back(combine([a](const EikonalSnapshot& e) -> const RealArray& { return e.grad[a]; }));
  }
  for (std::size_t a = 0; a < nh; ++a) {
    s.hess.push_back(combine([a](const EikonalSnapshot& e) -> const RealArray& { return e.hess[a]; }));
  }
  return s;
}

EikonalField build_eikonal(const RayBundle& bundle, const Grid& grid, double c0) {
  if (bundle.dim() != grid.dim()) throw GridMismatchError("build_eikonal: bundle and grid dimensions differ");
  const double horizon = caustic_horizon(bundle, c0);
  if (bundle.times.back() >= horizon) {
    throw PastCausticError("build_eikonal: requested time " + std::to_string(bundle.times.back()) +
                           " reaches the caustic horizon " + std::to_string(horizon));
  }
  const int n = grid.dim();
  const Eigen::Index size = grid.size();
  std::vector<EikonalSnapshot> snaps(bundle.times.size());
  for (std::size_t ti = 0; ti < bundle.times.size(); ++ti) {
    EikonalSnapshot& s = snaps[ti];
    s.phi.resize(size);
    s.lap.resize(size);
    s.grad.assign(n, RealArray(size));
    s.hess.assign(n * n, RealArray(size));
    if (bundle.times[ti] == 0.0) {
      // x = y at t = 0: sample phi_0 directly
      for (Eigen::Index i = 0; i < size; ++i) {
        const Point x = grid.point(i);
        const Point gr = bundle.phase.gradient(x);
        const Matrix h = bundle.phase.hessian(x);
        s.phi[i] = bundle.phase.value(x);
        for (int a = 0; a < n; ++a) s.grad[a][i] = gr[a];
        for (int k = 0; k < n * n; ++k) s.hess[k][i] = h(k % n, k / n);
        s.lap[i] = h.trace();
      }
      continue;
    }
    Point prev(n), row_start(n);
    for (Eigen::Index i = 0; i < size; ++i) {
      const Point x = grid.point(i);
      const Point* guess = nullptr;
      if (n == 2 && i > 0) guess = (i % grid.points_per_axis() == 0) ? &row_start : &prev;
      RaySample r;
      try {
        r = sample_rays(bundle, ti, x, guess);
      } catch (const InversionError& e) {
        throw InversionError(std::string(e.what()) + " (t = " + std::to_string(bundle.times[ti]) + ")");
      }
      prev = r.label;
      if (n == 2 && i % grid.points_per_axis() == 0) row_start = r.label;
      s.phi[i] = r.action;
      const Matrix hess = r.dxi * adjugate(r.jac) / r.det;
      for (int a = 0; a < n; ++a) s.grad[a][i] = r.xi[a];
      for (int c = 0; c < n; ++c) {
        for (int a = 0; a < n; ++a) s.hess[a + n * c][i] = 0.5 * (hess(a, c) + hess(c, a));
      }
      s.lap[i] = hess.trace();
    }
  }
  return EikonalField(grid, bundle.times, std::move(snaps), horizon);
}

TracedEikonal trace_eikonal(const PotentialSpec& potential, const PhaseSpec& phase, const Grid& grid,
                            const std::vector<double>& times, const EikonalOptions& options) {
  const bool trivial = potential.kind() == PotentialSpec::Kind::zero && phase.kind() == PhaseSpec::Kind::zero;
  double factor = options.label_factor;
  for (;;) {
    int points = grid.points_per_axis();
    while (points * options.label_factor < grid.points_per_axis() * factor) points *= 2;
    const Grid labels(grid.dim(), points, factor * grid.half_width());
    RayBundle bundle = trace_rays(potential, phase, labels, times, options.rays);
    if (trivial) return TracedEikonal{std::move(bundle), EikonalField::zero(grid, times)};
    try {
      EikonalField eik = build_eikonal(bundle, grid, options.c0);
      return TracedEikonal{std::move(bundle), std::move(eik)};
    } catch (const InversionError&) {
      if (factor * 1.5 > options.max_label_factor) throw;
      factor *= 1.5;
    }
  }
}

EikonalField eikonal_for(const PotentialSpec& potential, const PhaseSpec& phase, const Grid& grid,
                         const std::vector<double>& times, const EikonalOptions& options) {
  if (potential.kind() == PotentialSpec::Kind::zero && phase.kind() == PhaseSpec::Kind::zero) {
    return EikonalField::zero(grid, times);
  }
  return trace_eikonal(potential, phase, grid, times, options).eikonal;
}

RealArray centered_difference(const Grid& grid, const RealArray& f, int axis) {
  static constexpr double c[4] = {4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0};
  const int n = grid.points_per_axis();
  const double h = grid.spacing();
  const Eigen::Index stride = (grid.dim() == 2 && axis == 0) ? n : 1;
  RealArray d = RealArray::Zero(grid.size());
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    const int k = grid.multi_index(i)[axis];
    if (k < 4 || k >= n - 4) continue;
    double s = 0.0;
    for (int m = 1; m <= 4; ++m) s += c[m - 1] * (f[i + m * stride] - f[i - m * stride]);
    d[i] = s / h;
  }
  return d;
}

RealArray central_mask(const Grid& grid, double fraction) {
  RealArray m = RealArray::Zero(grid.size());
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    const Point x = grid.point(i);
    if (x.cwiseAbs().maxCoeff() <= fraction * grid.half_width()) m[i] = 1.0;
  }
  return m;
}

double eikonal_residual(const EikonalField& eik, const PotentialSpec& potential, std::size_t i,
                        const RealArray& mask) {
  const auto& ts = eik.times();
  if (ts.size() < 3) throw ConfigError("eikonal_residual: need at least three stored times");
  const int width = ts.size() >= 5 ? 5 : 3;
  const std::size_t first = std::min(i >= std::size_t(width / 2) ? i - width / 2 : 0, ts.size() - width);
  const std::vector<double> stencil(ts.begin() + first, ts.begin() + first + width);
  const std::vector<double> w = lagrange_derivative_weights(stencil, ts[i]);
  const Grid& g = eik.grid();
  RealArray dt = RealArray::Zero(g.size());
  for (int j = 0; j < width; ++j) dt += w[j] * eik.snapshot(first + j).phi;
  const EikonalSnapshot& s = eik.snapshot(i);
  RealArray grad2 = RealArray::Zero(g.size());
  for (const auto& gr : s.grad) grad2 += gr.square();
  const RealArray res = (dt + 0.5 * grad2 + potential.sample(g, ts[i])).abs() * mask;
  return res.maxCoeff();
}

double gradient_consistency(const EikonalField& eik, std::size_t i, const RealArray& mask) {
  const Grid& g = eik.grid();
  double worst = 0.0;
  for (int a = 0; a < g.dim(); ++a) {
    const RealArray d = centered_difference(g, eik.snapshot(i).phi, a);
    worst = std::max(worst, ((d - eik.snapshot(i).grad[a]).abs() * mask).maxCoeff());
  }
  return worst;
}

}  // namespace wkb
