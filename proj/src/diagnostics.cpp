#include "wkb/diagnostics.hpp"

#include <Eigen/QR>

#include <cstdio>
#include <sstream>

#include "wkb/interp.hpp"

namespace wkb {

ErrorRecord field_error(const WaveField& u, const WaveField& v, double t) {
  if (u.grid() != v.grid()) throw GridMismatchError("field_error: fields live on different grids");
  const ComplexArray d = u.values() - v.values();
  return ErrorRecord{t, l2_norm(u.grid(), d), d.size() ? d.abs().maxCoeff() : 0.0};
}

RateFit fit_rate(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw ConfigError("fit_rate: xs and ys differ in length");
  if (xs.size() < 3) throw ConfigError("fit_rate: need at least three pairs");
  Eigen::VectorXd lx(xs.size()), ly(ys.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0)) throw ConfigError("fit_rate: inputs must be positive");
    lx[i] = std::log(xs[i]);
    ly[i] = std::log(ys[i]);
  }
  Eigen::MatrixXd A(xs.size(), 2);
  A.col(0) = lx;
  A.col(1).setOnes();
  const Eigen::Vector2d c = A.colPivHouseholderQr().solve(ly);
  const double ss_res = (A * c - ly).squaredNorm();
  const double ss_tot = (ly.array() - ly.mean()).square().sum();
  RateFit fit{xs, ys, c[0], c[1], ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0};
  fit.r2 = std::clamp(fit.r2, 0.0, 1.0);
  return fit;
}

AffineFit fit_affine(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2) throw ConfigError("fit_affine: need at least two pairs");
  Eigen::MatrixXd A(xs.size(), 2);
  Eigen::VectorXd y(ys.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    A(i, 0) = 1.0;
    A(i, 1) = xs[i];
    y[i] = ys[i];
  }
  const Eigen::Vector2d c = A.colPivHouseholderQr().solve(y);
  AffineFit fit{c[1], c[0], 0.0};
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = std::abs(y[i] - (c[0] + c[1] * xs[i]));
    fit.max_relative_residual = std::max(fit.max_relative_residual, y[i] != 0.0 ? r / std::abs(y[i]) : r);
  }
  return fit;
}

const char* to_string(Conserved q) {
  switch (q) {
    case Conserved::mass:
      return "mass";
    case Conserved::energy:
      return "energy";
    case Conserved::momentum:
      return "momentum";
    case Conserved::pseudo_conformal:
      return "pseudo_conformal";
  }
  return "?";
}

double mass(const WaveField& u) { return integrate(u.grid(), RealArray(u.values().abs2())); }

double energy(const WaveField& u, const RealArray& potential, double coupling) {
  const double eps = u.epsilon().value_or(1.0);
  const Spectral& sp = spectral_for(u.grid());
  double kinetic = 0.0;
  for (int a = 0; a < u.grid().dim(); ++a) {
    kinetic += integrate(u.grid(), RealArray((eps * sp.derivative(u.values(), a, 1)).abs2()));
  }
  const RealArray rho = u.values().abs2();
  return kinetic + coupling * integrate(u.grid(), RealArray(rho.square())) +
         2.0 * integrate(u.grid(), RealArray(potential * rho));
}

Point momentum(const WaveField& u) {
  const double eps = u.epsilon().value_or(1.0);
  const Spectral& sp = spectral_for(u.grid());
  Point p(u.grid().dim());
  for (int a = 0; a < u.grid().dim(); ++a) {
    const ComplexArray d = sp.derivative(u.values(), a, 1);
    p[a] = integrate(u.grid(), RealArray((u.values().conjugate() * eps * d).imag()));
  }
  return p;
}

double pseudo_conformal_norm(const WaveField& u, double t) {
  const Grid& g = u.grid();
  const double eps = u.epsilon().value_or(1.0);
  const Spectral& sp = spectral_for(g);
  double total = 0.0;
  for (int a = 0; a < g.dim(); ++a) {
    RealArray x(g.size());
    for (Eigen::Index i = 0; i < g.size(); ++i) x[i] = g.coordinate(g.multi_index(i)[a]);
    const ComplexArray Ju = x.cast<Complex>() * u.values() + Complex(0.0, eps * t) * sp.derivative(u.values(), a, 1);
    total += integrate(g, RealArray(Ju.abs2()));
  }
  return total;
}

Ledger conservation_ledger(const NlsRun& run, const PotentialSpec& potential, const NonlinearitySpec& nonlinearity,
                           Conserved which) {
  const bool cubic_only = which == Conserved::energy || which == Conserved::pseudo_conformal;
  if (cubic_only && nonlinearity.kind() == NonlinearitySpec::Kind::smooth) {
    throw ConfigError(std::string("conservation_ledger: the ") + to_string(which) +
                      " law is stated for the cubic or linear equation only");
  }
  Ledger led;
  led.quantity = which;
  led.times = run.times;
  if (run.fields.empty()) return led;
  const Grid& g = run.fields.front().grid();
  const double c = nonlinearity.coupling(run.epsilon);
  for (std::size_t k = 0; k < run.fields.size(); ++k) {
    const WaveField& u = run.fields[k];
    const double t = run.times[k];
    switch (which) {
      case Conserved::mass:
        led.values.push_back(mass(u));
        break;
      case Conserved::energy:
        led.values.push_back(energy(u, potential.sample(g, t), c));
        break;
      case Conserved::momentum:
        led.values.push_back(momentum(u)[0]);
        break;
      case Conserved::pseudo_conformal: {
        const double l4 = integrate(g, RealArray(u.values().abs2().square()));
        led.values.push_back(pseudo_conformal_norm(u, t) + c * t * t * l4);
        led.rhs.push_back(c * t * (2.0 - g.dim()) * l4);
        break;
      }
    }
  }
  const double v0 = led.values.front();
  if (which == Conserved::mass && !run.step_mass.empty()) {
    // per-step record, same reduction as the solver's own drift
    const double m0 = run.step_mass.front();
    for (double m : run.step_mass) led.max_drift = std::max(led.max_drift, std::abs(m - m0) / m0);
    return led;
  }
  if (which == Conserved::momentum) {
    double worst = 0.0;
    for (std::size_t k = 0; k < run.fields.size(); ++k) {
      const Point p = momentum(run.fields[k]);
      const Point p0 = momentum(run.fields.front());
      worst = std::max(worst, (p - p0).cwiseAbs().maxCoeff());
    }
    led.max_drift = worst;
    return led;
  }
  if (which != Conserved::pseudo_conformal || g.dim() == 2) {
    for (double v : led.values) led.max_drift = std::max(led.max_drift, std::abs(v - v0) / std::abs(v0));
    return led;
  }
  // 1-d pseudo-conformal law: compare d/dt of values with the right-hand side
  const std::size_t m = led.times.size();
  if (m < 3) throw ConfigError("conservation_ledger: the pseudo-conformal law needs at least three snapshots");
  led.lhs.assign(m, 0.0);
  double mismatch = 0.0, scale = 0.0;
  for (double r : led.rhs) scale = std::max(scale, std::abs(r));
  const std::size_t width = std::min<std::size_t>(5, m);
  for (std::size_t k = 0; k < m; ++k) {
    std::size_t first = k >= width / 2 ? k - width / 2 : 0;
    first = std::min(first, m - width);
    const std::vector<double> nodes(led.times.begin() + first, led.times.begin() + first + width);
    const auto w = lagrange_derivative_weights(nodes, led.times[k]);
    double d = 0.0;
    for (std::size_t j = 0; j < width; ++j) d += w[j] * led.values[first + j];
    led.lhs[k] = d;
    mismatch = std::max(mismatch, std::abs(d - led.rhs[k]));
  }
  led.max_drift = scale > 0.0 ? mismatch / scale : mismatch;
  return led;
}

std::string ledger_csv(const std::vector<Ledger>& ledgers) {
  std::ostringstream out;
  out << "t,quantity,value,drift\n";
  char buf[96];
  for (const auto& led : ledgers) {
    for (std::size_t k = 0; k < led.values.size(); ++k) {
      const double v0 = led.values.front();
      const double drift = v0 != 0.0 ? (led.values[k] - v0) / std::abs(v0) : led.values[k] - v0;
      std::snprintf(buf, sizeof buf, "%.17g,%s,%.17g,%.17g\n", led.times[k], to_string(led.quantity), led.values[k],
                    drift);
      out << buf;
    }
  }
  return out.str();
}

}  // namespace wkb
