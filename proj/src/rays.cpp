#include "wkb/rays.hpp"

#include <cstdio>
#include <sstream>

namespace wkb {

namespace {

Matrix identity(int n) { return Matrix::Identity(n, n); }

void require_finite(const Point& p, const char* what) {
  if (!p.allFinite()) throw PotentialError(std::string(what) + ": non-finite value");
}

}  // namespace

PotentialSpec PotentialSpec::harmonic(std::vector<double> omega) {
  if (omega.empty()) throw ConfigError("potential.omega: at least one frequency required");
  for (double w : omega) {
    if (!std::isfinite(w)) throw ConfigError("potential.omega: frequencies must be finite");
  }
  PotentialSpec p;
  p.kind_ = Kind::harmonic;
  p.name_ = "harmonic";
  p.omega_ = std::move(omega);
  return p;
}

PotentialSpec PotentialSpec::custom(ValueFn value, GradFn grad, HessFn hess, bool time_dependent,
                                    std::string name) {
  if (!value || !grad || !hess) throw ConfigError("potential: custom potential needs V, grad V and hess V");
  PotentialSpec p;
  p.kind_ = Kind::custom;
  p.name_ = std::move(name);
  p.value_ = std::move(value);
  p.grad_ = std::move(grad);
  p.hess_ = std::move(hess);
  p.time_dependent_ = time_dependent;
  return p;
}

double PotentialSpec::value(double t, const Point& x) const {
  switch (kind_) {
    case Kind::zero:
      return 0.0;
    case Kind::harmonic: {
      double v = 0.0;
      for (int a = 0; a < x.size(); ++a) v += 0.5 * omega(a) * omega(a) * x[a] * x[a];
      return v;
    }
    case Kind::custom:
      return value_(t, x);
  }
  return 0.0;
}

Point PotentialSpec::gradient(double t, const Point& x) const {
  switch (kind_) {
    case Kind::zero:
      return Point::Zero(x.size());
    case Kind::harmonic: {
      Point g(x.size());
      for (int a = 0; a < x.size(); ++a) g[a] = omega(a) * omega(a) * x[a];
      return g;
    }
    case Kind::custom:
      return grad_(t, x);
  }
  return Point::Zero(x.size());
}

Matrix PotentialSpec::hessian(double t, const Point& x) const {
  const int n = int(x.size());
  switch (kind_) {
    case Kind::zero:
      return Matrix::Zero(n, n);
    case Kind::harmonic: {
      Matrix h = Matrix::Zero(n, n);
      for (int a = 0; a < n; ++a) h(a, a) = omega(a) * omega(a);
      return h;
    }
    case Kind::custom:
      return hess_(t, x);
  }
  return Matrix::Zero(n, n);
}

RealArray PotentialSpec::sample(const Grid& grid, double t) const {
  RealArray v(grid.size());
  for (Eigen::Index i = 0; i < grid.size(); ++i) v[i] = value(t, grid.point(i));
  if (!v.allFinite()) throw PotentialError("potential: non-finite sample on the grid");
  return v;
}

void PotentialSpec::validate(const Grid& box) const {
  if (kind_ == Kind::harmonic && omega_.size() != 1 && int(omega_.size()) != box.dim()) {
    throw ConfigError("potential.omega: expected 1 or " + std::to_string(box.dim()) + " frequencies");
  }
  for (Eigen::Index i = 0; i < box.size(); ++i) {
    const Point x = box.point(i);
    if (!std::isfinite(value(0.0, x)) || !gradient(0.0, x).allFinite() || !hessian(0.0, x).allFinite()) {
      throw ConfigError("potential: V or its derivatives are not finite on the box");
    }
  }
}

PhaseSpec PhaseSpec::quadratic_focusing(double focus_time) {
  if (!(focus_time > 0.0) || !std::isfinite(focus_time)) {
    throw ConfigError("phase.T: focusing time must be positive");
  }
  PhaseSpec p;
  p.kind_ = Kind::quadratic_focusing;
  p.name_ = "quadratic-focusing";
  p.focus_time_ = focus_time;
  return p;
}

PhaseSpec PhaseSpec::custom(ValueFn value, GradFn grad, HessFn hess, std::string name) {
  if (!value || !grad || !hess) throw ConfigError("phase: custom phase needs phi0, grad phi0 and hess phi0");
  PhaseSpec p;
  p.kind_ = Kind::custom;
  p.name_ = std::move(name);
  p.value_ = std::move(value);
  p.grad_ = std::move(grad);
  p.hess_ = std::move(hess);
  return p;
}

PhaseSpec PhaseSpec::superquadratic(double T, double delta) {
  if (!(T > 0.0)) throw ConfigError("phase.T: focusing time must be positive");
  if (!(delta >= 0.0)) throw ConfigError("phase.delta: must be nonnegative");
  auto value = [T, delta](const Point& x) {
    return -std::pow(x.squaredNorm() + 1.0, delta + 1.0) / (2.0 * T * (delta + 1.0));
  };
  auto grad = [T, delta](const Point& x) -> Point {
    return -std::pow(x.squaredNorm() + 1.0, delta) / T * x;
  };
  auto hess = [T, delta](const Point& x) -> Matrix {
    const double r2 = x.squaredNorm() + 1.0;
    const int n = int(x.size());
    Matrix h = -std::pow(r2, delta) / T * Matrix::Identity(n, n);
    h -= 2.0 * delta * std::pow(r2, delta - 1.0) / T * (x * x.transpose());
    return h;
  };
  PhaseSpec p = custom(value, grad, hess, "superquadratic");
  p.focus_time_ = T;
  return p;
}

double PhaseSpec::value(const Point& x) const {
  switch (kind_) {
    case Kind::zero:
      return 0.0;
    case Kind::quadratic_focusing:
      return -(x.squaredNorm() + 1.0) / (2.0 * focus_time_);
    case Kind::custom:
      return value_(x);
  }
  return 0.0;
}

Point PhaseSpec::gradient(const Point& x) const {
  switch (kind_) {
    case Kind::zero:
      return Point::Zero(x.size());
    case Kind::quadratic_focusing:
      return -x / focus_time_;
    case Kind::custom:
      return grad_(x);
  }
  return Point::Zero(x.size());
}

Matrix PhaseSpec::hessian(const Point& x) const {
  const int n = int(x.size());
  switch (kind_) {
    case Kind::zero:
      return Matrix::Zero(n, n);
    case Kind::quadratic_focusing:
      return -identity(n) / focus_time_;
    case Kind::custom:
      return hess_(x);
  }
  return Matrix::Zero(n, n);
}

RealArray PhaseSpec::sample(const Grid& grid) const {
  RealArray v(grid.size());
  for (Eigen::Index i = 0; i < grid.size(); ++i) v[i] = value(grid.point(i));
  return v;
}

double PhaseSpec::max_gradient(const Grid& grid, const RealArray& weight, double threshold) const {
  double m = 0.0;
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    if (weight[i] > threshold) m = std::max(m, gradient(grid.point(i)).norm());
  }
  return m;
}

void PhaseSpec::validate(const Grid& box) const {
  for (Eigen::Index i = 0; i < box.size(); ++i) {
    const Point x = box.point(i);
    if (!std::isfinite(value(x)) || !gradient(x).allFinite() || !hessian(x).allFinite()) {
      throw ConfigError("phase: phi0 or its derivatives are not finite on the box");
    }
  }
}

Matrix RayBundle::jacobian(std::size_t ti, Eigen::Index label) const {
  const int n = dim();
  return Eigen::Map<const Matrix>(jac[ti].col(label).data(), n, n);
}

Matrix RayBundle::xi_jacobian(std::size_t ti, Eigen::Index label) const {
  const int n = dim();
  return Eigen::Map<const Matrix>(dxi[ti].col(label).data(), n, n);
}

RayBundle trace_rays(const PotentialSpec& potential, const PhaseSpec& phase, const Grid& label_grid,
                     const std::vector<double>& times, const RayOptions& options) {
  if (times.empty() || times.front() != 0.0) throw ConfigError("trace_rays: times must start at 0");
  for (std::size_t k = 1; k < times.size(); ++k) {
    if (!(times[k] > times[k - 1])) throw ConfigError("trace_rays: times must be strictly increasing");
  }
  if (!(options.max_step > 0.0)) throw ConfigError("trace_rays: max_step must be positive");

  const int n = label_grid.dim();
  const int nn = n * n;
  const Eigen::Index labels = label_grid.size();
  const int m = 2 * n + 2 * nn + 1;

  RayBundle b{label_grid, times, {}, {}, {}, {}, {}, {}, phase};
  const std::size_t nt = times.size();
  b.x.assign(nt, Eigen::MatrixXd(n, labels));
  b.xi.assign(nt, Eigen::MatrixXd(n, labels));
  b.jac.assign(nt, Eigen::MatrixXd(nn, labels));
  b.dxi.assign(nt, Eigen::MatrixXd(nn, labels));
  b.jac_det.assign(nt, RealArray(labels));
  b.action.assign(nt, RealArray(labels));

  using State = Eigen::VectorXd;
  auto rhs = [&](double t, const State& s) {
    State d(m);
    const Point x = s.segment(0, n);
    const Point xi = s.segment(n, n);
    const Eigen::Map<const Matrix> X(s.data() + 2 * n, n, n);
    const Eigen::Map<const Matrix> Xi(s.data() + 2 * n + nn, n, n);
    const Point g = potential.gradient(t, x);
    const Matrix h = potential.hessian(t, x);
    require_finite(g, "grad V");
    if (!h.allFinite()) throw PotentialError("hess V: non-finite value");
    d.segment(0, n) = xi;
    d.segment(n, n) = -g;
    Eigen::Map<Matrix>(d.data() + 2 * n, n, n) = Xi;
    Eigen::Map<Matrix>(d.data() + 2 * n + nn, n, n) = -h * X;
    d[m - 1] = 0.5 * xi.squaredNorm() - potential.value(t, x);
    return d;
  };

  auto store = [&](std::size_t ti, Eigen::Index j, const State& s) {
    b.x[ti].col(j) = s.segment(0, n);
    b.xi[ti].col(j) = s.segment(n, n);
    b.jac[ti].col(j) = s.segment(2 * n, nn);
    b.dxi[ti].col(j) = s.segment(2 * n + nn, nn);
    b.jac_det[ti][j] = Eigen::Map<const Matrix>(s.data() + 2 * n, n, n).determinant();
    b.action[ti][j] = s[m - 1];
  };

  for (Eigen::Index j = 0; j < labels; ++j) {
    const Point y = label_grid.point(j);
    State s(m);
    s.segment(0, n) = y;
    s.segment(n, n) = phase.gradient(y);
    Eigen::Map<Matrix>(s.data() + 2 * n, n, n) = identity(n);
    Eigen::Map<Matrix>(s.data() + 2 * n + nn, n, n) = phase.hessian(y);
    s[m - 1] = phase.value(y);
    store(0, j, s);
    for (std::size_t k = 1; k < nt; ++k) {
      const double span = times[k] - times[k - 1];
      const int steps = std::max(1, int(std::ceil(span / options.max_step - 1e-12)));
      const double h = span / steps;
      double t = times[k - 1];
      for (int step = 0; step < steps; ++step) {
        const State k1 = rhs(t, s);
        const State k2 = rhs(t + 0.5 * h, s + 0.5 * h * k1);
        const State k3 = rhs(t + 0.5 * h, s + 0.5 * h * k2);
        const State k4 = rhs(t + h, s + h * k3);
        s += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t = times[k - 1] + (step + 1) * h;
      }
      store(k, j, s);
    }
  }
  return b;
}

double caustic_horizon(const RayBundle& bundle, double c0) {
  if (!(c0 > 0.0 && c0 < 1.0)) throw ConfigError("caustic_horizon: c0 must lie in (0, 1)");
  for (std::size_t ti = 0; ti < bundle.times.size(); ++ti) {
    if (bundle.jac_det[ti].abs().minCoeff() < c0) return bundle.times[ti];
  }
  return kNoCaustic;
}

Matrix adjugate(const Matrix& m) {
  if (m.rows() == 1) return Matrix::Ones(1, 1);
  Matrix a(2, 2);
  a << m(1, 1), -m(0, 1), -m(1, 0), m(0, 0);
  return a;
}

bool LabelInterpolant::locate(const Point& y) {
  const int n = grid_.points_per_axis();
  const double h = grid_.spacing();
  dim_stencil_ = grid_.dim();
  for (int a = 0; a < grid_.dim(); ++a) {
    const double u = (y[a] + grid_.half_width()) / h;
    if (!std::isfinite(u)) return false;
    const int i = int(std::floor(u));
    if (i < 1 || i > n - 3) return false;
    const double s = u - i;
    start_[a] = i - 1;
    w_[a][0] = -s * (s - 1.0) * (s - 2.0) / 6.0;
    w_[a][1] = (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0;
    w_[a][2] = -(s + 1.0) * s * (s - 2.0) / 2.0;
    w_[a][3] = (s + 1.0) * s * (s - 1.0) / 6.0;
  }
  return true;
}

double LabelInterpolant::operator()(const RealArray& data) const {
  double v = 0.0;
  if (dim_stencil_ == 1) {
    for (int p = 0; p < 4; ++p) v += w_[0][p] * data[start_[0] + p];
    return v;
  }
  const int n = grid_.points_per_axis();
  for (int p = 0; p < 4; ++p) {
    double row = 0.0;
    const Eigen::Index base = Eigen::Index(start_[0] + p) * n + start_[1];
    for (int q = 0; q < 4; ++q) row += w_[1][q] * data[base + q];
    v += w_[0][p] * row;
  }
  return v;
}

Eigen::VectorXd LabelInterpolant::rows(const Eigen::MatrixXd& data) const {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(data.rows());
  if (dim_stencil_ == 1) {
    for (int p = 0; p < 4; ++p) v += w_[0][p] * data.col(start_[0] + p);
    return v;
  }
  const int n = grid_.points_per_axis();
  for (int p = 0; p < 4; ++p) {
    const Eigen::Index base = Eigen::Index(start_[0] + p) * n + start_[1];
    for (int q = 0; q < 4; ++q) v += w_[0][p] * w_[1][q] * data.col(base + q);
  }
  return v;
}

namespace {

Point initial_guess_1d(const RayBundle& b, std::size_t ti, const Point& xq) {
  const auto& xs = b.x[ti];
  const Eigen::Index n = xs.cols();
  const double q = xq[0];
  if (!(q >= xs(0, 1) && q <= xs(0, n - 2))) {
    throw InversionError("invert_flow: query " + std::to_string(q) + " outside the image covered by the rays");
  }
  Eigen::Index lo = 1, hi = n - 2;
  while (hi - lo > 1) {
    const Eigen::Index mid = (lo + hi) / 2;
    if (xs(0, mid) <= q) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double dx = xs(0, hi) - xs(0, lo);
  const double frac = dx > 0.0 ? (q - xs(0, lo)) / dx : 0.5;
  Point y(1);
  y[0] = b.label_grid.coordinate(int(lo)) + frac * b.label_grid.spacing();
  return y;
}

}  // namespace

Point invert_flow(const RayBundle& bundle, std::size_t time_index, const Point& x_query, const Point* guess,
                  const InversionOptions& options) {
  if (time_index >= bundle.times.size()) throw ConfigError("invert_flow: time index out of range");
  const int n = bundle.dim();
  if (x_query.size() != n) throw ConfigError("invert_flow: query dimension mismatch");
  const double tol = options.tol > 0.0 ? options.tol : 1e-10 * bundle.label_grid.half_width();
  LabelInterpolant interp(bundle.label_grid);
  if (time_index == 0) {
    if (!interp.locate(x_query)) throw InversionError("invert_flow: query outside the label grid");
    return x_query;
  }

  Point y = n == 1 ? initial_guess_1d(bundle, time_index, x_query) : (guess ? *guess : x_query);
  const auto& X = bundle.x[time_index];
  const auto& J = bundle.jac[time_index];

  auto residual = [&](const Point& at, Point& r) {
    if (!interp.locate(at)) return false;
    r = interp.rows(X) - x_query;
    return true;
  };

  Point r(n);
  if (!residual(y, r)) throw InversionError("invert_flow: initial guess outside the label grid");
  for (int it = 0; it < options.max_iter; ++it) {
    const double rn = r.norm();
    if (rn < tol) return y;
    const Eigen::VectorXd jv = interp.rows(J);
    const Matrix jm = Eigen::Map<const Matrix>(jv.data(), n, n);
    const double det = jm.determinant();
    if (!(std::abs(det) > 1e-14)) throw InversionError("invert_flow: singular flow Jacobian");
    const Point step = adjugate(jm) * r / det;
    double lambda = 1.0;
    bool accepted = false;
    Point r_new(n);
    while (lambda > 1.0 / 1024.0) {
      const Point trial = y - lambda * step;
      if (residual(trial, r_new) && r_new.norm() < rn) {
        y = trial;
        r = r_new;
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!accepted) {
      // restore the stencil at y for the next Jacobian evaluation
      residual(y, r);
      if (r.norm() < tol) return y;
      throw InversionError("invert_flow: Newton stalled at residual " + std::to_string(rn));
    }
  }
  if (r.norm() < tol) return y;
  throw InversionError("invert_flow: no convergence in " + std::to_string(options.max_iter) + " iterations");
}

RaySample sample_rays(const RayBundle& bundle, std::size_t time_index, const Point& x_query, const Point* guess,
                      const InversionOptions& options) {
  const int n = bundle.dim();
  RaySample s;
  s.label = invert_flow(bundle, time_index, x_query, guess, options);
  LabelInterpolant interp(bundle.label_grid);
  interp.locate(s.label);
  s.xi = interp.rows(bundle.xi[time_index]);
  const Eigen::VectorXd jv = interp.rows(bundle.jac[time_index]);
  const Eigen::VectorXd dv = interp.rows(bundle.dxi[time_index]);
  s.jac = Eigen::Map<const Matrix>(jv.data(), n, n);
  s.dxi = Eigen::Map<const Matrix>(dv.data(), n, n);
  s.det = s.jac.determinant();
  s.action = interp(bundle.action[time_index]);
  return s;
}

std::string rays_csv(const RayBundle& bundle) {
  const int n = bundle.dim();
  std::ostringstream out;
  out << "t";
  for (int a = 0; a < n; ++a) out << ",y" << a;
  for (int a = 0; a < n; ++a) out << ",x" << a;
  for (int a = 0; a < n; ++a) out << ",xi" << a;
  out << ",jac_det\n";
  char buf[32];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, ",%.17g", v);
    out << buf;
  };
  for (std::size_t ti = 0; ti < bundle.times.size(); ++ti) {
    for (Eigen::Index j = 0; j < bundle.labels(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", bundle.times[ti]);
      out << buf;
      const Point y = bundle.label_grid.point(j);
      for (int a = 0; a < n; ++a) put(y[a]);
      for (int a = 0; a < n; ++a) put(bundle.x[ti](a, j));
      for (int a = 0; a < n; ++a) put(bundle.xi[ti](a, j));
      put(bundle.jac_det[ti][j]);
      out << '\n';
    }
  }
  return out.str();
}

}  // namespace wkb
