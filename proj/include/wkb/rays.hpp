#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "wkb/grid.hpp"

namespace wkb {

/// External potential V(t, x). Harmonic means V = sum_j omega_j^2 x_j^2 / 2.
class PotentialSpec {
 public:
  enum class Kind { zero, harmonic, custom };

  using ValueFn = std::function<double(double, const Point&)>;
  using GradFn = std::function<Point(double, const Point&)>;
  using HessFn = std::function<Matrix(double, const Point&)>;

  static PotentialSpec zero() { return PotentialSpec(); }
  /// A single frequency is broadcast to every axis.
  static PotentialSpec harmonic(std::vector<double> omega);
  static PotentialSpec custom(ValueFn value, GradFn grad, HessFn hess, bool time_dependent = false,
                              std::string name = "custom");

  Kind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  bool time_dependent() const { return time_dependent_; }
  const std::vector<double>& omega() const { return omega_; }
  double omega(int axis) const { return omega_.size() == 1 ? omega_[0] : omega_.at(axis); }

  double value(double t, const Point& x) const;
  Point gradient(double t, const Point& x) const;
  Matrix hessian(double t, const Point& x) const;

  RealArray sample(const Grid& grid, double t) const;

  /// Samples the Hessian on the box and rejects non-finite values.
  void validate(const Grid& box) const;

 private:
  Kind kind_ = Kind::zero;
  std::string name_ = "zero";
  std::vector<double> omega_;
  ValueFn value_;
  GradFn grad_;
  HessFn hess_;
  bool time_dependent_ = false;
};

/// Initial phase phi_0(x).
class PhaseSpec {
 public:
  enum class Kind { zero, quadratic_focusing, custom };

  using ValueFn = std::function<double(const Point&)>;
  using GradFn = std::function<Point(const Point&)>;
  using HessFn = std::function<Matrix(const Point&)>;

  static PhaseSpec zero() { return PhaseSpec(); }
  /// phi_0 = -(|x|^2 + 1) / (2T): every ray reaches the origin at t = T.
  static PhaseSpec quadratic_focusing(double focus_time);
  static PhaseSpec custom(ValueFn value, GradFn grad, HessFn hess, std::string name = "custom");
  /// grad phi_0 = -(|x|^2 + 1)^delta x / T; the ring |y| = R focuses at T / (R^2 + 1)^delta.
  static PhaseSpec superquadratic(double focus_time, double delta);

  Kind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  double focus_time() const { return focus_time_; }

  double value(const Point& x) const;
  Point gradient(const Point& x) const;
  Matrix hessian(const Point& x) const;

  RealArray sample(const Grid& grid) const;
  /// Max |grad phi_0| over grid nodes where `weight` exceeds `threshold`.
  double max_gradient(const Grid& grid, const RealArray& weight, double threshold) const;

  void validate(const Grid& box) const;

 private:
  Kind kind_ = Kind::zero;
  std::string name_ = "zero";
  double focus_time_ = 0.0;
  ValueFn value_;
  GradFn grad_;
  HessFn hess_;
};

/// Rays x(t, y), xi(t, y) with their label Jacobians and the action along
/// each ray. Per stored time, x and xi are dim x labels; jac and dxi are
/// (dim*dim) x labels in column-major entry order.
struct RayBundle {
  Grid label_grid;
  std::vector<double> times;
  std::vector<Eigen::MatrixXd> x;
  std::vector<Eigen::MatrixXd> xi;
  std::vector<Eigen::MatrixXd> jac;
  std::vector<Eigen::MatrixXd> dxi;
  std::vector<RealArray> jac_det;
  std::vector<RealArray> action;
  /// Initial phase the rays were launched from.
  PhaseSpec phase{};

  int dim() const { return label_grid.dim(); }
  Eigen::Index labels() const { return label_grid.size(); }
  Matrix jacobian(std::size_t ti, Eigen::Index label) const;
  Matrix xi_jacobian(std::size_t ti, Eigen::Index label) const;
};

struct RayOptions {
  /// Largest RK4 substep between stored times.
  double max_step = 2.5e-3;
};

RayBundle trace_rays(const PotentialSpec& potential, const PhaseSpec& phase, const Grid& label_grid,
                     const std::vector<double>& times, const RayOptions& options = {});

/// First stored time with min |det jac| < c0, or +infinity.
double caustic_horizon(const RayBundle& bundle, double c0);

inline constexpr double kNoCaustic = std::numeric_limits<double>::infinity();

/// Adjugate of a 1x1 or 2x2 matrix.
Matrix adjugate(const Matrix& m);

/// Piecewise-cubic (four-point Lagrange, tensor product in 2-d) evaluation
/// of per-label data at an off-node label.
class LabelInterpolant {
 public:
  explicit LabelInterpolant(const Grid& label_grid) : grid_(label_grid) {}

  /// Prepares the stencil for `y`; returns false if y is too close to the
  /// label-grid edge for a centered stencil.
  bool locate(const Point& y);

  double operator()(const RealArray& data) const;
  /// Interpolates every row of a rows x labels matrix.
  Eigen::VectorXd rows(const Eigen::MatrixXd& data) const;

 private:
  Grid grid_;
  int dim_stencil_ = 1;
  std::array<int, 2> start_{0, 0};
  std::array<std::array<double, 4>, 2> w_{};
};

struct InversionOptions {
  double tol = -1.0;  // default 1e-10 * label-grid half width
  int max_iter = 50;
};

/// Label y with x(t_i, y) = x_query, by damped Newton using the adjugate
/// form of the inverse Jacobian. `guess` seeds the iteration in 2-d.
Point invert_flow(const RayBundle& bundle, std::size_t time_index, const Point& x_query,
                  const Point* guess = nullptr, const InversionOptions& options = {});

/// Ray data carried to an Eulerian point.
struct RaySample {
  Point label;
  Point xi;
  Matrix jac;
  Matrix dxi;
  double det = 1.0;
  double action = 0.0;
};

RaySample sample_rays(const RayBundle& bundle, std::size_t time_index, const Point& x_query,
                      const Point* guess = nullptr, const InversionOptions& options = {});

/// CSV with columns t, y..., x..., xi..., jac_det.
std::string rays_csv(const RayBundle& bundle);

}  // namespace wkb
