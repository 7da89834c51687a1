#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "wkb/eikonal.hpp"
#include "wkb/spectral.hpp"

namespace wkb {

/// Nonlinearity eps^kappa f(|u|^2) u.
class NonlinearitySpec {
 public:
  enum class Kind { none, cubic, smooth };
  using Fn = std::function<double(double)>;

  static NonlinearitySpec none() { return NonlinearitySpec(); }
  /// f(y) = y.
  static NonlinearitySpec cubic(double kappa);
  static NonlinearitySpec smooth_defocusing(Fn f, Fn df, double kappa, std::string name = "smooth");

  Kind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  double kappa() const { return kappa_; }
  bool is_none() const { return kind_ == Kind::none; }

  double f(double y) const;
  double df(double y) const;
  RealArray f(const RealArray& y) const;
  RealArray df(const RealArray& y) const;
  /// eps^kappa, or 0 for the linear equation.
  double coupling(double epsilon) const;

  /// Checks f' > 0 on [0, y_max] by sampling; required when kappa < 1.
  void validate(double y_max) const;

 private:
  Kind kind_ = Kind::none;
  std::string name_ = "none";
  double kappa_ = 0.0;
  Fn f_;
  Fn df_;
};

/// Real amplitude profile a(x).
class Profile {
 public:
  enum class Kind { zero, gaussian, odd_gaussian, bump, table };

  static Profile zero() { return Profile(); }
  /// amplitude * exp(-|x - c|^2 / (2 width^2)).
  static Profile gaussian(Point center, double width, double amplitude);
  /// (x - c)_axis times the Gaussian above.
  static Profile odd_gaussian(Point center, double width, double amplitude, int axis = 0);
  /// amplitude * exp(1 - 1 / (1 - |x - c|^2 / R^2)) inside the ball, 0 outside.
  static Profile bump(Point center, double radius, double amplitude);
  /// Node values on a fixed grid.
  static Profile table(Grid grid, RealArray values);

  Kind kind() const { return kind_; }
  bool is_zero() const { return kind_ == Kind::zero; }
  const Point& center() const { return center_; }
  double width() const { return width_; }
  double amplitude() const { return amplitude_; }
  int axis() const { return axis_; }

  double operator()(const Point& x) const;
  RealArray sample(const Grid& grid) const;

 private:
  Kind kind_ = Kind::zero;
  Point center_;
  double width_ = 1.0;
  double amplitude_ = 0.0;
  int axis_ = 0;
  std::optional<Grid> table_grid_;
  RealArray table_;
};

struct InitialDataOptions {
  /// Required points per local oscillation: spacing <= factor * 2 pi eps / max |grad phi_0|.
  double resolution_factor = 1.0 / 6.0;
};

/// (a0 + eps a1) e^{i phi_0 / eps}.
WaveField initial_data(const Grid& grid, const Profile& a0, const Profile& a1, const PhaseSpec& phase,
                       double epsilon, const InitialDataOptions& options = {});
WaveField initial_data(const Grid& grid, const Profile& a0, const Profile& a1, const EikonalField& eikonal,
                       double epsilon, const InitialDataOptions& options = {});

/// Throws ConfigError naming the smallest adequate grid if `max_phase_gradient`
/// is not resolved at this epsilon.
void check_phase_resolution(const Grid& grid, double max_phase_gradient, double epsilon,
                            double resolution_factor, const std::string& where);

/// One Strang step of i eps u_t + eps^2/2 Lap u = V u + eps^kappa f(|u|^2) u:
/// half kinetic, full potential and nonlinear, half kinetic.
WaveField strang_step(const WaveField& u, double t, double dt, const PotentialSpec& potential,
                      const NonlinearitySpec& nonlinearity);

/// Reusable stepper that caches the kinetic multiplier and a static potential.
class StrangStepper {
 public:
  StrangStepper(const Grid& grid, double epsilon, double dt, const PotentialSpec& potential,
                const NonlinearitySpec& nonlinearity);

  void step(ComplexArray& u, double t) const;
  double dt() const { return dt_; }

 private:
  const Spectral& spectral_;
  Grid grid_;
  double epsilon_;
  double dt_;
  const PotentialSpec& potential_;
  const NonlinearitySpec& nonlinearity_;
  double coupling_;
  ComplexArray kinetic_half_;
  RealArray static_potential_;
};

struct NlsProblem {
  WaveField initial;
  PotentialSpec potential;
  NonlinearitySpec nonlinearity;
  /// Increasing, nonnegative; 0 may be included.
  std::vector<double> snapshot_times;
  double dt_max = std::numeric_limits<double>::infinity();
  /// Fixed step when positive; otherwise min(T/2000, 0.1 eps, dt_max).
  double dt = 0.0;
  bool check_boundary = true;
  double mass_tolerance = 1e-11;
};

struct NlsRun {
  double epsilon = 0.0;
  double dt = 0.0;
  std::vector<double> times;
  std::vector<WaveField> fields;
  std::vector<double> step_times;
  std::vector<double> step_mass;
  double max_mass_drift = 0.0;
  double boundary_fraction = 0.0;
};

double default_time_step(double t_final, double epsilon, double dt_max);

/// Fraction of the mass within L/8 of the box edge.
double boundary_mass_fraction(const WaveField& u);

NlsRun solve(const NlsProblem& problem);

/// Exact linear free propagator: u_hat(k) e^{-i eps |k|^2 t / 2}.
WaveField free_propagate(const WaveField& u, double t);

}  // namespace wkb
