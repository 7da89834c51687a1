#pragma once

#include <string>
#include <vector>

#include "wkb/nls.hpp"

namespace wkb {

struct ErrorRecord {
  double t = 0.0;
  double l2 = 0.0;
  double linf = 0.0;
};

/// L2 and max-norm of u - v on a shared grid.
ErrorRecord field_error(const WaveField& u, const WaveField& v, double t = 0.0);

struct RateFit {
  std::vector<double> xs;
  std::vector<double> ys;
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Least squares on (log x, log y).
RateFit fit_rate(const std::vector<double>& xs, const std::vector<double>& ys);

struct AffineFit {
  double slope = 0.0;
  double intercept = 0.0;
  /// max_i |y_i - fit(x_i)| / |y_i|.
  double max_relative_residual = 0.0;
};

/// Least squares line y = intercept + slope x.
AffineFit fit_affine(const std::vector<double>& xs, const std::vector<double>& ys);

enum class Conserved { mass, energy, momentum, pseudo_conformal };

const char* to_string(Conserved q);

struct Ledger {
  Conserved quantity = Conserved::mass;
  std::vector<double> times;
  /// Mass, energy, momentum (first axis) or ||J u||^2 + c t^2 ||u||_4^4.
  std::vector<double> values;
  /// Pseudo-conformal only: centered d/dt of values and c t (2 - n) ||u||_4^4.
  std::vector<double> lhs;
  std::vector<double> rhs;
  /// Relative drift for mass (over every solver step when recorded) and energy, absolute for momentum, and for the
  /// pseudo-conformal law max |lhs - rhs| / max |rhs| in 1-d or the relative
  /// drift of values in 2-d.
  double max_drift = 0.0;
};

/// Energy and pseudo-conformal entries need the cubic or linear equation.
Ledger conservation_ledger(const NlsRun& run, const PotentialSpec& potential, const NonlinearitySpec& nonlinearity,
                           Conserved which);

double mass(const WaveField& u);
/// ||eps grad u||^2 + eps^kappa ||u||_4^4 + 2 int V |u|^2 (cubic f).
double energy(const WaveField& u, const RealArray& potential, double coupling);
/// Im int conj(u) eps grad u.
Point momentum(const WaveField& u);
/// ||(x + i eps t grad) u||^2.
double pseudo_conformal_norm(const WaveField& u, double t);

/// Ledger CSV with columns t, quantity, value, drift.
std::string ledger_csv(const std::vector<Ledger>& ledgers);

}  // namespace wkb
