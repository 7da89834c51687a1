#pragma once

#include <vector>

#include "wkb/nls.hpp"

namespace wkb {

/// inf f'(y) over [0, 4 a0_sup^2] by dense sampling; throws AssumptionError if <= 0.
double symmetrizer_floor(const NonlinearitySpec& f, double a0_sup);

/// Amplitude a, phase correction phi and its gradient v at one time; the
/// full phase is phi + phi_eik. epsilon = 0 marks the limit system.
struct GrenierState {
  double t = 0.0;
  ComplexArray a;
  std::vector<RealArray> v;
  RealArray phi;
};

struct GrenierTrajectory {
  Grid grid;
  double epsilon = 0.0;
  double coupling = 1.0;
  double dt = 0.0;
  std::vector<GrenierState> states;
  /// Floor from symmetrizer_floor and the smallest f'(|a|^2) met at a snapshot.
  double symmetrizer_delta = 0.0;
  double min_fprime = 0.0;

  std::vector<double> times() const;
  /// Cubic Lagrange interpolation between stored states; exact at stored times.
  GrenierState sample(double t) const;
};

struct GrenierOptions {
  /// Fixed step when positive; otherwise from a spectral stability estimate.
  double dt = 0.0;
  /// RK4 stability safety factor applied to the estimate.
  double cfl = 0.5;
  bool dealias = true;
  /// Coupling in front of f; negative selects 1 (kappa = 0). Setting eps^kappa
  /// here gives the intermediate-regime system with the exact dispersive term.
  double coupling = -1.0;
  /// Stored times; empty selects the eikonal's stored times up to T.
  std::vector<double> snapshot_times;
  /// Shock monitor thresholds relative to the initial data.
  double amplitude_blowup = 1e3;
  double gradient_blowup = 10.0;
};

/// Method-of-lines RK4 solve of
///   d_t phi = -B,  d_t v = -grad B,  B = |v|^2/2 + grad phi_eik . v + c f(|a|^2),
///   d_t a = -(v + grad phi_eik) . grad a - a (div v + Lap phi_eik) / 2 + i eps Lap a / 2,
/// with spectral derivatives. epsilon = 0 gives the limit system.
GrenierTrajectory solve_grenier(const EikonalField& eikonal, const WaveField& a0, const NonlinearitySpec& f,
                                double epsilon, double T, const GrenierOptions& options = {});

/// First-order corrector (a1, phi1) along a limit trajectory.
struct CorrectorPair {
  std::vector<double> times;
  std::vector<ComplexArray> a1;
  std::vector<RealArray> phi1;
};

/// Linearization of the system above about the limit solution, with data (a1, 0):
///   d_t phi1 = -(v + g) . grad phi1 - 2 c Re(conj(a) a1) f'(|a|^2)
///   d_t a1 = -(v + g) . grad a1 - grad phi1 . grad a - a1 (div v + Lap phi_eik) / 2
///            - a Lap phi1 / 2 + i Lap a / 2
CorrectorPair solve_corrector(const GrenierTrajectory& limit, const EikonalField& eikonal, const WaveField& a1,
                              const NonlinearitySpec& f, const GrenierOptions& options = {});

/// a e^{i phi1} e^{i (phi + phi_eik) / eps} at stored index i, or without the
/// e^{i phi1} factor when with_corrector is false.
WaveField assemble_super(const GrenierTrajectory& limit, const CorrectorPair* corrector, const EikonalField& eikonal,
                         double epsilon, std::size_t i, bool with_corrector, double resolution_factor = 1.0 / 6.0);

/// a^eps e^{i (phi^eps + phi_eik) / eps} from a finite-epsilon trajectory.
WaveField reconstruct(const GrenierTrajectory& traj, const EikonalField& eikonal, std::size_t i);

struct EulerResidual {
  double t = 0.0;
  double mass = 0.0;
  double momentum = 0.0;
};

/// L2 norms of d_t rho + div(rho u) and d_t u + (u . grad) u + grad V + c grad f(rho),
/// rho = |a|^2, u = v + grad phi_eik, with d_t by centered differences over
/// states i - stride, i + stride.
EulerResidual euler_residual(const GrenierTrajectory& limit, const EikonalField& eikonal,
                             const PotentialSpec& potential, const NonlinearitySpec& f, std::size_t i,
                             std::size_t stride = 1);

/// Max over snapshots of |grad phi - v|.
double phase_gradient_drift(const GrenierTrajectory& traj);

/// Max over snapshots of the spectral curl of v (0 in 1-d).
double max_curl(const GrenierTrajectory& traj);

}  // namespace wkb
