#pragma once

#include <array>
#include <vector>

#include "wkb/rays.hpp"

namespace wkb {

/// phi_eik and its first two derivatives at one time. hess holds dim*dim
/// arrays in column-major entry order.
struct EikonalSnapshot {
  RealArray phi;
  std::vector<RealArray> grad;
  std::vector<RealArray> hess;
  RealArray lap;
};

/// The eikonal phase sampled on the Eulerian grid at stored times.
class EikonalField {
 public:
  EikonalField(Grid grid, std::vector<double> times, std::vector<EikonalSnapshot> snapshots, double valid_until);

  /// phi_eik = 0 for all t (V = 0, phi_0 = 0).
  static EikonalField zero(const Grid& grid, std::vector<double> times);

  const Grid& grid() const { return grid_; }
  const std::vector<double>& times() const { return times_; }
  const EikonalSnapshot& snapshot(std::size_t i) const { return snapshots_.at(i); }
  std::size_t size() const { return times_.size(); }
  double valid_until() const { return valid_until_; }
  bool is_zero() const { return zero_; }

  /// Cubic Lagrange interpolation between stored times; exact at stored times.
  EikonalSnapshot sample(double t) const;

  RealField phi(std::size_t i) const { return RealField(grid_, snapshots_.at(i).phi); }
  RealField lap_phi(std::size_t i) const { return RealField(grid_, snapshots_.at(i).lap); }
  RealField grad_phi(std::size_t i, int axis) const { return RealField(grid_, snapshots_.at(i).grad.at(axis)); }

 private:
  Grid grid_;
  std::vector<double> times_;
  std::vector<EikonalSnapshot> snapshots_;
  double valid_until_;
  bool zero_ = false;
};

/// Maps the ray action, momentum and Jacobians to the grid. The Hessian is
/// Xi * adj(X) / det(X). Every bundle time must lie below the caustic horizon
/// for `c0`.
EikonalField build_eikonal(const RayBundle& bundle, const Grid& grid, double c0 = 0.2);

struct EikonalOptions {
  double c0 = 0.2;
  /// Initial label-grid width relative to the box; widened until the box is covered.
  double label_factor = 1.5;
  double max_label_factor = 16.0;
  RayOptions rays{};
};

/// trace_rays + build_eikonal with an automatically sized label grid.
EikonalField eikonal_for(const PotentialSpec& potential, const PhaseSpec& phase, const Grid& grid,
                         const std::vector<double>& times, const EikonalOptions& options = {});

struct TracedEikonal {
  RayBundle bundle;
  EikonalField eikonal;
};

/// As eikonal_for, also returning the bundle; the bundle is traced even when
/// phi_eik vanishes identically.
TracedEikonal trace_eikonal(const PotentialSpec& potential, const PhaseSpec& phase, const Grid& grid,
                            const std::vector<double>& times, const EikonalOptions& options = {});

/// Eighth-order centered difference along `axis`; the four nodes nearest
/// each edge are left at zero.
RealArray centered_difference(const Grid& grid, const RealArray& f, int axis);

/// 1 on nodes whose every coordinate satisfies |x_a| <= fraction * L.
RealArray central_mask(const Grid& grid, double fraction);

/// Max over `mask` of |d_t phi + |grad phi|^2 / 2 + V| at stored index i,
/// with d_t by a five-point (interior) or three-point centered stencil.
double eikonal_residual(const EikonalField& eik, const PotentialSpec& potential, std::size_t i,
                        const RealArray& mask);

/// Max over `mask` of |D phi - grad phi|, D the centered difference above.
double gradient_consistency(const EikonalField& eik, std::size_t i, const RealArray& mask);

}  // namespace wkb
