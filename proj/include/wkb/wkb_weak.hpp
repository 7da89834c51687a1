#pragma once

#include <vector>

#include "wkb/nls.hpp"

namespace wkb {

/// Transported amplitude a = a0(y) / sqrt(J) and nonlinear phase shift G at
/// every bundle time, for coupling exponent kappa > 1/2.
struct WeakWkbField {
  Grid grid;
  std::vector<double> times;
  std::vector<ComplexArray> a;
  std::vector<RealArray> G;
  /// J_t(y(t, x)) on the grid.
  std::vector<RealArray> jacobian;
  /// |a0(y(t, x))|^2 on the grid.
  std::vector<RealArray> a0_squared;
  double kappa = 1.0;
};

std::size_t time_index(const std::vector<double>& times, double t);

/// a(t, x) = a0(y(t, x)) / sqrt(J_t(y(t, x))).
WaveField transport_amplitude(const RayBundle& bundle, const Profile& a0, double t, const Grid& grid);

/// G(t, x) = -int_0^t f(|a0(y)|^2 / J_s(y)) ds along the ray through (t, x),
/// composite Simpson on the stored ray times.
RealField phase_shift_G(const RayBundle& bundle, const Profile& a0, const NonlinearitySpec& f, double t,
                        const Grid& grid);

WeakWkbField build_weak(const RayBundle& bundle, const Profile& a0, const NonlinearitySpec& f, const Grid& grid);

/// a e^{i eps^{kappa-1} G} e^{i phi_eik / eps} at stored time index i. With
/// include_phase_shift = false the G factor is dropped.
WaveField assemble_weak(const WeakWkbField& wkb, const EikonalField& eikonal, double epsilon, std::size_t i,
                        bool include_phase_shift = true, double resolution_factor = 1.0 / 6.0);

/// Eulerian method-of-lines solve of d_t phi + grad phi_eik . grad phi + f(|a|^2) = 0,
/// phi(0) = 0, with |a|^2 taken from `wkb`. Returns phi at every stored time.
std::vector<RealArray> limit_phase_mol(const WeakWkbField& wkb, const EikonalField& eikonal,
                                       const NonlinearitySpec& f);

/// L2 norm over `mask` of d_t a + grad phi_eik . grad a + a Lap phi_eik / 2.
double transport_residual(const WeakWkbField& wkb, const EikonalField& eikonal, std::size_t i,
                          const RealArray& mask);

/// L1 norm over `mask` of d_t |a|^2 + div(|a|^2 grad phi_eik).
double modulus_residual(const WeakWkbField& wkb, const EikonalField& eikonal, std::size_t i,
                        const RealArray& mask);

}  // namespace wkb
