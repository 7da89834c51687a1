#pragma once

#include <unsupported/Eigen/FFT>

#include <array>
#include <vector>

#include "wkb/grid.hpp"

namespace wkb {

/// FFT workspace bound to one grid. Transforms act along every axis of the
/// flattened layout. Not thread-safe: keep one instance per thread (see
/// spectral_for).
class Spectral {
 public:
  explicit Spectral(const Grid& grid);

  const Grid& grid() const { return grid_; }

  /// Unnormalized forward DFT over all axes.
  void forward(ComplexArray& data) const;
  /// Inverse DFT over all axes, scaled so that inverse(forward(f)) == f.
  void inverse(ComplexArray& data) const;

  /// Wavenumber along `axis` for every flat index of the transformed layout.
  const RealArray& k(int axis) const { return k_[axis]; }
  const RealArray& k_squared() const { return k2_; }
  /// 1 on modes kept by the 2/3 rule, 0 elsewhere.
  const RealArray& dealias_mask() const { return mask_; }

  /// FFT-based derivative. order 1 zeroes the Nyquist mode; order 2 multiplies by -k^2.
  ComplexArray derivative(const ComplexArray& f, int axis, int order, bool dealias = false) const;
  RealArray derivative(const RealArray& f, int axis, int order, bool dealias = false) const;
  ComplexArray laplacian(const ComplexArray& f, bool dealias = false) const;
  RealArray laplacian(const RealArray& f, bool dealias = false) const;

  /// f -> IFFT(multiplier * FFT(f)).
  ComplexArray apply(const ComplexArray& f, const ComplexArray& multiplier) const;
  void apply_in_place(ComplexArray& f, const ComplexArray& multiplier) const;

 private:
  void transform_axis(ComplexArray& data, int axis, bool inverse) const;

  Grid grid_;
  mutable Eigen::FFT<double> fft_;
  mutable std::vector<Complex> line_in_;
  mutable std::vector<Complex> line_out_;
  std::array<RealArray, 2> k_;
  std::array<RealArray, 2> k_first_;
  RealArray k2_;
  RealArray mask_;
};

/// Thread-local cached workspace for `grid`.
const Spectral& spectral_for(const Grid& grid);

template <typename Scalar>
Field<Scalar> spectral_derivative(const Field<Scalar>& f, int axis, int order) {
  if (order != 1 && order != 2) throw ConfigError("spectral_derivative: order must be 1 or 2");
  if (axis < 0 || axis >= f.grid().dim()) throw ConfigError("spectral_derivative: axis out of range");
  typename Field<Scalar>::Values d = spectral_for(f.grid()).derivative(f.values(), axis, order);
  return f.with_values(std::move(d));
}

template <typename Scalar>
Field<Scalar> spectral_laplacian(const Field<Scalar>& f) {
  typename Field<Scalar>::Values d = spectral_for(f.grid()).laplacian(f.values());
  return f.with_values(std::move(d));
}

/// Sobolev H^s norm with weights (1 + |k|^2)^(s/2); s = 0 gives the L2 norm.
double hs_norm(const WaveField& f, double s);

}  // namespace wkb
