#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <type_traits>
#include <utility>

#include "wkb/errors.hpp"

namespace wkb {

using Complex = std::complex<double>;

/// Position or momentum in dimension 1 or 2. Fixed capacity, never allocates.
using Point = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 2, 1>;
/// n x n matrix, n <= 2.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 2, 2>;

using RealArray = Eigen::ArrayXd;
using ComplexArray = Eigen::ArrayXcd;

/// Uniform periodic grid on [-L, L)^dim. Axis 0 is the slow index in the
/// flattened storage: flat = i0 * n + i1.
class Grid {
 public:
  Grid(int dim, int points_per_axis, double half_width)
      : dim_(dim), n_(points_per_axis), half_width_(half_width) {
    if (dim != 1 && dim != 2) {
      throw ConfigError("grid: dim must be 1 or 2, got " + std::to_string(dim));
    }
    if (points_per_axis < 8 || (points_per_axis & (points_per_axis - 1)) != 0) {
      throw ConfigError("grid: points_per_axis must be a power of two >= 8, got " +
                        std::to_string(points_per_axis));
    }
    if (!(half_width > 0.0) || !std::isfinite(half_width)) {
      throw ConfigError("grid: half_width must be positive and finite");
    }
    spacing_ = 2.0 * half_width_ / n_;
  }

  int dim() const { return dim_; }
  int points_per_axis() const { return n_; }
  double half_width() const { return half_width_; }
  double spacing() const { return spacing_; }
  Eigen::Index size() const { return dim_ == 1 ? n_ : Eigen::Index(n_) * n_; }
  double cell_volume() const { return dim_ == 1 ? spacing_ : spacing_ * spacing_; }
  double volume() const { return std::pow(2.0 * half_width_, dim_); }

  double coordinate(int i) const { return -half_width_ + i * spacing_; }

  std::array<int, 2> multi_index(Eigen::Index flat) const {
    if (dim_ == 1) return {int(flat), 0};
    return {int(flat / n_), int(flat % n_)};
  }

  Point point(Eigen::Index flat) const {
    Point p(dim_);
    const auto idx = multi_index(flat);
    for (int a = 0; a < dim_; ++a) p[a] = coordinate(idx[a]);
    return p;
  }

  /// Angular wavenumber of FFT bin i (standard ordering, Nyquist negative).
  double wavenumber(int i) const {
    const int m = i < n_ / 2 ? i : i - n_;
    return M_PI * m / half_width_;
  }

  /// Distance from x to the nearest box face, max-norm over axes.
  double distance_to_boundary(const Point& x) const {
    double d = std::numeric_limits<double>::infinity();
    for (int a = 0; a < dim_; ++a) {
      d = std::min(d, std::min(x[a] + half_width_, half_width_ - x[a]));
    }
    return d;
  }

  bool operator==(const Grid& o) const {
    return dim_ == o.dim_ && n_ == o.n_ && half_width_ == o.half_width_;
  }
  bool operator!=(const Grid& o) const { return !(*this == o); }

 private:
  int dim_;
  int n_;
  double half_width_;
  double spacing_;
};

/// Samples of a scalar field on a grid. WaveField carries the epsilon it
/// belongs to when it represents u^eps.
template <typename Scalar>
class Field {
 public:
  using Values = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

  Field(Grid grid, Values values, std::optional<double> epsilon = std::nullopt)
      : grid_(std::move(grid)), values_(std::move(values)), epsilon_(epsilon) {
    if (values_.size() != grid_.size()) {
      throw ConfigError("field: value count " + std::to_string(values_.size()) +
                        " does not match grid size " + std::to_string(grid_.size()));
    }
    if (!values_.allFinite()) throw InstabilityError("field: non-finite value");
  }

  static Field zero(const Grid& grid, std::optional<double> epsilon = std::nullopt) {
    return Field(grid, Values::Zero(grid.size()), epsilon);
  }

  template <typename Fn>
  static Field sample(const Grid& grid, Fn&& fn, std::optional<double> epsilon = std::nullopt) {
    Values v(grid.size());
    for (Eigen::Index i = 0; i < grid.size(); ++i) v[i] = Scalar(fn(grid.point(i)));
    return Field(grid, std::move(v), epsilon);
  }

  const Grid& grid() const { return grid_; }
  const Values& values() const { return values_; }
  std::optional<double> epsilon() const { return epsilon_; }

  Field with_values(Values v) const { return Field(grid_, std::move(v), epsilon_); }

 private:
  Grid grid_;
  Values values_;
  std::optional<double> epsilon_;
};

using RealField = Field<double>;
using WaveField = Field<Complex>;

/// Rectangle rule, spectrally accurate for periodic data.
template <typename Derived>
typename Derived::Scalar integrate(const Grid& grid, const Eigen::ArrayBase<Derived>& values) {
  return values.sum() * grid.cell_volume();
}

template <typename Scalar>
Scalar integrate(const Field<Scalar>& f) {
  return integrate(f.grid(), f.values());
}

struct Norms {
  double l2 = 0.0;
  double linf = 0.0;
  double l4 = 0.0;
};

template <typename Scalar>
Norms norms(const Field<Scalar>& f) {
  const RealArray mod2 = f.values().abs2();
  Norms n;
  n.l2 = std::sqrt(integrate(f.grid(), mod2));
  n.linf = f.values().size() ? std::sqrt(mod2.maxCoeff()) : 0.0;
  n.l4 = std::pow(integrate(f.grid(), mod2.square()), 0.25);
  return n;
}

inline double l2_norm(const Grid& grid, const ComplexArray& v) {
  return std::sqrt(integrate(grid, RealArray(v.abs2())));
}

inline double l2_norm(const Grid& grid, const RealArray& v) {
  return std::sqrt(integrate(grid, RealArray(v.square())));
}

}  // namespace wkb
