#include "wkb/spectral.hpp"

#include <map>
#include <memory>
#include <tuple>

namespace wkb {

Spectral::Spectral(const Grid& grid) : grid_(grid) {
  const int n = grid.points_per_axis();
  const Eigen::Index size = grid.size();
  line_in_.resize(n);
  line_out_.resize(n);
  k2_ = RealArray::Zero(size);
  mask_ = RealArray::Ones(size);
  for (int a = 0; a < 2; ++a) {
    k_[a] = RealArray::Zero(size);
    k_first_[a] = RealArray::Zero(size);
  }
  for (Eigen::Index i = 0; i < size; ++i) {
    const auto idx = grid.multi_index(i);
    for (int a = 0; a < grid.dim(); ++a) {
      const double kk = grid.wavenumber(idx[a]);
      k_[a][i] = kk;
      k_first_[a][i] = idx[a] == n / 2 ? 0.0 : kk;
      k2_[i] += kk * kk;
      const int m = idx[a] < n / 2 ? idx[a] : n - idx[a];
      if (3 * m >= n) mask_[i] = 0.0;
    }
  }
}

void Spectral::transform_axis(ComplexArray& data, int axis, bool inverse) const {
  const int n = grid_.points_per_axis();
  if (grid_.dim() == 1) {
    if (inverse) {
      fft_.inv(line_out_.data(), data.data(), n);
    } else {
      fft_.fwd(line_out_.data(), data.data(), n);
    }
    std::copy(line_out_.begin(), line_out_.end(), data.data());
    return;
  }
  for (int line = 0; line < n; ++line) {
    // axis 1 is contiguous, axis 0 is strided by n
    const Eigen::Index base = axis == 1 ? Eigen::Index(line) * n : line;
    const Eigen::Index stride = axis == 1 ? 1 : n;
    for (int j = 0; j < n; ++j) line_in_[j] = data[base + j * stride];
    if (inverse) {
      fft_.inv(line_out_.data(), line_in_.data(), n);
    } else {
      fft_.fwd(line_out_.data(), line_in_.data(), n);
    }
    for (int j = 0; j < n; ++j) data[base + j * stride] = line_out_[j];
  }
}

void Spectral::forward(ComplexArray& data) const {
  for (int a = grid_.dim() - 1; a >= 0; --a) transform_axis(data, a, false);
}

void Spectral::inverse(ComplexArray& data) const {
  for (int a = 0; a < grid_.dim(); ++a) transform_axis(data, a, true);
}

ComplexArray Spectral::derivative(const ComplexArray& f, int axis, int order, bool dealias) const {
  ComplexArray g = f;
  forward(g);
  if (order == 1) {
    g *= Complex(0.0, 1.0) * k_first_[axis].cast<Complex>();
  } else {
    g *= (-k_[axis].square()).cast<Complex>();
  }
  if (dealias) g *= mask_.cast<Complex>();
  inverse(g);
  return g;
}

RealArray Spectral::derivative(const RealArray& f, int axis, int order, bool dealias) const {
  return derivative(ComplexArray(f.cast<Complex>()), axis, order, dealias).real();
}

ComplexArray Spectral::laplacian(const ComplexArray& f, bool dealias) const {
  ComplexArray g = f;
  forward(g);
  g *= (-k2_).cast<Complex>();
  if (dealias) g *= mask_.cast<Complex>();
  inverse(g);
  return g;
}

RealArray Spectral::laplacian(const RealArray& f, bool dealias) const {
  return laplacian(ComplexArray(f.cast<Complex>()), dealias).real();
}

ComplexArray Spectral::apply(const ComplexArray& f, const ComplexArray& multiplier) const {
  ComplexArray g = f;
  apply_in_place(g, multiplier);
  return g;
}

void Spectral::apply_in_place(ComplexArray& f, const ComplexArray& multiplier) const {
  forward(f);
  f *= multiplier;
  inverse(f);
}

const Spectral& spectral_for(const Grid& grid) {
  using Key = std::tuple<int, int, double>;
  thread_local std::map<Key, std::unique_ptr<Spectral>> cache;
  const Key key{grid.dim(), grid.points_per_axis(), grid.half_width()};
  auto it = cache.find(key);
  if (it == cache.end()) {
    it = cache.emplace(key, std::make_unique<Spectral>(grid)).first;
  }
  return *it->second;
}

double hs_norm(const WaveField& f, double s) {
  const Spectral& sp = spectral_for(f.grid());
  ComplexArray g = f.values();
  sp.forward(g);
  // Parseval: sum |f|^2 dx = (dx / size) sum |f_hat|^2
  const RealArray w = (1.0 + sp.k_squared()).pow(s);
  const double total = (w * g.abs2()).sum() * f.grid().cell_volume() / double(f.grid().size());
  return std::sqrt(total);
}

}  // namespace wkb
