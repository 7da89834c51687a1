#include "wkb/interp.hpp"

#include <algorithm>
#include <cmath>

#include "wkb/errors.hpp"

namespace wkb {

std::vector<double> lagrange_weights(const std::vector<double>& nodes, double t) {
  const std::size_t m = nodes.size();
  std::vector<double> w(m, 1.0);
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t l = 0; l < m; ++l) {
      if (l != j) w[j] *= (t - nodes[l]) / (nodes[j] - nodes[l]);
    }
  }
  return w;
}

std::vector<double> lagrange_derivative_weights(const std::vector<double>& nodes, double t) {
  const std::size_t m = nodes.size();
  std::vector<double> w(m, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t k = 0; k < m; ++k) {
      if (k == j) continue;
      double term = 1.0 / (nodes[j] - nodes[k]);
      for (std::size_t l = 0; l < m; ++l) {
        if (l != j && l != k) term *= (t - nodes[l]) / (nodes[j] - nodes[l]);
      }
      w[j] += term;
    }
  }
  return w;
}

TimeStencil time_stencil(const std::vector<double>& times, double t, std::size_t width) {
  if (times.empty()) throw ConfigError("time_stencil: no stored times");
  const double span = std::max(times.back() - times.front(), 1.0);
  const double slack = 1e-12 * span;
  if (t < times.front() - slack || t > times.back() + slack) {
    throw ConfigError("time_stencil: t = " + std::to_string(t) + " outside the stored range");
  }
  const auto it = std::lower_bound(times.begin(), times.end(), t - slack);
  const std::size_t hit = std::size_t(it - times.begin());
  if (hit < times.size() && std::abs(times[hit] - t) <= slack) return {hit, {1.0}};
  const std::size_t w = std::min(width, times.size());
  // times[hit - 1] < t < times[hit]
  const std::size_t left = hit == 0 ? 0 : hit - 1;
  std::size_t first = left >= (w - 1) / 2 ? left - (w - 1) / 2 : 0;
  first = std::min(first, times.size() - w);
  const std::vector<double> nodes(times.begin() + first, times.begin() + first + w);
  return {first, lagrange_weights(nodes, t)};
}

std::vector<double> simpson_weights(const std::vector<double>& t) {
  const std::size_t m = t.size();
  std::vector<double> w(m, 0.0);
  if (m < 2) return w;
  if (m == 2) {
    w[0] = w[1] = 0.5 * (t[1] - t[0]);
    return w;
  }
  const std::size_t intervals = m - 1;
  const std::size_t paired = intervals % 2 == 0 ? intervals : intervals - 1;
  for (std::size_t k = 0; k + 2 <= paired; k += 2) {
    const double h0 = t[k + 1] - t[k];
    const double h1 = t[k + 2] - t[k + 1];
    const double s = (h0 + h1) / 6.0;
    w[k] += s * (2.0 - h1 / h0);
    w[k + 1] += s * (h0 + h1) * (h0 + h1) / (h0 * h1);
    w[k + 2] += s * (2.0 - h0 / h1);
  }
  if (paired < intervals) {
    // last interval: integrate the quadratic through the final three nodes
    const std::size_t k = m - 3;
    const double h0 = t[k + 1] - t[k];
    const double h1 = t[k + 2] - t[k + 1];
    w[k] += -h1 * h1 * h1 / (6.0 * h0 * (h0 + h1));
    w[k + 1] += h1 * (h1 + 3.0 * h0) / (6.0 * h0);
    w[k + 2] += h1 * (2.0 * h1 + 3.0 * h0) / (6.0 * (h0 + h1));
  }
  return w;
}

}  // namespace wkb
