#pragma once

#include <cstddef>
#include <vector>

namespace wkb {

/// Lagrange basis values at t for the given nodes.
std::vector<double> lagrange_weights(const std::vector<double>& nodes, double t);

/// Derivatives of the Lagrange basis at t.
std::vector<double> lagrange_derivative_weights(const std::vector<double>& nodes, double t);

struct TimeStencil {
  std::size_t first = 0;
  std::vector<double> weights;
};

/// Up to `width` consecutive nodes around t with their interpolation weights.
/// A t that coincides with a node yields that node alone.
TimeStencil time_stencil(const std::vector<double>& times, double t, std::size_t width);

/// Composite Simpson weights on uniformly or non-uniformly spaced nodes
/// t_0 < ... < t_m; a trailing odd interval uses the quadratic through the
/// last three nodes.
std::vector<double> simpson_weights(const std::vector<double>& nodes);

}  // namespace wkb
