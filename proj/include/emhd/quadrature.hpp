#pragma once

#include <array>
#include <vector>

namespace emhd {

/// Quadrature on the reference triangle in barycentric coordinates.
/// Weights are normalized to sum to one, so a physical integral is
/// area * sum_q w_q f(x_q).
struct QuadratureRule {
  std::vector<std::array<double, 3>> points;
  std::vector<double> weights;
  int degree = 0;

  int size() const { return static_cast<int>(weights.size()); }
};

/// Symmetric 7-point rule, exact for total degree <= 5.
const QuadratureRule& triangle_rule_degree5();

}  // namespace emhd
