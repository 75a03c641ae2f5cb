#pragma once

#include <functional>
#include <span>
#include <vector>

#include "emhd/fe_space.hpp"
#include "emhd/quadrature.hpp"
#include "emhd/sparse_matrix.hpp"

namespace emhd {

/// One value per (cell, point) of triangle_rule_degree5(), cell-major.
struct QuadratureField {
  std::vector<double> values;
  int points_per_cell = 7;

  static QuadratureField constant(int cells, double value, int points_per_cell = 7);
  double at(int cell, int q) const {
    return values[static_cast<std::size_t>(cell) * points_per_cell + q];
  }
};

/// Physical coordinates of every quadrature point, cell-major.
std::vector<Vec2> quadrature_points(const FeSpace& space);
/// Values of a VectorP2 field at every quadrature point, cell-major.
std::vector<Vec2> values_at_quadrature(const FeSpace& space, std::span<const double> coeffs);

/// M_ab = (phi_a, phi_b). VectorP2 result uses space.pattern().
SparseMatrix assemble_mass(const FeSpace& space);

/// K_ab = (coeff grad phi_a, grad phi_b) on VectorP2. Throws
/// std::invalid_argument if the coefficient is negative anywhere.
SparseMatrix assemble_stiffness(const FeSpace& space, const QuadratureField& coeff);
SparseMatrix assemble_stiffness(const FeSpace& space, double coeff = 1.0);

/// N(beta)_ab = ((beta . grad) phi_b, phi_a); rows are test functions.
/// With skew = true the form 1/2[(beta.grad u, v) - (beta.grad v, u)] is used.
SparseMatrix assemble_convection(const FeSpace& space, std::span<const double> beta, bool skew = false);

/// y += scale * N(beta) x without forming the matrix.
void apply_convection(const FeSpace& space, std::span<const double> beta, std::span<const double> x,
                      double scale, std::span<double> y);

/// B_pa = (rho_p, div phi_a): rows are pressure dofs, columns velocity dofs.
SparseMatrix assemble_divergence(const FeSpace& vel, const FeSpace& pres);

/// b_a = (f, phi_a) with the degree-5 rule.
std::vector<double> assemble_load(const FeSpace& space, const VectorFunction& f);

// Norms. norm_l2 accepts both space kinds; the others need VectorP2.
double norm_l2(const FeSpace& space, std::span<const double> coeffs);
double h1_seminorm(const FeSpace& space, std::span<const double> coeffs);
double norm_h1(const FeSpace& space, std::span<const double> coeffs);
double divergence_l2(const FeSpace& space, std::span<const double> coeffs);

/// Integral of a P1-disc field.
double integral(const FeSpace& pres, std::span<const double> coeffs);

using GradientFunction = std::function<Mat2(double x, double y)>;

/// Squared L2 and H1-seminorm errors of a VectorP2 field against an analytic
/// field, integrated with the degree-5 rule.
struct ErrorParts {
  double l2_sq = 0.0;
  double h1_semi_sq = 0.0;
  double h1_sq() const { return l2_sq + h1_semi_sq; }
};
ErrorParts error_against(const FeSpace& space, std::span<const double> coeffs, const VectorFunction& u,
                         const GradientFunction& grad_u);

}  // namespace emhd
