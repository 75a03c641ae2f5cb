#include "emhd/assembly.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace emhd {

namespace {

// P2 shape data at the points of the degree-5 rule.
struct Tabulation {
  std::vector<std::array<double, 6>> phi;
  std::vector<std::array<std::array<double, 3>, 6>> dphi_dlambda;
};

const Tabulation& tabulation() {
  static const Tabulation tab = [] {
    Tabulation t;
    for (const auto& p : triangle_rule_degree5().points) {
      t.phi.push_back(p2_values(p));
      t.dphi_dlambda.push_back(p2_lambda_derivatives(p));
    }
    return t;
  }();
  return tab;
}

std::array<Vec2, 6> gradients_at(const CellGeometry& g, int q) {
  const auto& d = tabulation().dphi_dlambda[q];
  std::array<Vec2, 6> out{};
  for (int a = 0; a < 6; ++a) {
    for (int m = 0; m < 3; ++m) out[a] += d[a][m] * g.grad_lambda[m];
  }
  return out;
}

void require_vector_p2(const FeSpace& s, const char* what) {
  if (s.kind() != SpaceKind::VectorP2) throw std::invalid_argument(std::string(what) + ": expected VectorP2 space");
}

using Local6 = std::array<std::array<double, 6>, 6>;

// Scatters a scalar 6x6 element matrix into both diagonal blocks of the
// componentwise pattern. Rows of the y-block sit exactly nnz/2 after the x-block.
void scatter_componentwise(SparseMatrix& A, std::span<const int> nodes, const Local6& local) {
  const int half = A.nnz() / 2;
  auto values = A.values();
  for (int a = 0; a < 6; ++a) {
    for (int b = 0; b < 6; ++b) {
      const int k = A.find(nodes[a], nodes[b]);
      values[k] += local[a][b];
      values[k + half] += local[a][b];
    }
  }
}

template <class Kernel>
SparseMatrix assemble_componentwise(const FeSpace& space, Kernel&& kernel) {
  SparseMatrix A = space.pattern();
  const auto& rule = triangle_rule_degree5();
  for (int c = 0; c < space.cell_count(); ++c) {
    Local6 local{};
    const CellGeometry& g = space.geometry(c);
    for (int q = 0; q < rule.size(); ++q) kernel(c, q, g.area * rule.weights[q], g, local);
    scatter_componentwise(A, space.cell_nodes(c), local);
  }
  return A;
}

}  // namespace

QuadratureField QuadratureField::constant(int cells, double value, int points_per_cell) {
  QuadratureField f;
  f.points_per_cell = points_per_cell;
  f.values.assign(static_cast<std::size_t>(cells) * points_per_cell, value);
  return f;
}

std::vector<Vec2> quadrature_points(const FeSpace& space) {
  const Mesh& m = space.mesh();
  const auto& rule = triangle_rule_degree5();
  std::vector<Vec2> pts;
  pts.reserve(static_cast<std::size_t>(m.triangle_count()) * rule.size());
  for (const auto& t : m.triangles()) {
    for (const auto& l : rule.points) {
      Vec2 p;
      for (int k = 0; k < 3; ++k) p += l[k] * m.vertices()[t[k]];
      pts.push_back(p);
    }
  }
  return pts;
}

std::vector<Vec2> values_at_quadrature(const FeSpace& space, std::span<const double> coeffs) {
  require_vector_p2(space, "values_at_quadrature");
  const auto& tab = tabulation();
  const int nq = triangle_rule_degree5().size();
  std::vector<Vec2> out(static_cast<std::size_t>(space.cell_count()) * nq);
  for (int c = 0; c < space.cell_count(); ++c) {
    const auto dofs = space.cell_dofs(c);
    for (int q = 0; q < nq; ++q) {
      Vec2 v;
      for (int a = 0; a < 6; ++a) {
        v.x += tab.phi[q][a] * coeffs[dofs[a]];
        v.y += tab.phi[q][a] * coeffs[dofs[6 + a]];
      }
      out[static_cast<std::size_t>(c) * nq + q] = v;
    }
  }
  return out;
}

SparseMatrix assemble_mass(const FeSpace& space) {
  if (space.kind() == SpaceKind::ScalarP1Disc) {
    std::vector<SparseMatrix::Triplet> trips;
    for (int c = 0; c < space.cell_count(); ++c) {
      const double a = space.geometry(c).area;
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) trips.push_back({3 * c + i, 3 * c + j, a * (i == j ? 2.0 : 1.0) / 12.0});
      }
    }
    return SparseMatrix::from_triplets(space.dof_count(), space.dof_count(), trips);
  }
  const auto& tab = tabulation();
  return assemble_componentwise(space, [&](int, int q, double w, const CellGeometry&, Local6& local) {
    const auto& phi = tab.phi[q];
    for (int a = 0; a < 6; ++a) {
      for (int b = 0; b < 6; ++b) local[a][b] += w * phi[a] * phi[b];
    }
  });
}

SparseMatrix assemble_stiffness(const FeSpace& space, const QuadratureField& coeff) {
  require_vector_p2(space, "assemble_stiffness");
  const int nq = triangle_rule_degree5().size();
  if (coeff.points_per_cell != nq || coeff.values.size() != static_cast<std::size_t>(space.cell_count()) * nq) {
    throw std::invalid_argument("assemble_stiffness: coefficient field has the wrong size");
  }
  for (double v : coeff.values) {
    if (!(v >= 0.0)) throw std::invalid_argument("assemble_stiffness: negative or NaN coefficient");
  }
  return assemble_componentwise(space, [&](int c, int q, double w, const CellGeometry& g, Local6& local) {
    const double k = coeff.at(c, q);
    if (k == 0.0) return;
    const auto grad = gradients_at(g, q);
    for (int a = 0; a < 6; ++a) {
      for (int b = 0; b < 6; ++b) local[a][b] += w * k * dot(grad[a], grad[b]);
    }
  });
}

SparseMatrix assemble_stiffness(const FeSpace& space, double coeff) {
  return assemble_stiffness(space, QuadratureField::constant(space.cell_count(), coeff));
}

SparseMatrix assemble_convection(const FeSpace& space, std::span<const double> beta, bool skew) {
  require_vector_p2(space, "assemble_convection");
  if (beta.size() != static_cast<std::size_t>(space.dof_count())) {
    throw std::invalid_argument("assemble_convection: beta has the wrong size");
  }
  const auto& tab = tabulation();
  return assemble_componentwise(space, [&](int c, int q, double w, const CellGeometry& g, Local6& local) {
    const auto dofs = space.cell_dofs(c);
    const auto& phi = tab.phi[q];
    Vec2 b;
    for (int a = 0; a < 6; ++a) {
      b.x += phi[a] * beta[dofs[a]];
      b.y += phi[a] * beta[dofs[6 + a]];
    }
    const auto grad = gradients_at(g, q);
    std::array<double, 6> adv{};
    for (int a = 0; a < 6; ++a) adv[a] = dot(b, grad[a]);
    for (int a = 0; a < 6; ++a) {
      for (int bb = 0; bb < 6; ++bb) {
        local[a][bb] += skew ? 0.5 * w * (adv[bb] * phi[a] - adv[a] * phi[bb]) : w * adv[bb] * phi[a];
      }
    }
  });
}

void apply_convection(const FeSpace& space, std::span<const double> beta, std::span<const double> x,
                      double scale, std::span<double> y) {
  require_vector_p2(space, "apply_convection");
  const auto n = static_cast<std::size_t>(space.dof_count());
  if (beta.size() != n || x.size() != n || y.size() != n) {
    throw std::invalid_argument("apply_convection: size mismatch");
  }
  const auto& tab = tabulation();
  const auto& rule = triangle_rule_degree5();
  for (int c = 0; c < space.cell_count(); ++c) {
    const auto dofs = space.cell_dofs(c);
    const CellGeometry& g = space.geometry(c);
    std::array<double, 12> local{};
    for (int q = 0; q < rule.size(); ++q) {
      const auto& phi = tab.phi[q];
      const auto grad = gradients_at(g, q);
      Vec2 b;
      Mat2 gx;
      for (int a = 0; a < 6; ++a) {
        b.x += phi[a] * beta[dofs[a]];
        b.y += phi[a] * beta[dofs[6 + a]];
        const double ux = x[dofs[a]], uy = x[dofs[6 + a]];
        gx.xx += ux * grad[a].x;
        gx.xy += ux * grad[a].y;
        gx.yx += uy * grad[a].x;
        gx.yy += uy * grad[a].y;
      }
      const double w = scale * g.area * rule.weights[q];
      const double cx = w * (b.x * gx.xx + b.y * gx.xy);
      const double cy = w * (b.x * gx.yx + b.y * gx.yy);
      for (int a = 0; a < 6; ++a) {
        local[a] += cx * phi[a];
        local[6 + a] += cy * phi[a];
      }
    }
    for (int a = 0; a < 12; ++a) y[dofs[a]] += local[a];
  }
}

SparseMatrix assemble_divergence(const FeSpace& vel, const FeSpace& pres) {
  require_vector_p2(vel, "assemble_divergence");
  if (pres.kind() != SpaceKind::ScalarP1Disc || vel.mesh_ptr() != pres.mesh_ptr()) {
    throw std::invalid_argument("assemble_divergence: expected ScalarP1Disc on the same mesh");
  }
  const auto& rule = triangle_rule_degree5();
  std::vector<SparseMatrix::Triplet> trips;
  trips.reserve(static_cast<std::size_t>(vel.cell_count()) * 36);
  for (int c = 0; c < vel.cell_count(); ++c) {
    const auto vdofs = vel.cell_dofs(c);
    const CellGeometry& g = vel.geometry(c);
    std::array<std::array<double, 12>, 3> local{};
    for (int q = 0; q < rule.size(); ++q) {
      const auto grad = gradients_at(g, q);
      const double w = g.area * rule.weights[q];
      for (int p = 0; p < 3; ++p) {
        const double rho = rule.points[q][p];
        for (int a = 0; a < 6; ++a) {
          local[p][a] += w * rho * grad[a].x;
          local[p][6 + a] += w * rho * grad[a].y;
        }
      }
    }
    for (int p = 0; p < 3; ++p) {
      for (int a = 0; a < 12; ++a) trips.push_back({3 * c + p, vdofs[a], local[p][a]});
    }
  }
  return SparseMatrix::from_triplets(pres.dof_count(), vel.dof_count(), trips);
}

std::vector<double> assemble_load(const FeSpace& space, const VectorFunction& f) {
  require_vector_p2(space, "assemble_load");
  const auto& tab = tabulation();
  const auto& rule = triangle_rule_degree5();
  const auto pts = quadrature_points(space);
  std::vector<double> b(static_cast<std::size_t>(space.dof_count()), 0.0);
  for (int c = 0; c < space.cell_count(); ++c) {
    const auto dofs = space.cell_dofs(c);
    const double area = space.geometry(c).area;
    for (int q = 0; q < rule.size(); ++q) {
      const Vec2& p = pts[static_cast<std::size_t>(c) * rule.size() + q];
      const Vec2 fv = f(p.x, p.y);
      const double w = area * rule.weights[q];
      for (int a = 0; a < 6; ++a) {
        b[dofs[a]] += w * fv.x * tab.phi[q][a];
        b[dofs[6 + a]] += w * fv.y * tab.phi[q][a];
      }
    }
  }
  return b;
}

double norm_l2(const FeSpace& space, std::span<const double> coeffs) {
  if (coeffs.size() != static_cast<std::size_t>(space.dof_count())) {
    throw std::invalid_argument("norm_l2: coefficient vector has the wrong size");
  }
  const auto& rule = triangle_rule_degree5();
  double s = 0.0;
  if (space.kind() == SpaceKind::ScalarP1Disc) {
    for (int c = 0; c < space.cell_count(); ++c) {
      const double* u = coeffs.data() + 3 * c;
      for (int q = 0; q < rule.size(); ++q) {
        const auto& l = rule.points[q];
        const double v = l[0] * u[0] + l[1] * u[1] + l[2] * u[2];
        s += space.geometry(c).area * rule.weights[q] * v * v;
      }
    }
    return std::sqrt(s);
  }
  const auto vals = values_at_quadrature(space, coeffs);
  for (int c = 0; c < space.cell_count(); ++c) {
    for (int q = 0; q < rule.size(); ++q) {
      s += space.geometry(c).area * rule.weights[q] * dot(vals[static_cast<std::size_t>(c) * rule.size() + q],
                                                          vals[static_cast<std::size_t>(c) * rule.size() + q]);
    }
  }
  return std::sqrt(s);
}

double h1_seminorm(const FeSpace& space, std::span<const double> coeffs) {
  require_vector_p2(space, "h1_seminorm");
  const auto& rule = triangle_rule_degree5();
  double s = 0.0;
  for (int c = 0; c < space.cell_count(); ++c) {
    const auto dofs = space.cell_dofs(c);
    const CellGeometry& g = space.geometry(c);
    for (int q = 0; q < rule.size(); ++q) {
      const auto grad = gradients_at(g, q);
      Mat2 m;
      for (int a = 0; a < 6; ++a) {
        m.xx += coeffs[dofs[a]] * grad[a].x;
        m.xy += coeffs[dofs[a]] * grad[a].y;
        m.yx += coeffs[dofs[6 + a]] * grad[a].x;
        m.yy += coeffs[dofs[6 + a]] * grad[a].y;
      }
      s += g.area * rule.weights[q] * frobenius_sq(m);
    }
  }
  return std::sqrt(s);
}

double norm_h1(const FeSpace& space, std::span<const double> coeffs) {
  const double l2 = norm_l2(space, coeffs);
  const double semi = h1_seminorm(space, coeffs);
  return std::sqrt(l2 * l2 + semi * semi);
}

double divergence_l2(const FeSpace& space, std::span<const double> coeffs) {
  require_vector_p2(space, "divergence_l2");
  const auto& rule = triangle_rule_degree5();
  double s = 0.0;
  for (int c = 0; c < space.cell_count(); ++c) {
    const auto dofs = space.cell_dofs(c);
    const CellGeometry& g = space.geometry(c);
    for (int q = 0; q < rule.size(); ++q) {
      const auto grad = gradients_at(g, q);
      double div = 0.0;
      for (int a = 0; a < 6; ++a) div += coeffs[dofs[a]] * grad[a].x + coeffs[dofs[6 + a]] * grad[a].y;
      s += g.area * rule.weights[q] * div * div;
    }
  }
  return std::sqrt(s);
}

double integral(const FeSpace& pres, std::span<const double> coeffs) {
  if (pres.kind() != SpaceKind::ScalarP1Disc) throw std::invalid_argument("integral: expected ScalarP1Disc");
  double s = 0.0;
  for (int c = 0; c < pres.cell_count(); ++c) {
    s += pres.geometry(c).area * (coeffs[3 * c] + coeffs[3 * c + 1] + coeffs[3 * c + 2]) / 3.0;
  }
  return s;
}

ErrorParts error_against(const FeSpace& space, std::span<const double> coeffs, const VectorFunction& u,
                         const GradientFunction& grad_u) {
  require_vector_p2(space, "error_against");
  const auto& tab = tabulation();
  const auto& rule = triangle_rule_degree5();
  const auto pts = quadrature_points(space);
  ErrorParts e;
  for (int c = 0; c < space.cell_count(); ++c) {
    const auto dofs = space.cell_dofs(c);
    const CellGeometry& g = space.geometry(c);
    for (int q = 0; q < rule.size(); ++q) {
      const Vec2& p = pts[static_cast<std::size_t>(c) * rule.size() + q];
      const auto grad = gradients_at(g, q);
      Vec2 v;
      Mat2 m;
      for (int a = 0; a < 6; ++a) {
        const double ux = coeffs[dofs[a]], uy = coeffs[dofs[6 + a]];
        v.x += tab.phi[q][a] * ux;
        v.y += tab.phi[q][a] * uy;
        m.xx += ux * grad[a].x;
        m.xy += ux * grad[a].y;
        m.yx += uy * grad[a].x;
        m.yy += uy * grad[a].y;
      }
      const Vec2 ue = u(p.x, p.y);
      const Mat2 ge = grad_u(p.x, p.y);
      const Vec2 dv = v - ue;
      const Mat2 dm{m.xx - ge.xx, m.xy - ge.xy, m.yx - ge.yx, m.yy - ge.yy};
      const double w = g.area * rule.weights[q];
      e.l2_sq += w * dot(dv, dv);
      e.h1_semi_sq += w * frobenius_sq(dm);
    }
  }
  return e;
}

}  // namespace emhd
