#pragma once

#include <array>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "emhd/geometry.hpp"
#include "emhd/mesh.hpp"
#include "emhd/sparse_matrix.hpp"

namespace emhd {

enum class SpaceKind { VectorP2, ScalarP1Disc };

/// Per-triangle affine data: area and the constant gradients of the three
/// barycentric coordinates.
struct CellGeometry {
  double area = 0.0;
  std::array<Vec2, 3> grad_lambda{};
};

CellGeometry cell_geometry(const Vec2& a, const Vec2& b, const Vec2& c);

/// Quadratic Lagrange shape functions in barycentric coordinates.
/// Local node order: vertices 0, 1, 2, then the midpoints of the edges
/// opposite vertex 0 (1-2), vertex 1 (2-0) and vertex 2 (0-1).
std::array<double, 6> p2_values(const std::array<double, 3>& lambda);
/// d(phi_a) / d(lambda_m), indexed [a][m].
std::array<std::array<double, 3>, 6> p2_lambda_derivatives(const std::array<double, 3>& lambda);
std::array<Vec2, 6> p2_gradients(const CellGeometry& g, const std::array<double, 3>& lambda);

/// Finite-element space on a shared, immutable mesh.
///
/// VectorP2 (continuous, two components): scalar nodes are the mesh vertices
/// followed by one midpoint per edge; global dof of component k at node i is
/// k * node_count() + i. The 12 local dofs of a cell are the x-components of
/// its six local nodes followed by the y-components.
///
/// ScalarP1Disc (discontinuous linear): cell c owns dofs 3c, 3c+1, 3c+2, the
/// nodal values at its vertices in triangle order.
class FeSpace {
 public:
  static FeSpace vector_p2(std::shared_ptr<const Mesh> mesh);
  static FeSpace scalar_p1_disc(std::shared_ptr<const Mesh> mesh);

  SpaceKind kind() const { return kind_; }
  const Mesh& mesh() const { return *mesh_; }
  const std::shared_ptr<const Mesh>& mesh_ptr() const { return mesh_; }
  int cell_count() const { return mesh_->triangle_count(); }
  int dof_count() const { return dof_count_; }
  int dofs_per_cell() const { return kind_ == SpaceKind::VectorP2 ? 12 : 3; }
  std::span<const int> cell_dofs(int c) const;
  const CellGeometry& geometry(int c) const { return geometry_[static_cast<std::size_t>(c)]; }

  // VectorP2 only.
  int node_count() const { return static_cast<int>(nodes_.size()); }
  const std::vector<Vec2>& nodes() const { return nodes_; }
  std::span<const int> cell_nodes(int c) const;
  const std::vector<int>& boundary_nodes() const { return boundary_nodes_; }
  /// Both components of every boundary node, x-block first.
  std::vector<int> boundary_dofs() const;
  /// Componentwise (x-x and y-y blocks) pattern shared by all velocity operators.
  const SparseMatrix& pattern() const { return *pattern_; }

 private:
  FeSpace() = default;

  SpaceKind kind_ = SpaceKind::VectorP2;
  std::shared_ptr<const Mesh> mesh_;
  int dof_count_ = 0;
  std::vector<int> cell_dofs_;
  std::vector<CellGeometry> geometry_;
  std::vector<Vec2> nodes_;
  std::vector<int> cell_nodes_;
  std::vector<int> boundary_nodes_;
  std::shared_ptr<const SparseMatrix> pattern_;
};

using VectorFunction = std::function<Vec2(double x, double y)>;
using ScalarFunction = std::function<double(double x, double y)>;

/// Nodal interpolant: P2 values at vertices and edge midpoints, P1-disc values
/// at each cell's vertices.
std::vector<double> interpolate(const FeSpace& space, const VectorFunction& f);
std::vector<double> interpolate(const FeSpace& space, const ScalarFunction& f);

/// Point evaluation of a VectorP2 field inside cell c.
Vec2 evaluate(const FeSpace& space, std::span<const double> coeffs, int c,
              const std::array<double, 3>& lambda);
Mat2 evaluate_gradient(const FeSpace& space, std::span<const double> coeffs, int c,
                       const std::array<double, 3>& lambda);

}  // namespace emhd
