#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "emhd/geometry.hpp"

namespace emhd {

enum class BoundaryMarker { All, Lid, Wall, Inlet, Outlet };

std::string to_string(BoundaryMarker m);

struct BoundaryEdge {
  std::array<int, 2> vertices;
  BoundaryMarker marker = BoundaryMarker::All;
};

/// Axis-aligned rectangle [x0, x1] x [y0, y1].
struct Box {
  double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
};

/// How the boundary of a structured square is tagged.
enum class SquareMarking {
  All,       // every boundary edge carries All
  LidDriven  // top edge Lid, the other three Wall
};

/// Conforming 2D triangulation. Triangles are stored counter-clockwise.
/// Immutable once built; the generators below are the only producers.
class Mesh {
 public:
  Mesh() = default;
  Mesh(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles,
       std::vector<BoundaryEdge> boundary_edges, double nominal_h);

  const std::vector<Vec2>& vertices() const { return vertices_; }
  const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
  const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_edges_; }

  int vertex_count() const { return static_cast<int>(vertices_.size()); }
  int triangle_count() const { return static_cast<int>(triangles_.size()); }

  /// Mesh size of the generating grid (side length / subdivisions). Kept
  /// unchanged by barycentric refinement so that tables report the generating-grid h.
  double nominal_h() const { return nominal_h_; }

  double signed_area(int t) const;
  double total_area() const;
  double max_diameter() const;

  /// Throws std::invalid_argument when an invariant is broken: nonpositive
  /// orientation, a boundary edge not owned by exactly one triangle, an
  /// interior edge with other than two triangles, or a hanging vertex.
  void validate() const;

 private:
  std::vector<Vec2> vertices_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<BoundaryEdge> boundary_edges_;
  double nominal_h_ = 0.0;
};

/// n x n grid of cells over `box`, each split along the lower-left to
/// upper-right diagonal: 2n^2 triangles.
Mesh build_structured_square(int n, const Box& box = {},
                             SquareMarking marking = SquareMarking::All);

/// Splits every triangle into three at its barycenter.
Mesh barycentric_refine(const Mesh& m);

/// Channel [0, 40] x [0, 10] minus the unit step [5, 6] x [0, 1].
/// x = 0 is Inlet, x = 40 is Outlet, everything else Wall. Cell sizes are
/// at most h_target in each direction; h_target must be in (0, 1).
Mesh build_step_channel(double h_target);

inline constexpr double kChannelLength = 40.0;
inline constexpr double kChannelHeight = 10.0;
inline constexpr double kStepX0 = 5.0;
inline constexpr double kStepX1 = 6.0;
inline constexpr double kStepHeight = 1.0;

/// Legacy VTK ASCII unstructured grid (POINTS/CELLS only).
void write_vtk(std::ostream& os, const Mesh& m);

}  // namespace emhd
