#include "emhd/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <stdexcept>
#include <utility>

namespace emhd {

std::string to_string(BoundaryMarker m) {
  switch (m) {
    case BoundaryMarker::All: return "all";
    case BoundaryMarker::Lid: return "lid";
    case BoundaryMarker::Wall: return "wall";
    case BoundaryMarker::Inlet: return "inlet";
    case BoundaryMarker::Outlet: return "outlet";
  }
  return "unknown";
}

namespace {

using EdgeKey = std::pair<int, int>;

EdgeKey make_key(int a, int b) { return a < b ? EdgeKey{a, b} : EdgeKey{b, a}; }

std::map<EdgeKey, int> count_edge_owners(const std::vector<std::array<int, 3>>& tris) {
  std::map<EdgeKey, int> owners;
  for (const auto& t : tris) {
    for (int k = 0; k < 3; ++k) ++owners[make_key(t[k], t[(k + 1) % 3])];
  }
  return owners;
}

// Grid coordinate i of n over [a, b], exact at both ends.
double lerp_grid(double a, double b, int i, int n) {
  return (a * static_cast<double>(n - i) + b * static_cast<double>(i)) / static_cast<double>(n);
}

// Breakpoints covering consecutive segments, each split into pieces of size <= h.
std::vector<double> graded_axis(const std::vector<double>& knots, double h) {
  std::vector<double> xs{knots.front()};
  for (std::size_t s = 0; s + 1 < knots.size(); ++s) {
    const double a = knots[s], b = knots[s + 1];
    const int pieces = std::max(1, static_cast<int>(std::ceil((b - a) / h - 1e-12)));
    for (int i = 1; i <= pieces; ++i) xs.push_back(lerp_grid(a, b, i, pieces));
  }
  return xs;
}

}  // namespace

Mesh::Mesh(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles,
           std::vector<BoundaryEdge> boundary_edges, double nominal_h)
    : vertices_(std::move(vertices)),
      triangles_(std::move(triangles)),
      boundary_edges_(std::move(boundary_edges)),
      nominal_h_(nominal_h) {}

double Mesh::signed_area(int t) const {
  const auto& tri = triangles_[static_cast<std::size_t>(t)];
  return 0.5 * signed_area2(vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]);
}

double Mesh::total_area() const {
  // Compensated (Neumaier) summation keeps the total exact to a few ulps on
  // meshes with many small cells.
  double sum = 0.0, carry = 0.0;
  for (int t = 0; t < triangle_count(); ++t) {
    const double a = signed_area(t);
    const double next = sum + a;
    carry += std::abs(sum) >= std::abs(a) ? (sum - next) + a : (a - next) + sum;
    sum = next;
  }
  return sum + carry;
}

double Mesh::max_diameter() const {
  double d = 0.0;
  for (const auto& t : triangles_) {
    for (int k = 0; k < 3; ++k) d = std::max(d, norm(vertices_[t[k]] - vertices_[t[(k + 1) % 3]]));
  }
  return d;
}

void Mesh::validate() const {
  const int nv = vertex_count();
  for (int t = 0; t < triangle_count(); ++t) {
    for (int v : triangles_[static_cast<std::size_t>(t)]) {
      if (v < 0 || v >= nv) throw std::invalid_argument("mesh: triangle references missing vertex");
    }
    if (!(signed_area(t) > 0.0)) {
      throw std::invalid_argument("mesh: triangle " + std::to_string(t) + " is not counter-clockwise");
    }
  }
  auto owners = count_edge_owners(triangles_);
  std::map<EdgeKey, int> boundary;
  for (const auto& e : boundary_edges_) ++boundary[make_key(e.vertices[0], e.vertices[1])];
  for (const auto& [key, n] : boundary) {
    auto it = owners.find(key);
    if (n != 1 || it == owners.end() || it->second != 1) {
      throw std::invalid_argument("mesh: boundary edge not owned by exactly one triangle");
    }
  }
  for (const auto& [key, n] : owners) {
    if (n > 2) throw std::invalid_argument("mesh: edge shared by more than two triangles");
    // An edge with a single owner that is not a listed boundary edge is either
    // a missing marker or a hanging vertex on the neighbouring side.
    if (n == 1 && !boundary.contains(key)) {
      throw std::invalid_argument("mesh: unmarked free edge (hanging vertex or missing boundary edge)");
    }
  }
}

Mesh build_structured_square(int n, const Box& box, SquareMarking marking) {
  if (n < 1) throw std::invalid_argument("build_structured_square: n must be >= 1");
  if (!(box.x1 > box.x0) || !(box.y1 > box.y0)) {
    throw std::invalid_argument("build_structured_square: empty box");
  }
  const int stride = n + 1;
  std::vector<Vec2> verts;
  verts.reserve(static_cast<std::size_t>(stride * stride));
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      verts.push_back({lerp_grid(box.x0, box.x1, i, n), lerp_grid(box.y0, box.y1, j, n)});
    }
  }
  auto id = [stride](int i, int j) { return j * stride + i; };
  std::vector<std::array<int, 3>> tris;
  tris.reserve(static_cast<std::size_t>(2 * n * n));
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
      tris.push_back({a, b, c});
      tris.push_back({a, c, d});
    }
  }
  const bool lid = marking == SquareMarking::LidDriven;
  const BoundaryMarker side = lid ? BoundaryMarker::Wall : BoundaryMarker::All;
  const BoundaryMarker top = lid ? BoundaryMarker::Lid : BoundaryMarker::All;
  std::vector<BoundaryEdge> bedges;
  for (int i = 0; i < n; ++i) {
    bedges.push_back({{id(i, 0), id(i + 1, 0)}, side});
    bedges.push_back({{id(n, i), id(n, i + 1)}, side});
    bedges.push_back({{id(i + 1, n), id(i, n)}, top});
    bedges.push_back({{id(0, i + 1), id(0, i)}, side});
  }
  const double h = std::max(box.x1 - box.x0, box.y1 - box.y0) / n;
  return Mesh(std::move(verts), std::move(tris), std::move(bedges), h);
}

Mesh barycentric_refine(const Mesh& m) {
  std::vector<Vec2> verts = m.vertices();
  std::vector<std::array<int, 3>> tris;
  tris.reserve(3 * m.triangles().size());
  for (const auto& t : m.triangles()) {
    const Vec2& a = verts[t[0]];
    const Vec2& b = verts[t[1]];
    const Vec2& c = verts[t[2]];
    const int g = static_cast<int>(verts.size());
    verts.push_back({(a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0});
    tris.push_back({t[0], t[1], g});
    tris.push_back({t[1], t[2], g});
    tris.push_back({t[2], t[0], g});
  }
  return Mesh(std::move(verts), std::move(tris), m.boundary_edges(), m.nominal_h());
}

Mesh build_step_channel(double h_target) {
  if (!(h_target > 0.0) || !(h_target < 1.0)) {
    throw std::invalid_argument("build_step_channel: h_target must lie in (0, 1) to resolve the unit step");
  }
  const auto xs = graded_axis({0.0, kStepX0, kStepX1, kChannelLength}, h_target);
  const auto ys = graded_axis({0.0, kStepHeight, kChannelHeight}, h_target);
  const int nx = static_cast<int>(xs.size()) - 1;
  const int ny = static_cast<int>(ys.size()) - 1;

  auto in_step = [&](int i, int j) {
    const double xc = 0.5 * (xs[i] + xs[i + 1]);
    const double yc = 0.5 * (ys[j] + ys[j + 1]);
    return xc > kStepX0 && xc < kStepX1 && yc < kStepHeight;
  };

  std::vector<int> ids(static_cast<std::size_t>((nx + 1) * (ny + 1)), -1);
  std::vector<Vec2> verts;
  auto vertex = [&](int i, int j) {
    int& slot = ids[static_cast<std::size_t>(j * (nx + 1) + i)];
    if (slot < 0) {
      slot = static_cast<int>(verts.size());
      verts.push_back({xs[i], ys[j]});
    }
    return slot;
  };

  std::vector<std::array<int, 3>> tris;
  double h = 0.0;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      if (in_step(i, j)) continue;
      h = std::max({h, xs[i + 1] - xs[i], ys[j + 1] - ys[j]});
      const int a = vertex(i, j), b = vertex(i + 1, j), c = vertex(i + 1, j + 1), d = vertex(i, j + 1);
      tris.push_back({a, b, c});
      tris.push_back({a, c, d});
    }
  }

  std::vector<BoundaryEdge> bedges;
  const auto owners = count_edge_owners(tris);
  for (const auto& t : tris) {
    for (int k = 0; k < 3; ++k) {
      const int a = t[k], b = t[(k + 1) % 3];
      if (owners.at(make_key(a, b)) != 1) continue;
      BoundaryMarker marker = BoundaryMarker::Wall;
      if (verts[a].x == 0.0 && verts[b].x == 0.0) marker = BoundaryMarker::Inlet;
      if (verts[a].x == kChannelLength && verts[b].x == kChannelLength) marker = BoundaryMarker::Outlet;
      bedges.push_back({{a, b}, marker});
    }
  }
  return Mesh(std::move(verts), std::move(tris), std::move(bedges), h);
}

void write_vtk(std::ostream& os, const Mesh& m) {
  os << "# vtk DataFile Version 3.0\nmesh\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << m.vertex_count() << " double\n";
  os.precision(17);
  for (const auto& v : m.vertices()) os << v.x << ' ' << v.y << " 0\n";
  os << "CELLS " << m.triangle_count() << ' ' << 4 * m.triangle_count() << '\n';
  for (const auto& t : m.triangles()) os << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  os << "CELL_TYPES " << m.triangle_count() << '\n';
  for (int t = 0; t < m.triangle_count(); ++t) os << "5\n";
}

}  // namespace emhd
