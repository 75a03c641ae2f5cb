#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "emhd/mesh.hpp"

using namespace emhd;

namespace {

bool has_vertex(const Mesh& m, Vec2 p) {
  return std::any_of(m.vertices().begin(), m.vertices().end(),
                     [&](const Vec2& v) { return std::abs(v.x - p.x) < 1e-14 && std::abs(v.y - p.y) < 1e-14; });
}

// Distance from p to the segment [a, b].
double segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 d = b - a;
  const double t = std::clamp(dot(p - a, d) / dot(d, d), 0.0, 1.0);
  return norm(p - (a + d * t));
}

double polygon_distance(Vec2 p, const std::vector<Vec2>& poly) {
  double best = 1e300;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    best = std::min(best, segment_distance(p, poly[i], poly[(i + 1) % poly.size()]));
  }
  return best;
}

const std::vector<Vec2> kChannelPolygon{{0, 0}, {5, 0}, {5, 1}, {6, 1}, {6, 0}, {40, 0}, {40, 10}, {0, 10}};

}  // namespace

TEST_CASE("structured square counts and spacing") {
  const Mesh m1 = build_structured_square(1);
  CHECK(m1.triangle_count() == 2);
  CHECK(m1.vertex_count() == 4);

  const Mesh m4 = build_structured_square(4);
  CHECK(m4.triangle_count() == 32);
  CHECK(m4.nominal_h() == doctest::Approx(0.25));

  const Mesh m2 = build_structured_square(2, Box{-1.0, 1.0, -1.0, 1.0});
  CHECK(m2.triangle_count() == 8);
  CHECK(m2.nominal_h() == doctest::Approx(1.0));
  CHECK(m2.total_area() == doctest::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("structured square rejects nonpositive subdivisions") {
  CHECK_THROWS_AS(build_structured_square(0), std::invalid_argument);
  CHECK_THROWS_AS(build_structured_square(-3), std::invalid_argument);
}

TEST_CASE("structured square splits every cell along the rising diagonal") {
  const Mesh m = build_structured_square(3);
  for (const auto& t : m.triangles()) {
    // The diagonal of each cell joins its lower-left and upper-right corners,
    // so every triangle has one edge with slope +1 and none with slope -1.
    int rising = 0, falling = 0;
    for (int e = 0; e < 3; ++e) {
      const Vec2 a = m.vertices()[t[e]], b = m.vertices()[t[(e + 1) % 3]];
      const Vec2 d = b - a;
      if (std::abs(d.x) > 1e-14 && std::abs(d.y) > 1e-14) (d.x * d.y > 0 ? rising : falling)++;
    }
    CHECK(rising == 1);
    CHECK(falling == 0);
  }
}

TEST_CASE("every generated mesh is positively oriented and conforming") {
  const std::vector<Mesh> meshes{build_structured_square(1), build_structured_square(5),
                                 barycentric_refine(build_structured_square(3)), build_step_channel(0.9),
                                 barycentric_refine(build_step_channel(0.5))};
  for (const Mesh& m : meshes) {
    CHECK_NOTHROW(m.validate());
    for (int t = 0; t < m.triangle_count(); ++t) CHECK(m.signed_area(t) > 0.0);
  }
}

TEST_CASE("every boundary edge belongs to exactly one triangle") {
  const Mesh m = barycentric_refine(build_step_channel(0.5));
  std::map<std::pair<int, int>, int> owners;
  for (const auto& t : m.triangles()) {
    for (int e = 0; e < 3; ++e) owners[std::minmax(t[e], t[(e + 1) % 3])]++;
  }
  for (const auto& be : m.boundary_edges()) {
    CHECK(owners.at(std::minmax(be.vertices[0], be.vertices[1])) == 1);
  }
  // Edges owned by a single triangle are exactly the boundary edges.
  std::size_t single = 0;
  for (const auto& [edge, n] : owners) single += n == 1;
  CHECK(single == m.boundary_edges().size());
}

TEST_CASE("validate rejects a clockwise triangle") {
  std::vector<Vec2> v{{0, 0}, {1, 0}, {0, 1}};
  std::vector<BoundaryEdge> be{{{0, 1}}, {{1, 2}}, {{2, 0}}};
  const Mesh cw(v, {{0, 2, 1}}, be, 1.0);
  CHECK_THROWS_AS(cw.validate(), std::invalid_argument);
  const Mesh ccw(v, {{0, 1, 2}}, be, 1.0);
  CHECK_NOTHROW(ccw.validate());
}

TEST_CASE("validate rejects a hanging vertex") {
  // The upper-left half is split at the diagonal midpoint (0.5, 0.5) while
  // the lower-right triangle keeps the whole diagonal.
  std::vector<Vec2> v{{0, 0}, {0.5, 0.5}, {0, 1}, {1, 0}, {1, 1}};
  std::vector<std::array<int, 3>> t{{0, 1, 2}, {1, 4, 2}, {0, 3, 4}};
  std::vector<BoundaryEdge> be{{{0, 3}}, {{3, 4}}, {{4, 2}}, {{2, 0}}};
  const Mesh bad(v, t, be, 1.0);
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("barycentric refinement of the two-triangle square") {
  const Mesh parent = build_structured_square(1);
  const Mesh child = barycentric_refine(parent);
  CHECK(child.triangle_count() == 6);
  CHECK(child.vertex_count() == 6);
  for (int t = 0; t < child.triangle_count(); ++t) {
    CHECK(child.signed_area(t) == doctest::Approx(parent.signed_area(t / 3) / 3.0).epsilon(1e-14));
  }
  CHECK(child.boundary_edges().size() == parent.boundary_edges().size());
}

TEST_CASE("barycentric refinement triples triangles and keeps area") {
  const Mesh m4 = build_structured_square(4);
  const Mesh r4 = barycentric_refine(m4);
  CHECK(r4.triangle_count() == 96);
  CHECK(std::abs(r4.total_area() - 1.0) <= 1e-14);
  CHECK(r4.nominal_h() == m4.nominal_h());

  const Mesh ch = build_step_channel(0.5);
  const Mesh rc = barycentric_refine(ch);
  CHECK(rc.triangle_count() == 3 * ch.triangle_count());
  CHECK(std::abs(rc.total_area() - ch.total_area()) <= 1e-13 * ch.total_area());
}

TEST_CASE("barycentric refinement keeps boundary edges and markers") {
  const Mesh parent = build_structured_square(3, Box{-1, 1, -1, 1}, SquareMarking::LidDriven);
  const Mesh child = barycentric_refine(parent);
  REQUIRE(child.boundary_edges().size() == parent.boundary_edges().size());
  std::multiset<std::tuple<double, double, double, double, int>> a, b;
  auto key = [](const Mesh& m, const BoundaryEdge& e) {
    Vec2 p = m.vertices()[e.vertices[0]], q = m.vertices()[e.vertices[1]];
    if (std::tie(q.x, q.y) < std::tie(p.x, p.y)) std::swap(p, q);
    return std::make_tuple(p.x, p.y, q.x, q.y, static_cast<int>(e.marker));
  };
  for (const auto& e : parent.boundary_edges()) a.insert(key(parent, e));
  for (const auto& e : child.boundary_edges()) b.insert(key(child, e));
  CHECK(a == b);
}

TEST_CASE("lid-driven marking tags the top edge") {
  const Mesh m = build_structured_square(4, Box{-1, 1, -1, 1}, SquareMarking::LidDriven);
  int lid = 0;
  for (const auto& e : m.boundary_edges()) {
    const double y0 = m.vertices()[e.vertices[0]].y, y1 = m.vertices()[e.vertices[1]].y;
    const bool top = y0 == 1.0 && y1 == 1.0;
    CHECK((e.marker == BoundaryMarker::Lid) == top);
    if (!top) CHECK(e.marker == BoundaryMarker::Wall);
    lid += top;
  }
  CHECK(lid == 4);
}

TEST_CASE("step channel geometry") {
  for (double h : {0.9, 0.5, 0.3}) {
    CAPTURE(h);
    const Mesh m = build_step_channel(h);
    CHECK(m.total_area() == doctest::Approx(399.0).epsilon(1e-13));
    for (Vec2 p : {Vec2{5, 0}, Vec2{5, 1}, Vec2{6, 1}, Vec2{6, 0}}) CHECK(has_vertex(m, p));
    CHECK(m.max_diameter() <= 2.0 * h + 1e-12);
    for (const auto& e : m.boundary_edges()) {
      for (int v : e.vertices) CHECK(polygon_distance(m.vertices()[v], kChannelPolygon) <= 1e-12);
    }
  }
}

TEST_CASE("step channel markers follow the inlet, outlet and wall rule") {
  const Mesh m = build_step_channel(0.5);
  int inlet = 0, outlet = 0;
  for (const auto& e : m.boundary_edges()) {
    const Vec2 a = m.vertices()[e.vertices[0]], b = m.vertices()[e.vertices[1]];
    if (a.x == 0.0 && b.x == 0.0) {
      CHECK(e.marker == BoundaryMarker::Inlet);
      ++inlet;
    } else if (a.x == kChannelLength && b.x == kChannelLength) {
      CHECK(e.marker == BoundaryMarker::Outlet);
      ++outlet;
    } else {
      CHECK(e.marker == BoundaryMarker::Wall);
    }
  }
  CHECK(inlet == 20);
  CHECK(outlet == 20);
}

TEST_CASE("step channel rejects unresolvable or invalid resolution") {
  CHECK_THROWS_AS(build_step_channel(0.0), std::invalid_argument);
  CHECK_THROWS_AS(build_step_channel(-1.0), std::invalid_argument);
  CHECK_THROWS_AS(build_step_channel(1.5), std::invalid_argument);
  CHECK_THROWS_AS(build_step_channel(1.0), std::invalid_argument);
  CHECK_NOTHROW(build_step_channel(0.999));
}

TEST_CASE("mesh VTK export lists points and cells") {
  const Mesh m = build_structured_square(2);
  std::ostringstream os;
  write_vtk(os, m);
  const std::string s = os.str();
  CHECK(s.find("DATASET UNSTRUCTURED_GRID") != std::string::npos);
  CHECK(s.find("POINTS 9") != std::string::npos);
  CHECK(s.find("CELLS 8 32") != std::string::npos);
}
