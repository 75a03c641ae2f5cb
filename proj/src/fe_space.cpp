#include "emhd/fe_space.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <utility>

namespace emhd {

CellGeometry cell_geometry(const Vec2& a, const Vec2& b, const Vec2& c) {
  const double area2 = signed_area2(a, b, c);
  if (!(area2 > 0.0)) throw std::invalid_argument("cell_geometry: degenerate or clockwise triangle");
  CellGeometry g;
  g.area = 0.5 * area2;
  // grad(lambda_i) is the inward normal of the opposite edge scaled by 1/(2A).
  const std::array<Vec2, 3> p{a, b, c};
  for (int i = 0; i < 3; ++i) {
    const Vec2& q = p[(i + 1) % 3];
    const Vec2& r = p[(i + 2) % 3];
    g.grad_lambda[i] = {(q.y - r.y) / area2, (r.x - q.x) / area2};
  }
  return g;
}

std::array<double, 6> p2_values(const std::array<double, 3>& l) {
  return {l[0] * (2.0 * l[0] - 1.0), l[1] * (2.0 * l[1] - 1.0), l[2] * (2.0 * l[2] - 1.0),
          4.0 * l[1] * l[2],         4.0 * l[2] * l[0],         4.0 * l[0] * l[1]};
}

std::array<std::array<double, 3>, 6> p2_lambda_derivatives(const std::array<double, 3>& l) {
  std::array<std::array<double, 3>, 6> d{};
  for (int i = 0; i < 3; ++i) d[i][i] = 4.0 * l[i] - 1.0;
  for (int k = 0; k < 3; ++k) {
    const int i = (k + 1) % 3, j = (k + 2) % 3;
    d[3 + k][i] = 4.0 * l[j];
    d[3 + k][j] = 4.0 * l[i];
  }
  return d;
}

std::array<Vec2, 6> p2_gradients(const CellGeometry& g, const std::array<double, 3>& l) {
  const auto d = p2_lambda_derivatives(l);
  std::array<Vec2, 6> out{};
  for (int a = 0; a < 6; ++a) {
    for (int m = 0; m < 3; ++m) out[a] += d[a][m] * g.grad_lambda[m];
  }
  return out;
}

namespace {

std::vector<CellGeometry> compute_geometry(const Mesh& m) {
  std::vector<CellGeometry> g;
  g.reserve(m.triangles().size());
  const auto& v = m.vertices();
  for (const auto& t : m.triangles()) g.push_back(cell_geometry(v[t[0]], v[t[1]], v[t[2]]));
  return g;
}

}  // namespace

FeSpace FeSpace::vector_p2(std::shared_ptr<const Mesh> mesh) {
  if (!mesh) throw std::invalid_argument("FeSpace: null mesh");
  FeSpace s;
  s.kind_ = SpaceKind::VectorP2;
  s.mesh_ = std::move(mesh);
  const Mesh& m = *s.mesh_;
  s.geometry_ = compute_geometry(m);
  s.nodes_ = m.vertices();

  std::map<std::pair<int, int>, int> edge_node;
  s.cell_nodes_.reserve(6 * m.triangles().size());
  for (const auto& t : m.triangles()) {
    s.cell_nodes_.insert(s.cell_nodes_.end(), t.begin(), t.end());
    for (int k = 0; k < 3; ++k) {
      int a = t[(k + 1) % 3], b = t[(k + 2) % 3];
      if (a > b) std::swap(a, b);
      auto [it, inserted] = edge_node.try_emplace({a, b}, static_cast<int>(s.nodes_.size()));
      if (inserted) {
        const Vec2& pa = m.vertices()[a];
        const Vec2& pb = m.vertices()[b];
        s.nodes_.push_back({0.5 * (pa.x + pb.x), 0.5 * (pa.y + pb.y)});
      }
      s.cell_nodes_.push_back(it->second);
    }
  }
  const int nn = static_cast<int>(s.nodes_.size());
  s.dof_count_ = 2 * nn;

  s.cell_dofs_.reserve(12 * m.triangles().size());
  for (int c = 0; c < m.triangle_count(); ++c) {
    const auto nodes = s.cell_nodes(c);
    for (int comp = 0; comp < 2; ++comp) {
      for (int a = 0; a < 6; ++a) s.cell_dofs_.push_back(comp * nn + nodes[a]);
    }
  }

  std::vector<int> bnodes;
  for (const auto& e : m.boundary_edges()) {
    int a = e.vertices[0], b = e.vertices[1];
    bnodes.push_back(a);
    bnodes.push_back(b);
    if (a > b) std::swap(a, b);
    const auto it = edge_node.find({a, b});
    if (it == edge_node.end()) throw std::invalid_argument("FeSpace: boundary edge is not a mesh edge");
    bnodes.push_back(it->second);
  }
  std::sort(bnodes.begin(), bnodes.end());
  bnodes.erase(std::unique(bnodes.begin(), bnodes.end()), bnodes.end());
  s.boundary_nodes_ = std::move(bnodes);

  std::vector<std::vector<int>> rows(static_cast<std::size_t>(nn));
  for (int c = 0; c < m.triangle_count(); ++c) {
    const auto nodes = s.cell_nodes(c);
    for (int a : nodes) rows[a].insert(rows[a].end(), nodes.begin(), nodes.end());
  }
  for (auto& r : rows) {
    std::sort(r.begin(), r.end());
    r.erase(std::unique(r.begin(), r.end()), r.end());
  }
  std::vector<int> row_ptr{0};
  std::vector<int> col_idx;
  for (int comp = 0; comp < 2; ++comp) {
    for (const auto& r : rows) {
      for (int c : r) col_idx.push_back(comp * nn + c);
      row_ptr.push_back(static_cast<int>(col_idx.size()));
    }
  }
  std::vector<double> values(col_idx.size(), 0.0);
  s.pattern_ = std::make_shared<const SparseMatrix>(2 * nn, 2 * nn, std::move(row_ptr),
                                                    std::move(col_idx), std::move(values));
  return s;
}

FeSpace FeSpace::scalar_p1_disc(std::shared_ptr<const Mesh> mesh) {
  if (!mesh) throw std::invalid_argument("FeSpace: null mesh");
  FeSpace s;
  s.kind_ = SpaceKind::ScalarP1Disc;
  s.mesh_ = std::move(mesh);
  s.geometry_ = compute_geometry(*s.mesh_);
  s.dof_count_ = 3 * s.mesh_->triangle_count();
  s.cell_dofs_.resize(static_cast<std::size_t>(s.dof_count_));
  for (int i = 0; i < s.dof_count_; ++i) s.cell_dofs_[i] = i;
  return s;
}

std::span<const int> FeSpace::cell_dofs(int c) const {
  const auto n = static_cast<std::size_t>(dofs_per_cell());
  return std::span<const int>(cell_dofs_).subspan(static_cast<std::size_t>(c) * n, n);
}

std::span<const int> FeSpace::cell_nodes(int c) const {
  if (kind_ != SpaceKind::VectorP2) throw std::logic_error("cell_nodes: VectorP2 only");
  return std::span<const int>(cell_nodes_).subspan(static_cast<std::size_t>(c) * 6, 6);
}

std::vector<int> FeSpace::boundary_dofs() const {
  if (kind_ != SpaceKind::VectorP2) throw std::logic_error("boundary_dofs: VectorP2 only");
  std::vector<int> dofs(boundary_nodes_);
  for (int n : boundary_nodes_) dofs.push_back(node_count() + n);
  return dofs;
}

std::vector<double> interpolate(const FeSpace& space, const VectorFunction& f) {
  if (space.kind() != SpaceKind::VectorP2) throw std::invalid_argument("interpolate: expected VectorP2");
  const int nn = space.node_count();
  std::vector<double> x(static_cast<std::size_t>(space.dof_count()));
  for (int i = 0; i < nn; ++i) {
    const Vec2& p = space.nodes()[i];
    const Vec2 v = f(p.x, p.y);
    x[i] = v.x;
    x[nn + i] = v.y;
  }
  return x;
}

std::vector<double> interpolate(const FeSpace& space, const ScalarFunction& f) {
  if (space.kind() != SpaceKind::ScalarP1Disc) {
    throw std::invalid_argument("interpolate: expected ScalarP1Disc");
  }
  const Mesh& m = space.mesh();
  std::vector<double> x(static_cast<std::size_t>(space.dof_count()));
  for (int c = 0; c < m.triangle_count(); ++c) {
    for (int k = 0; k < 3; ++k) {
      const Vec2& p = m.vertices()[m.triangles()[c][k]];
      x[3 * c + k] = f(p.x, p.y);
    }
  }
  return x;
}

Vec2 evaluate(const FeSpace& space, std::span<const double> coeffs, int c,
              const std::array<double, 3>& lambda) {
  const auto phi = p2_values(lambda);
  const auto dofs = space.cell_dofs(c);
  Vec2 v;
  for (int a = 0; a < 6; ++a) {
    v.x += phi[a] * coeffs[dofs[a]];
    v.y += phi[a] * coeffs[dofs[6 + a]];
  }
  return v;
}

Mat2 evaluate_gradient(const FeSpace& space, std::span<const double> coeffs, int c,
                       const std::array<double, 3>& lambda) {
  const auto grad = p2_gradients(space.geometry(c), lambda);
  const auto dofs = space.cell_dofs(c);
  Mat2 g;
  for (int a = 0; a < 6; ++a) {
    const double ux = coeffs[dofs[a]];
    const double uy = coeffs[dofs[6 + a]];
    g.xx += ux * grad[a].x;
    g.xy += ux * grad[a].y;
    g.yx += uy * grad[a].x;
    g.yy += uy * grad[a].y;
  }
  return g;
}

}  // namespace emhd
