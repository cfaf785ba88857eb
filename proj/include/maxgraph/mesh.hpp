#pragma once

// Triangulated compact surfaces (unit sphere, flat torus) carrying an
// intrinsic piecewise-flat metric given by edge lengths.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "maxgraph/error.hpp"

namespace maxgraph {

enum class Topology { sphere, torus };

inline std::string_view to_string(Topology t) { return t == Topology::sphere ? "sphere" : "torus"; }

struct TorusGrid {
  int nx = 0;
  int ny = 0;
  double lx = 1.0;
  double ly = 1.0;
};

/// Orthonormal frame of one flat triangle.
///
/// For the sphere the frame origin is the lowest-id corner and the x axis
/// points to the next-lowest corner. Torus triangles use the chart axes, so
/// gradients of chart-linear functions come out in (x, y) components.
/// Either way the frame orientation agrees with the outward orientation.
struct TriangleFrame {
  int anchor = -1;
  std::array<Eigen::Vector2d, 3> corners;  // in triangle corner order
  Eigen::Vector3d axis_x = Eigen::Vector3d::UnitX();
  Eigen::Vector3d axis_y = Eigen::Vector3d::UnitY();
};

struct TriangleGeometry {
  double area = 0.0;
  std::array<Eigen::Vector2d, 3> hat_gradients;
  TriangleFrame frame;
  int orientation = 1;  // +1 when the embedded triangle is outward oriented
};

namespace detail {

/// Lazily built, shared cache slot (the mesh itself stays immutable).
struct LazySlot {
  std::once_flag once;
  std::shared_ptr<const void> value;
};

inline std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

/// Kahan's numerically stable Heron formula.
inline double heron_area(double a, double b, double c) {
  std::array<double, 3> s{a, b, c};
  std::sort(s.begin(), s.end(), std::greater<>());
  const double x = s[0], y = s[1], z = s[2];
  const double p = (x + (y + z)) * (z - (x - y)) * (z + (x - y)) * (x + (y - z));
  return p > 0.0 ? 0.25 * std::sqrt(p) : 0.0;
}

inline Eigen::Vector2d perp(const Eigen::Vector2d& v) { return {-v.y(), v.x()}; }

inline double cross2(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return a.x() * b.y() - a.y() * b.x();
}

}  // namespace detail

class SurfaceMesh;
SurfaceMesh build_icosphere(int level);
SurfaceMesh build_flat_torus(int nx, int ny, double lx, double ly);

class SurfaceMesh {
 public:
  using Triangle = std::array<int, 3>;
  using Edge = std::array<int, 2>;

  Topology topology() const noexcept { return topology_; }
  int subdivision_level() const noexcept { return level_; }
  const TorusGrid& torus() const noexcept { return torus_; }

  int vertex_count() const noexcept { return static_cast<int>(positions_.size()); }
  int triangle_count() const noexcept { return static_cast<int>(triangles_.size()); }
  int edge_count() const noexcept { return static_cast<int>(edges_.size()); }
  int euler_characteristic() const noexcept { return vertex_count() - edge_count() + triangle_count(); }

  /// Sphere: unit vectors. Torus: (x, y, 0) in the fundamental rectangle.
  const std::vector<Eigen::Vector3d>& positions() const noexcept { return positions_; }
  const Eigen::Vector3d& position(int v) const { return positions_[v]; }
  const std::vector<Triangle>& triangles() const noexcept { return triangles_; }
  const Triangle& triangle(int t) const { return triangles_[t]; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const std::vector<double>& edge_lengths() const noexcept { return edge_lengths_; }

  /// Edge k of a triangle joins corners k and (k+1) mod 3.
  const std::array<int, 3>& triangle_edges(int t) const { return triangle_edges_[t]; }
  const TriangleGeometry& geometry(int t) const { return geometry_[t]; }

  std::span<const int> vertex_triangles(int v) const {
    return {vt_targets_.data() + vt_offsets_[v], vt_targets_.data() + vt_offsets_[v + 1]};
  }
  std::span<const int> vertex_neighbors(int v) const {
    return {vn_targets_.data() + vn_offsets_[v], vn_targets_.data() + vn_offsets_[v + 1]};
  }

  int edge_id(int a, int b) const {
    auto it = edge_index_.find(detail::edge_key(a, b));
    return it == edge_index_.end() ? -1 : it->second;
  }
  double edge_length(int a, int b) const {
    const int e = edge_id(a, b);
    if (e < 0) throw Error(ErrorCode::internal, "vertices are not adjacent");
    return edge_lengths_[e];
  }

  /// Longest edge length.
  double mesh_size() const noexcept { return mesh_size_; }
  double total_area() const noexcept { return total_area_; }

  /// Barycentric dual area: a third of the incident triangle areas.
  double dual_area(int v) const {
    double a = 0.0;
    for (int t : vertex_triangles(v)) a += geometry_[t].area / 3.0;
    return a;
  }

  /// Radius below which geodesic balls are embedded disks (sphere: pi,
  /// torus: half the shorter period).
  double injectivity_radius() const noexcept {
    return topology_ == Topology::sphere ? std::numbers::pi : 0.5 * std::min(torus_.lx, torus_.ly);
  }

  /// Embeds a frame vector of triangle t into R^3.
  Eigen::Vector3d embed(int t, const Eigen::Vector2d& v) const {
    const auto& f = geometry_[t].frame;
    return v.x() * f.axis_x + v.y() * f.axis_y;
  }

  /// Throws Error(internal) naming the first violated invariant.
  void check_invariants() const;

  detail::LazySlot& geodesic_slot() const { return *geodesic_slot_; }

 private:
  friend SurfaceMesh build_icosphere(int level);
  friend SurfaceMesh build_flat_torus(int nx, int ny, double lx, double ly);

  SurfaceMesh() = default;

  // corner_chart: torus only, unwrapped chart coordinates of each corner.
  void finalize(const std::vector<std::array<Eigen::Vector2d, 3>>* corner_chart);

  Topology topology_ = Topology::sphere;
  int level_ = 0;
  TorusGrid torus_;
  std::vector<Eigen::Vector3d> positions_;
  std::vector<Triangle> triangles_;
  std::vector<Edge> edges_;
  std::vector<double> edge_lengths_;
  std::vector<std::array<int, 3>> triangle_edges_;
  std::vector<TriangleGeometry> geometry_;
  std::unordered_map<std::uint64_t, int> edge_index_;
  std::vector<int> vt_offsets_, vt_targets_;
  std::vector<int> vn_offsets_, vn_targets_;
  double mesh_size_ = 0.0;
  double total_area_ = 0.0;
  std::shared_ptr<detail::LazySlot> geodesic_slot_ = std::make_shared<detail::LazySlot>();
};

inline void SurfaceMesh::finalize(const std::vector<std::array<Eigen::Vector2d, 3>>* corner_chart) {
  const int nt = triangle_count();
  const int nv = vertex_count();

  // Edges, numbered in order of first appearance.
  triangle_edges_.resize(nt);
  edge_index_.reserve(static_cast<std::size_t>(nt) * 3 / 2 + 1);
  for (int t = 0; t < nt; ++t) {
    for (int k = 0; k < 3; ++k) {
      const int a = triangles_[t][k], b = triangles_[t][(k + 1) % 3];
      auto [it, inserted] = edge_index_.try_emplace(detail::edge_key(a, b), edge_count());
      if (inserted) edges_.push_back({std::min(a, b), std::max(a, b)});
      triangle_edges_[t][k] = it->second;
    }
  }

  edge_lengths_.assign(edges_.size(), 0.0);
  if (topology_ == Topology::sphere) {
    for (std::size_t e = 0; e < edges_.size(); ++e) {
      const double chord = (positions_[edges_[e][0]] - positions_[edges_[e][1]]).norm();
      edge_lengths_[e] = 2.0 * std::asin(std::min(1.0, 0.5 * chord));
    }
  } else {
    for (int t = 0; t < nt; ++t)
      for (int k = 0; k < 3; ++k)
        edge_lengths_[triangle_edges_[t][k]] = ((*corner_chart)[t][(k + 1) % 3] - (*corner_chart)[t][k]).norm();
  }
  mesh_size_ = edge_lengths_.empty() ? 0.0 : *std::max_element(edge_lengths_.begin(), edge_lengths_.end());

  geometry_.resize(nt);
  total_area_ = 0.0;
  for (int t = 0; t < nt; ++t) {
    const auto& tri = triangles_[t];
    auto& g = geometry_[t];
    const double l01 = edge_lengths_[triangle_edges_[t][0]];
    const double l12 = edge_lengths_[triangle_edges_[t][1]];
    const double l20 = edge_lengths_[triangle_edges_[t][2]];
    g.area = detail::heron_area(l01, l12, l20);
    total_area_ += g.area;

    if (topology_ == Topology::torus) {
      const auto& cc = (*corner_chart)[t];
      int ia = 0;
      for (int k = 1; k < 3; ++k)
        if (tri[k] < tri[ia]) ia = k;
      g.frame.anchor = tri[ia];
      for (int k = 0; k < 3; ++k) g.frame.corners[k] = cc[k] - cc[ia];
      g.frame.axis_x = Eigen::Vector3d::UnitX();
      g.frame.axis_y = Eigen::Vector3d::UnitY();
      g.orientation = detail::cross2(cc[1] - cc[0], cc[2] - cc[0]) > 0.0 ? 1 : -1;
    } else {
      // anchor a = lowest id, b = next lowest, c = the remaining corner
      std::array<int, 3> order{0, 1, 2};
      std::sort(order.begin(), order.end(), [&](int x, int y) { return tri[x] < tri[y]; });
      const int ia = order[0], ib = order[1], ic = order[2];
      auto len = [&](int i, int j) {
        if ((i + 1) % 3 == j) return edge_lengths_[triangle_edges_[t][i]];
        return edge_lengths_[triangle_edges_[t][j]];
      };
      const double lab = len(ia, ib), lac = len(ia, ic), lbc = len(ib, ic);
      const double x = (lab * lab + lac * lac - lbc * lbc) / (2.0 * lab);
      const double y = 2.0 * g.area / lab;
      // (ia, ib, ic) cyclic in (0, 1, 2) keeps the corner orientation.
      const bool even = (ib == (ia + 1) % 3);
      g.frame.anchor = tri[ia];
      g.frame.corners[ia] = {0.0, 0.0};
      g.frame.corners[ib] = {lab, 0.0};
      g.frame.corners[ic] = {x, even ? y : -y};

      const Eigen::Vector3d& p0 = positions_[tri[0]];
      const Eigen::Vector3d& p1 = positions_[tri[1]];
      const Eigen::Vector3d& p2 = positions_[tri[2]];
      const Eigen::Vector3d n_raw = (p1 - p0).cross(p2 - p0);
      g.orientation = n_raw.dot(p0 + p1 + p2) > 0.0 ? 1 : -1;
      const Eigen::Vector3d n = g.orientation * n_raw.normalized();
      Eigen::Vector3d ex = positions_[tri[ib]] - positions_[tri[ia]];
      ex -= ex.dot(n) * n;
      g.frame.axis_x = ex.normalized();
      g.frame.axis_y = n.cross(g.frame.axis_x);
    }

    const auto& c = g.frame.corners;
    const double twice_area = detail::cross2(c[1] - c[0], c[2] - c[0]);
    for (int k = 0; k < 3; ++k)
      g.hat_gradients[k] = detail::perp(c[(k + 2) % 3] - c[(k + 1) % 3]) / twice_area;
  }

  // Vertex -> triangle and vertex -> neighbor adjacency (CSR).
  vt_offsets_.assign(nv + 1, 0);
  for (const auto& tri : triangles_)
    for (int v : tri) ++vt_offsets_[v + 1];
  for (int v = 0; v < nv; ++v) vt_offsets_[v + 1] += vt_offsets_[v];
  vt_targets_.resize(vt_offsets_[nv]);
  {
    std::vector<int> fill(vt_offsets_.begin(), vt_offsets_.end() - 1);
    for (int t = 0; t < nt; ++t)
      for (int v : triangles_[t]) vt_targets_[fill[v]++] = t;
  }
  vn_offsets_.assign(nv + 1, 0);
  for (const auto& e : edges_) {
    ++vn_offsets_[e[0] + 1];
    ++vn_offsets_[e[1] + 1];
  }
  for (int v = 0; v < nv; ++v) vn_offsets_[v + 1] += vn_offsets_[v];
  vn_targets_.resize(vn_offsets_[nv]);
  {
    std::vector<int> fill(vn_offsets_.begin(), vn_offsets_.end() - 1);
    for (const auto& e : edges_) {
      vn_targets_[fill[e[0]]++] = e[1];
      vn_targets_[fill[e[1]]++] = e[0];
    }
    for (int v = 0; v < nv; ++v)
      std::sort(vn_targets_.begin() + vn_offsets_[v], vn_targets_.begin() + vn_offsets_[v + 1]);
  }
}

inline void SurfaceMesh::check_invariants() const {
  std::vector<int> uses(edges_.size(), 0);
  for (const auto& te : triangle_edges_)
    for (int e : te) ++uses[e];
  for (std::size_t e = 0; e < uses.size(); ++e)
    if (uses[e] != 2)
      throw Error(ErrorCode::internal, "edge " + std::to_string(e) + " is not shared by exactly two triangles");

  const int expected = topology_ == Topology::sphere ? 2 : 0;
  if (euler_characteristic() != expected)
    throw Error(ErrorCode::internal, "unexpected Euler characteristic " + std::to_string(euler_characteristic()));

  for (int t = 0; t < triangle_count(); ++t) {
    const auto& te = triangle_edges_[t];
    const double a = edge_lengths_[te[0]], b = edge_lengths_[te[1]], c = edge_lengths_[te[2]];
    if (!(a < b + c && b < a + c && c < a + b))
      throw Error(ErrorCode::internal, "triangle " + std::to_string(t) + " violates the triangle inequality");
    if (geometry_[t].orientation != 1)
      throw Error(ErrorCode::internal, "triangle " + std::to_string(t) + " is not outward oriented");
  }

  if (topology_ == Topology::sphere)
    for (int v = 0; v < vertex_count(); ++v)
      if (std::abs(positions_[v].norm() - 1.0) > 1e-12)
        throw Error(ErrorCode::internal, "sphere vertex " + std::to_string(v) + " is off the unit sphere");
}

/// Icosahedron with vertices at both poles (vertex 0 = north, vertex 11 =
/// south), subdivided `level` times with midpoints projected to the sphere.
/// Subdivision keeps the ids of existing vertices, and every vertex has its
/// antipode in the mesh.
inline SurfaceMesh build_icosphere(int level) {
  if (level < 0 || level > 8)
    throw Error(ErrorCode::resource, "icosphere level must lie in [0, 8], got " + std::to_string(level));

  SurfaceMesh mesh;
  mesh.topology_ = Topology::sphere;
  mesh.level_ = level;

  const double z = 1.0 / std::sqrt(5.0);
  const double r = 2.0 / std::sqrt(5.0);
  auto& pos = mesh.positions_;
  pos.emplace_back(0.0, 0.0, 1.0);
  for (int k = 0; k < 5; ++k) {
    const double a = 2.0 * std::numbers::pi * k / 5.0;
    pos.emplace_back(r * std::cos(a), r * std::sin(a), z);
  }
  for (int k = 0; k < 5; ++k) {
    const double a = 2.0 * std::numbers::pi * k / 5.0 + std::numbers::pi / 5.0;
    pos.emplace_back(r * std::cos(a), r * std::sin(a), -z);
  }
  pos.emplace_back(0.0, 0.0, -1.0);

  auto& tris = mesh.triangles_;
  for (int k = 0; k < 5; ++k) {
    const int u0 = 1 + k, u1 = 1 + (k + 1) % 5;
    const int l0 = 6 + k, l1 = 6 + (k + 1) % 5;
    tris.push_back({0, u0, u1});
    tris.push_back({u0, l0, u1});
    tris.push_back({u1, l0, l1});
    tris.push_back({11, l1, l0});
  }
  for (auto& tri : tris) {
    const Eigen::Vector3d n = (pos[tri[1]] - pos[tri[0]]).cross(pos[tri[2]] - pos[tri[0]]);
    if (n.dot(pos[tri[0]] + pos[tri[1]] + pos[tri[2]]) < 0.0) std::swap(tri[1], tri[2]);
  }

  for (int l = 0; l < level; ++l) {
    std::unordered_map<std::uint64_t, int> midpoint;
    midpoint.reserve(tris.size() * 2);
    auto mid = [&](int a, int b) {
      auto [it, inserted] = midpoint.try_emplace(detail::edge_key(a, b), static_cast<int>(pos.size()));
      if (inserted) pos.push_back((pos[a] + pos[b]).normalized());
      return it->second;
    };
    std::vector<SurfaceMesh::Triangle> next;
    next.reserve(tris.size() * 4);
    for (const auto& t : tris) {
      const int ab = mid(t[0], t[1]), bc = mid(t[1], t[2]), ca = mid(t[2], t[0]);
      next.push_back({t[0], ab, ca});
      next.push_back({ab, t[1], bc});
      next.push_back({ca, bc, t[2]});
      next.push_back({ab, bc, ca});
    }
    tris = std::move(next);
  }
  mesh.finalize(nullptr);
  return mesh;
}

/// Regular nx-by-ny grid on [0,lx) x [0,ly) with periodic identification;
/// each cell is split along its (i,j)-(i+1,j+1) diagonal. Vertex (i,j) has
/// id j*nx + i.
inline SurfaceMesh build_flat_torus(int nx, int ny, double lx, double ly) {
  if (nx < 3 || ny < 3) throw Error(ErrorCode::invalid_parameter, "torus grid needs nx, ny >= 3");
  if (!(lx > 0.0) || !(ly > 0.0)) throw Error(ErrorCode::invalid_parameter, "torus periods must be positive");

  SurfaceMesh mesh;
  mesh.topology_ = Topology::torus;
  mesh.level_ = 0;
  mesh.torus_ = {nx, ny, lx, ly};
  const double hx = lx / nx, hy = ly / ny;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) mesh.positions_.emplace_back(i * hx, j * hy, 0.0);

  auto id = [&](int i, int j) { return (j % ny) * nx + (i % nx); };
  std::vector<std::array<Eigen::Vector2d, 3>> chart;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const Eigen::Vector2d p00(i * hx, j * hy), p10((i + 1) * hx, j * hy);
      const Eigen::Vector2d p11((i + 1) * hx, (j + 1) * hy), p01(i * hx, (j + 1) * hy);
      mesh.triangles_.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      chart.push_back({p00, p10, p11});
      mesh.triangles_.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
      chart.push_back({p00, p11, p01});
    }
  }
  mesh.finalize(&chart);
  return mesh;
}

}  // namespace maxgraph
