#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "maxgraph/error.hpp"
#include "maxgraph/mesh.hpp"

namespace maxgraph {

/// Triangle ids, ascending.
using TriangleSet = std::vector<int>;

inline TriangleSet all_triangles(const SurfaceMesh& mesh) {
  TriangleSet s(mesh.triangle_count());
  for (int t = 0; t < mesh.triangle_count(); ++t) s[t] = t;
  return s;
}

inline std::vector<char> triangle_mask(const SurfaceMesh& mesh, std::span<const int> set) {
  std::vector<char> mask(mesh.triangle_count(), 0);
  for (int t : set) mask[t] = 1;
  return mask;
}

/// Vertices touched by the set, ascending.
inline std::vector<int> set_vertices(const SurfaceMesh& mesh, std::span<const int> set) {
  std::vector<char> seen(mesh.vertex_count(), 0);
  for (int t : set)
    for (int v : mesh.triangle(t)) seen[v] = 1;
  std::vector<int> out;
  for (int v = 0; v < mesh.vertex_count(); ++v)
    if (seen[v]) out.push_back(v);
  return out;
}

/// Vertices whose whole star lies in the set.
inline std::vector<int> set_interior_vertices(const SurfaceMesh& mesh, std::span<const int> set) {
  const auto mask = triangle_mask(mesh, set);
  std::vector<int> out;
  for (int v : set_vertices(mesh, set)) {
    bool inside = true;
    for (int t : mesh.vertex_triangles(v)) inside = inside && mask[t];
    if (inside) out.push_back(v);
  }
  return out;
}

/// Per-triangle vectors expressed in each triangle's frame (mesh.geometry(t).frame).
struct TriangleVectorField {
  TriangleSet triangles;
  std::vector<Eigen::Vector2d> values;  // parallel to `triangles`

  double max_norm() const {
    double m = 0.0;
    for (const auto& v : values) m = std::max(m, v.norm());
    return m;
  }
};

/// Constant gradient of the P1 interpolant on one triangle. Written in
/// differences so constants give exactly zero.
inline Eigen::Vector2d triangle_gradient(const SurfaceMesh& mesh, int t, std::span<const double> field) {
  const auto& tri = mesh.triangle(t);
  const auto& g = mesh.geometry(t).hat_gradients;
  const double f0 = field[tri[0]];
  return (field[tri[1]] - f0) * g[1] + (field[tri[2]] - f0) * g[2];
}

inline TriangleVectorField p1_gradient(const SurfaceMesh& mesh, std::span<const double> field,
                                       const std::optional<TriangleSet>& domain = std::nullopt) {
  if (static_cast<int>(field.size()) != mesh.vertex_count())
    throw Error(ErrorCode::invalid_parameter, "field must have one value per vertex");
  TriangleVectorField out;
  out.triangles = domain ? *domain : all_triangles(mesh);
  out.values.reserve(out.triangles.size());
  for (int t : out.triangles) {
    if (!(mesh.geometry(t).area > 0.0))
      throw Error(ErrorCode::internal, "degenerate triangle " + std::to_string(t));
    out.values.push_back(triangle_gradient(mesh, t, field));
  }
  return out;
}

/// Sum of density(T) * area(T) over the domain; `density` has one entry per
/// mesh triangle.
inline double integrate(const SurfaceMesh& mesh, std::span<const double> density,
                        const std::optional<TriangleSet>& domain = std::nullopt) {
  if (static_cast<int>(density.size()) != mesh.triangle_count())
    throw Error(ErrorCode::invalid_parameter, "density must have one value per triangle");
  double sum = 0.0;
  if (domain) {
    for (int t : *domain) sum += density[t] * mesh.geometry(t).area;
  } else {
    for (int t = 0; t < mesh.triangle_count(); ++t) sum += density[t] * mesh.geometry(t).area;
  }
  return sum;
}

/// Largest per-triangle |grad u| over a set.
inline double max_gradient(const SurfaceMesh& mesh, std::span<const double> field, std::span<const int> set) {
  double m = 0.0;
  for (int t : set) m = std::max(m, triangle_gradient(mesh, t, field).norm());
  return m;
}

}  // namespace maxgraph
