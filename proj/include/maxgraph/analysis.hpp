#pragma once

// Checks on a computed graph: induced metric, harmonicity in the induced
// metric, light-cone tangency at the singular points, conformal moduli of
// shrinking annuli, Hopf differentials in an annular chart, and the Jacobian
// of the projection.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "json.hpp"
#include "maxgraph/calculus.hpp"
#include "maxgraph/error.hpp"
#include "maxgraph/geodesic.hpp"
#include "maxgraph/maximal_solver.hpp"
#include "maxgraph/mesh.hpp"
#include "maxgraph/singular_config.hpp"

namespace maxgraph {

/// Per-triangle symmetric 2x2 metric in the triangle frame; entries outside
/// the evaluated set are marked invalid.
struct InducedMetric {
  std::vector<Eigen::Matrix2d> g;
  std::vector<char> valid;

  const Eigen::Matrix2d& operator[](int t) const { return g[t]; }
};

/// The surface metric itself (identity in every orthonormal frame).
inline InducedMetric surface_metric(const SurfaceMesh& mesh) {
  return {std::vector<Eigen::Matrix2d>(mesh.triangle_count(), Eigen::Matrix2d::Identity()),
          std::vector<char>(mesh.triangle_count(), 1)};
}

/// g_u = g_M - du (x) du on the given triangles (all triangles by default).
inline InducedMetric induced_metric(const SurfaceMesh& mesh, std::span<const double> u,
                                    const std::optional<TriangleSet>& triangles = std::nullopt) {
  InducedMetric m{std::vector<Eigen::Matrix2d>(mesh.triangle_count(), Eigen::Matrix2d::Identity()),
                  std::vector<char>(mesh.triangle_count(), 0)};
  const auto set = triangles ? *triangles : all_triangles(mesh);
  for (int t : set) {
    const Eigen::Vector2d d = triangle_gradient(mesh, t, u);
    if (!(d.squaredNorm() < 1.0))
      throw NotSpacelikeError::on_triangle(t, "induced metric degenerate: |grad u| = " + std::to_string(d.norm()) +
                                                  " on triangle " + std::to_string(t));
    m.g[t] = Eigen::Matrix2d::Identity() - d * d.transpose();
    m.valid[t] = 1;
  }
  return m;
}

namespace detail {

// P1 stiffness of one triangle in metric G: area_G <grad_G l_a, grad_G l_b>_G.
inline Eigen::Matrix3d metric_stiffness(const SurfaceMesh& mesh, int t, const Eigen::Matrix2d& G) {
  const auto& geo = mesh.geometry(t);
  const double root = std::sqrt(G.determinant());
  const Eigen::Matrix2d inv = G.inverse();
  Eigen::Matrix3d k;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) k(a, b) = geo.area * root * geo.hat_gradients[a].dot(inv * geo.hat_gradients[b]);
  return k;
}

inline void require_metric(const InducedMetric& metric, std::span<const int> triangles) {
  for (int t : triangles)
    if (!metric.valid[t]) throw Error(ErrorCode::invalid_parameter, "metric undefined on triangle " + std::to_string(t));
}

}  // namespace detail

struct HarmonicityResidual {
  std::vector<int> vertices;
  std::vector<double> values;  // (Laplace-Beltrami of u in g_u), per g_u dual area
  double sup = 0.0;
  double rms = 0.0;  // g_u dual-area weighted root mean square
};

/// Linear-element Laplace-Beltrami operator of g_u applied to u, at `vertices`
/// (default: vertices whose star lies in `triangles`).
inline HarmonicityResidual harmonicity_residual(const SurfaceMesh& mesh, std::span<const double> u,
                                                std::span<const int> triangles,
                                                std::optional<std::vector<int>> vertices = std::nullopt) {
  const auto metric = induced_metric(mesh, u, TriangleSet(triangles.begin(), triangles.end()));
  std::vector<double> acc(mesh.vertex_count(), 0.0), dual(mesh.vertex_count(), 0.0);
  for (int t : triangles) {
    const auto k = detail::metric_stiffness(mesh, t, metric[t]);
    const auto& tri = mesh.triangle(t);
    const double area_g = mesh.geometry(t).area * std::sqrt(metric[t].determinant());
    for (int a = 0; a < 3; ++a) {
      double s = 0.0;
      for (int b = 0; b < 3; ++b) s += k(a, b) * (u[tri[b]] - u[tri[a]]);
      acc[tri[a]] += s;
      dual[tri[a]] += area_g / 3.0;
    }
  }
  HarmonicityResidual r;
  r.vertices = vertices ? *vertices : set_interior_vertices(mesh, triangles);
  double weighted = 0.0, total = 0.0;
  for (int v : r.vertices) {
    const double value = acc[v] / dual[v];
    r.values.push_back(value);
    r.sup = std::max(r.sup, std::abs(value));
    weighted += value * value * dual[v];
    total += dual[v];
  }
  r.rms = total > 0 ? std::sqrt(weighted / total) : 0.0;
  return r;
}

struct ConeRing {
  int index = 0;
  double outer_radius = 0.0;
  double inner_radius = 0.0;
  double max_gradient = 0.0;
  int triangle_count = 0;
};

struct ConeProfile {
  int singularity = 0;
  std::vector<ConeRing> rings;
  bool truncated = false;          // requested rings went below mesh resolution
  bool local_extremum = false;     // u - t_i has one strict sign on the innermost ring
  int extremum_sign = 0;           // +1: strict minimum, -1: strict maximum, 0: none

  double terminal() const { return rings.empty() ? 0.0 : rings.back().max_gradient; }

  /// Ring maxima nondecreasing toward the point, within `slack`.
  bool monotone(double slack = 1e-3) const {
    for (std::size_t k = 1; k < rings.size(); ++k)
      if (rings[k].max_gradient < rings[k - 1].max_gradient - slack) return false;
    return true;
  }
};

/// Rings [r0 2^-(k+1), r0 2^-k) of triangle-centroid distance around point i;
/// once the next radius drops below the mesh size the ring extends to the point.
inline ConeProfile cone_tangency_profile(const SurfaceMesh& mesh, const SingularityConfig& config,
                                         std::span<const double> u, int i, int rings,
                                         std::optional<double> outer_radius = std::nullopt) {
  if (i < 0 || i >= config.size()) throw Error(ErrorCode::invalid_parameter, "no such singularity");
  if (rings < 1) throw Error(ErrorCode::invalid_parameter, "need at least one ring");
  const auto dist = point_distances(mesh, config);
  const double r0 = outer_radius ? *outer_radius : base_disk_radii(mesh, config, dist)[i];
  const auto& d = dist[i];
  const int p = config.points[i].vertex;
  const double t = config.points[i].t;
  std::vector<double> centroid(mesh.triangle_count());
  for (int tr = 0; tr < mesh.triangle_count(); ++tr) {
    const auto& q = mesh.triangle(tr);
    centroid[tr] = (d[q[0]] + d[q[1]] + d[q[2]]) / 3.0;
  }
  ConeProfile prof;
  prof.singularity = i;
  std::vector<int> innermost;
  for (int k = 0; k < rings; ++k) {
    ConeRing ring;
    ring.index = k;
    ring.outer_radius = r0 * std::ldexp(1.0, -k);
    ring.inner_radius = r0 * std::ldexp(1.0, -(k + 1));
    const bool last = ring.inner_radius < mesh.mesh_size();
    if (last) {
      ring.inner_radius = 0.0;
      prof.truncated = k + 1 < rings;
    }
    std::vector<int> members;
    for (int tr = 0; tr < mesh.triangle_count(); ++tr)
      if (centroid[tr] >= ring.inner_radius && centroid[tr] < ring.outer_radius) {
        members.push_back(tr);
        ring.max_gradient = std::max(ring.max_gradient, triangle_gradient(mesh, tr, u).norm());
      }
    ring.triangle_count = static_cast<int>(members.size());
    prof.rings.push_back(ring);
    innermost = std::move(members);
    if (last) break;
  }
  int pos = 0, neg = 0, zero = 0;
  for (int v : set_vertices(mesh, innermost)) {
    if (v == p) continue;
    const double s = u[v] - t;
    (s > 0 ? pos : s < 0 ? neg : zero)++;
  }
  if (zero == 0 && (pos == 0) != (neg == 0)) {
    prof.local_extremum = true;
    prof.extremum_sign = pos > 0 ? 1 : -1;
  }
  return prof;
}

inline ConeProfile cone_tangency_profile(const SingularMaximalGraph& graph, int i, int rings) {
  return cone_tangency_profile(*graph.mesh, graph.config, graph.values, i, rings);
}

/// Topological annulus: triangle set with an inner and an outer boundary cycle.
struct Annulus {
  TriangleSet triangles;
  std::vector<int> inner_loop;
  std::vector<int> outer_loop;
};

namespace detail {

// All boundary cycles of a triangle set (each boundary vertex used once).
inline std::vector<std::vector<int>> boundary_cycles(const SurfaceMesh& mesh, std::span<const int> set) {
  std::vector<int> use(mesh.edge_count(), 0);
  for (int t : set)
    for (int e : mesh.triangle_edges(t)) ++use[e];
  std::map<int, int> next;
  for (int t : set) {
    const auto& tri = mesh.triangle(t);
    for (int k = 0; k < 3; ++k)
      if (use[mesh.triangle_edges(t)[k]] == 1 && !next.emplace(tri[k], tri[(k + 1) % 3]).second)
        throw Error(ErrorCode::invalid_topology, "boundary touches itself at vertex " + std::to_string(tri[k]));
  }
  std::vector<std::vector<int>> cycles;
  std::map<int, char> seen;
  for (const auto& [start, unused] : next) {
    if (seen[start]) continue;
    std::vector<int> cycle;
    int v = start;
    do {
      if (seen[v]) throw Error(ErrorCode::invalid_topology, "boundary is not a union of simple cycles");
      seen[v] = 1;
      cycle.push_back(v);
      const auto it = next.find(v);
      if (it == next.end()) throw Error(ErrorCode::invalid_topology, "open boundary path");
      v = it->second;
    } while (v != start);
    cycles.push_back(std::move(cycle));
  }
  return cycles;
}

inline int euler_characteristic(const SurfaceMesh& mesh, std::span<const int> set) {
  std::vector<char> e(mesh.edge_count(), 0);
  int edges = 0;
  for (int t : set)
    for (int k : mesh.triangle_edges(t)) edges += !e[k]++;
  return static_cast<int>(set_vertices(mesh, set).size()) - edges + static_cast<int>(set.size());
}

}  // namespace detail

/// Builds an annulus from a triangle set; the inner loop is the boundary
/// cycle with the smaller mean `key`.
inline Annulus make_annulus(const SurfaceMesh& mesh, TriangleSet triangles, std::span<const double> key) {
  if (triangles.empty() || detail::euler_characteristic(mesh, triangles) != 0)
    throw Error(ErrorCode::invalid_topology, "triangle set is not an annulus (Euler characteristic != 0)");
  auto cycles = detail::boundary_cycles(mesh, triangles);
  if (cycles.size() != 2) throw Error(ErrorCode::invalid_topology, "annulus needs exactly two boundary loops");
  auto mean = [&](const std::vector<int>& c) {
    double s = 0.0;
    for (int v : c) s += key[v];
    return s / c.size();
  };
  if (mean(cycles[0]) > mean(cycles[1])) std::swap(cycles[0], cycles[1]);
  return {std::move(triangles), std::move(cycles[0]), std::move(cycles[1])};
}

/// Region between geodesic radii r_in < r_out around a vertex.
inline Annulus make_geodesic_annulus(const SurfaceMesh& mesh, int center, double r_in, double r_out) {
  if (!(r_in > 0.0 && r_in < r_out)) throw Error(ErrorCode::invalid_parameter, "annulus radii must satisfy 0 < r_in < r_out");
  const auto d = geodesic_distance(mesh, center);
  const auto outer = detail::metric_disk(mesh, d, center, r_out);
  const auto inner = detail::metric_disk(mesh, d, center, r_in);
  const auto inside = triangle_mask(mesh, inner);
  TriangleSet ring;
  for (int t : outer)
    if (!inside[t]) ring.push_back(t);
  return make_annulus(mesh, std::move(ring), d.values);
}

struct AnnulusChart {
  Annulus annulus;
  std::vector<double> psi;    // per mesh vertex, 0 on the inner loop, 1 on the outer
  std::vector<double> theta;  // per mesh vertex, harmonic conjugate, multivalued across the cut
  double energy = 0.0;
  double period = 0.0;        // conjugate period of the unscaled conjugate (equals the energy)
  double scale = 0.0;         // 2 pi / energy; chart w = scale * (psi + i theta)
  std::vector<Eigen::Vector2d> conjugate_form;  // per annulus triangle, *d psi in the triangle frame
  double cauchy_riemann = 0.0;  // sup over triangles of |d y - *d x| / |d x| in the chart metric
  double closure_error = 0.0;   // largest non-period mismatch found while integrating the conjugate

  double modulus() const { return 1.0 / energy; }

  /// Chart coordinates of the corners of annulus triangle `k`, unwrapped across the cut.
  std::array<Eigen::Vector2d, 3> corners(const SurfaceMesh& mesh, int k) const {
    const auto& tri = mesh.triangle(annulus.triangles[k]);
    std::array<Eigen::Vector2d, 3> w;
    const double ref = theta[tri[0]];
    for (int a = 0; a < 3; ++a) {
      double th = theta[tri[a]];
      th -= period * std::round((th - ref) / period);
      w[a] = scale * Eigen::Vector2d(psi[tri[a]], th);
    }
    return w;
  }
};

namespace detail {

// psi with psi = 0 on the inner loop and 1 on the outer; returns the energy.
inline double annulus_potential(const SurfaceMesh& mesh, const InducedMetric& metric, const Annulus& ann,
                                std::vector<double>& psi) {
  require_metric(metric, ann.triangles);
  psi.assign(mesh.vertex_count(), 0.0);
  std::vector<int> index(mesh.vertex_count(), -1);
  std::vector<char> fixed(mesh.vertex_count(), 0);
  for (int v : ann.inner_loop) fixed[v] = 1;
  for (int v : ann.outer_loop) {
    fixed[v] = 1;
    psi[v] = 1.0;
  }
  int n = 0;
  for (int v : set_vertices(mesh, ann.triangles))
    if (!fixed[v]) index[v] = n++;
  std::vector<Eigen::Triplet<double>> entries;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  for (int t : ann.triangles) {
    const auto k = metric_stiffness(mesh, t, metric[t]);
    const auto& tri = mesh.triangle(t);
    for (int a = 0; a < 3; ++a) {
      if (index[tri[a]] < 0) continue;
      for (int b = 0; b < 3; ++b) {
        if (index[tri[b]] >= 0)
          entries.emplace_back(index[tri[a]], index[tri[b]], k(a, b));
        else
          rhs[index[tri[a]]] -= k(a, b) * psi[tri[b]];
      }
    }
  }
  if (n > 0) {
    Eigen::SparseMatrix<double> lap(n, n);
    lap.setFromTriplets(entries.begin(), entries.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(lap);
    if (solver.info() != Eigen::Success) throw Error(ErrorCode::internal, "annulus Laplacian factorization failed");
    const Eigen::VectorXd x = solver.solve(rhs);
    for (int v = 0; v < mesh.vertex_count(); ++v)
      if (index[v] >= 0) psi[v] = x[index[v]];
  }
  double energy = 0.0;
  for (int t : ann.triangles) {
    const auto k = metric_stiffness(mesh, t, metric[t]);
    const auto& tri = mesh.triangle(t);
    const Eigen::Vector3d p(psi[tri[0]], psi[tri[1]], psi[tri[2]]);
    energy += p.dot(k * p);
  }
  return energy;
}

// Hodge star of the constant 1-form with components `a` in metric G, for a
// frame of the given orientation.
inline Eigen::Vector2d hodge_star(const Eigen::Matrix2d& G, const Eigen::Vector2d& a, int orientation) {
  const Eigen::Vector2d p = G.inverse() * a;
  return orientation * std::sqrt(G.determinant()) * Eigen::Vector2d(-p.y(), p.x());
}

}  // namespace detail

/// Conformal modulus 1/E of the annulus in the given metric, E the Dirichlet
/// energy of the potential that is 0 inside and 1 outside.
inline double annulus_modulus(const SurfaceMesh& mesh, const InducedMetric& metric, const Annulus& ann) {
  std::vector<double> psi;
  return 1.0 / detail::annulus_potential(mesh, metric, ann, psi);
}

/// Potential psi plus its harmonic conjugate. The conjugate is integrated
/// along the dual graph to fix its branch on each triangle, then fitted by a
/// linear field per vertex, multivalued across the cut.
inline AnnulusChart build_annulus_chart(const SurfaceMesh& mesh, const InducedMetric& metric, Annulus ann) {
  AnnulusChart chart;
  chart.annulus = std::move(ann);
  chart.energy = detail::annulus_potential(mesh, metric, chart.annulus, chart.psi);
  chart.period = chart.energy;
  chart.scale = 2.0 * std::numbers::pi / chart.energy;
  const auto& tris = chart.annulus.triangles;
  const int n = static_cast<int>(tris.size());
  std::vector<int> local(mesh.triangle_count(), -1);
  for (int k = 0; k < n; ++k) local[tris[k]] = k;

  chart.conjugate_form.resize(n);
  for (int k = 0; k < n; ++k) {
    const int t = tris[k];
    chart.conjugate_form[k] = detail::hodge_star(metric[t], triangle_gradient(mesh, t, chart.psi), mesh.geometry(t).orientation);
  }
  // frame coordinates of a point of triangle t given by a vertex pair midpoint
  auto frame_point = [&](int t, int a, int b) {
    const auto& tri = mesh.triangle(t);
    const auto& c = mesh.geometry(t).frame.corners;
    Eigen::Vector2d pa, pb;
    for (int q = 0; q < 3; ++q) {
      if (tri[q] == a) pa = c[q];
      if (tri[q] == b) pb = c[q];
    }
    return Eigen::Vector2d(0.5 * (pa + pb));
  };
  auto centroid = [&](int t) {
    const auto& c = mesh.geometry(t).frame.corners;
    return Eigen::Vector2d((c[0] + c[1] + c[2]) / 3.0);
  };
  // breadth-first integration over the dual graph
  std::vector<double> value(n, 0.0);
  std::vector<char> done(n, 0);
  std::queue<int> queue;
  queue.push(0);
  done[0] = 1;
  while (!queue.empty()) {
    const int k = queue.front();
    queue.pop();
    const int t = tris[k];
    for (int e : mesh.triangle_edges(t)) {
      const auto [a, b] = mesh.edges()[e];
      for (int s : mesh.vertex_triangles(a)) {
        if (s == t || local[s] < 0) continue;
        const auto& q = mesh.triangle(s);
        if (std::find(q.begin(), q.end(), b) == q.end()) continue;
        const int j = local[s];
        const double step = chart.conjugate_form[k].dot(frame_point(t, a, b) - centroid(t)) +
                            chart.conjugate_form[j].dot(centroid(s) - frame_point(s, a, b));
        const double candidate = value[k] + step;
        if (!done[j]) {
          done[j] = 1;
          value[j] = candidate;
          queue.push(j);
        } else {
          double mismatch = candidate - value[j];
          mismatch -= chart.period * std::round(mismatch / chart.period);
          chart.closure_error = std::max(chart.closure_error, std::abs(mismatch));
        }
      }
    }
  }
  // vertex values: least-squares fit of a P1 field to the conjugate form,
  // with the branch of each corner taken from the triangle values
  const auto verts = set_vertices(mesh, tris);
  std::vector<double> guess(mesh.vertex_count(), 0.0);
  for (int v : verts) {
    double sum = 0.0, ref = 0.0;
    int count = 0;
    for (int s : mesh.vertex_triangles(v)) {
      if (local[s] < 0) continue;
      double x = value[local[s]];
      if (count == 0) ref = x;
      x -= chart.period * std::round((x - ref) / chart.period);
      sum += x;
      ++count;
    }
    guess[v] = sum / count;
  }
  std::vector<int> index(mesh.vertex_count(), -1);
  const int pinned = verts.front();
  int m = 0;
  for (int v : verts)
    if (v != pinned) index[v] = m++;
  std::vector<Eigen::Triplet<double>> entries;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
  for (int k = 0; k < n; ++k) {
    const int t = tris[k];
    const auto& tri = mesh.triangle(t);
    const auto stiff = detail::metric_stiffness(mesh, t, metric[t]);
    const auto& geo = mesh.geometry(t);
    const double weight = geo.area * std::sqrt(metric[t].determinant());
    const Eigen::Matrix2d inv = metric[t].inverse();
    // target form minus the contribution of the branch offsets and the pinned value
    Eigen::Vector2d target = chart.conjugate_form[k];
    std::array<double, 3> shift{};
    for (int a = 0; a < 3; ++a) {
      shift[a] = chart.period * std::round((value[k] - guess[tri[a]]) / chart.period);
      if (tri[a] == pinned) shift[a] += guess[pinned];
      target -= shift[a] * geo.hat_gradients[a];
    }
    for (int a = 0; a < 3; ++a) {
      if (index[tri[a]] < 0) continue;
      rhs[index[tri[a]]] += weight * geo.hat_gradients[a].dot(inv * target);
      for (int b = 0; b < 3; ++b)
        if (index[tri[b]] >= 0) entries.emplace_back(index[tri[a]], index[tri[b]], stiff(a, b));
    }
  }
  chart.theta.assign(mesh.vertex_count(), 0.0);
  chart.theta[pinned] = guess[pinned];
  if (m > 0) {
    Eigen::SparseMatrix<double> lap(m, m);
    lap.setFromTriplets(entries.begin(), entries.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(lap);
    if (solver.info() != Eigen::Success) throw Error(ErrorCode::internal, "conjugate fit factorization failed");
    const Eigen::VectorXd x = solver.solve(rhs);
    for (int v : verts)
      if (index[v] >= 0) chart.theta[v] = x[index[v]];
  }
  // Cauchy-Riemann mismatch of the P1 chart on cells that do not collapse
  for (int k = 0; k < n; ++k) {
    const int t = tris[k];
    const auto w = chart.corners(mesh, k);
    Eigen::Matrix2d dw;
    dw << w[1] - w[0], w[2] - w[0];
    if (std::abs(dw.determinant()) <= 1e-12 * dw.squaredNorm()) continue;
    const auto& g = mesh.geometry(t).hat_gradients;
    Eigen::Vector2d dx = Eigen::Vector2d::Zero(), dy = Eigen::Vector2d::Zero();
    for (int a = 0; a < 3; ++a) {
      dx += w[a].x() * g[a];
      dy += w[a].y() * g[a];
    }
    const Eigen::Matrix2d inv = metric[t].inverse();
    const Eigen::Vector2d diff = dy - detail::hodge_star(metric[t], dx, mesh.geometry(t).orientation);
    const double norm_dx = std::sqrt(dx.dot(inv * dx));
    if (norm_dx > 0) chart.cauchy_riemann = std::max(chart.cauchy_riemann, std::sqrt(diff.dot(inv * diff)) / norm_dx);
  }
  return chart;
}

/// Relative mismatch of the Hopf differentials of the inclusion f and of the
/// height h = u, computed per chart cell and area weighted. Cells that
/// collapse in the chart are skipped.
inline double hopf_agreement(const SurfaceMesh& mesh, std::span<const double> u, const AnnulusChart& chart) {
  double num = 0.0, den_f = 0.0, den_h = 0.0;
  const auto& tris = chart.annulus.triangles;
  for (int k = 0; k < static_cast<int>(tris.size()); ++k) {
    const int t = tris[k];
    const auto& tri = mesh.triangle(t);
    const auto& c = mesh.geometry(t).frame.corners;
    const auto w = chart.corners(mesh, k);
    // affine map chart -> frame: columns f_x, f_y
    Eigen::Matrix2d dw, dp;
    dw << w[1] - w[0], w[2] - w[0];
    dp << c[1] - c[0], c[2] - c[0];
    // cells with all corners on one boundary loop collapse in the chart
    if (std::abs(dw.determinant()) <= 1e-12 * dw.squaredNorm()) continue;
    const Eigen::Matrix2d jac = dp * dw.inverse();
    const Eigen::RowVector2d du(u[tri[1]] - u[tri[0]], u[tri[2]] - u[tri[0]]);
    const Eigen::RowVector2d dh = du * dw.inverse();
    const Eigen::Vector2d fx = jac.col(0), fy = jac.col(1);
    const std::complex<double> phi_f(0.25 * (fx.squaredNorm() - fy.squaredNorm()), -0.5 * fx.dot(fy));
    const std::complex<double> phi_h(0.25 * (dh(0) * dh(0) - dh(1) * dh(1)), -0.5 * dh(0) * dh(1));
    const double a = mesh.geometry(t).area;
    num += a * std::abs(phi_f - phi_h);
    den_f += a * std::abs(phi_f);
    den_h += a * std::abs(phi_h);
  }
  return num / (den_f + den_h + 1e-15);
}

/// Moduli of the annuli between r0 and r0 2^-k, k = 1..halvings, around point i,
/// in the surface metric and in the induced metric.
struct EndModuli {
  int singularity = 0;
  std::vector<double> radii;  // inner radii r0 2^-k
  std::vector<double> surface_moduli;
  std::vector<double> induced_moduli;
  bool truncated = false;  // stopped early: inner radius below twice the mesh size

  static std::vector<double> increments(const std::vector<double>& m) {
    std::vector<double> d;
    for (std::size_t k = 0; k < m.size(); ++k) d.push_back(k == 0 ? m[0] : m[k] - m[k - 1]);
    return d;
  }
};

inline EndModuli end_moduli(const SurfaceMesh& mesh, const SingularityConfig& config, std::span<const double> u,
                            int i, double r0, int halvings) {
  EndModuli out;
  out.singularity = i;
  const auto flat = surface_metric(mesh);
  const int center = config.points[i].vertex;
  // induced metric on triangles away from the singular vertex itself
  InducedMetric gu = flat;
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const Eigen::Vector2d d = triangle_gradient(mesh, t, u);
    if (d.squaredNorm() < 1.0) {
      gu.g[t] = Eigen::Matrix2d::Identity() - d * d.transpose();
    } else {
      gu.valid[t] = 0;
    }
  }
  for (int k = 1; k <= halvings; ++k) {
    const double r = r0 * std::ldexp(1.0, -k);
    if (r < 2.0 * mesh.mesh_size()) {
      out.truncated = true;
      break;
    }
    const auto ann = make_geodesic_annulus(mesh, center, r, r0);
    out.radii.push_back(r);
    out.surface_moduli.push_back(annulus_modulus(mesh, flat, ann));
    out.induced_moduli.push_back(annulus_modulus(mesh, gu, ann));
  }
  return out;
}

struct VerificationReport {
  bool max_principle_ok = true;
  double max_principle_violation = 0.0;
  double harmonicity_residual = 0.0;
  double harmonicity_rms = 0.0;
  double mean_curvature_residual = 0.0;
  std::vector<ConeProfile> cone_profiles;
  std::vector<EndModuli> end_moduli;
  std::vector<char> local_extremum_ok;
  double hopf_residual = std::numeric_limits<double>::quiet_NaN();
  double jacobian_min = std::numeric_limits<double>::quiet_NaN();
  std::vector<int> not_spacelike_triangles;  // |grad u| >= 1, excluding triangles at singular vertices
  std::vector<int> lightlike_singular_triangles;
  std::vector<std::string> notes;
};

struct VerifyOptions {
  int rings = 6;
  int halvings = 4;
  std::optional<double> moduli_radius;  // default: base disk radius
  bool hopf = true;
};

/// Runs every check with default parameters; failures are recorded, not thrown.
inline VerificationReport verify(const SurfaceMesh& mesh, const SingularityConfig& config, std::span<const double> u,
                                 const VerifyOptions& opt = {}) {
  VerificationReport rep;
  const auto heights = config.heights();
  const double lo = *std::min_element(heights.begin(), heights.end());
  const double hi = *std::max_element(heights.begin(), heights.end());
  for (double x : u) rep.max_principle_violation = std::max({rep.max_principle_violation, lo - x, x - hi});
  rep.max_principle_ok = rep.max_principle_violation <= 1e-8;

  std::vector<char> singular(mesh.vertex_count(), 0);
  for (const auto& p : config.points) singular[p.vertex] = 1;
  TriangleSet good;
  rep.jacobian_min = std::numeric_limits<double>::infinity();
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangle(t);
    const bool at_point = singular[tri[0]] || singular[tri[1]] || singular[tri[2]];
    const double g2 = triangle_gradient(mesh, t, u).squaredNorm();
    if (!(g2 < 1.0)) {
      (at_point ? rep.lightlike_singular_triangles : rep.not_spacelike_triangles).push_back(t);
      continue;
    }
    good.push_back(t);
    rep.jacobian_min = std::min(rep.jacobian_min, mesh.geometry(t).orientation / std::sqrt(1.0 - g2));
  }
  if (!rep.not_spacelike_triangles.empty())
    rep.notes.push_back(std::to_string(rep.not_spacelike_triangles.size()) + " triangles are not spacelike");

  // harmonicity and mean curvature on vertices away from the singular points
  std::vector<int> probe;
  {
    std::vector<char> skip(singular);
    for (const auto& p : config.points)
      for (int w : mesh.vertex_neighbors(p.vertex)) skip[w] = 1;
    for (int v : set_interior_vertices(mesh, good))
      if (!skip[v]) probe.push_back(v);
  }
  try {
    const auto h = harmonicity_residual(mesh, u, good, probe);
    rep.harmonicity_residual = h.sup;
    rep.harmonicity_rms = h.rms;
    rep.mean_curvature_residual = mc_residual(mesh, good, u, probe).sup;
  } catch (const Error& e) {
    rep.notes.push_back(std::string("harmonicity: ") + e.what());
  }

  const auto dist = point_distances(mesh, config);
  const auto base = base_disk_radii(mesh, config, dist);
  for (int i = 0; i < config.size(); ++i) {
    try {
      auto prof = cone_tangency_profile(mesh, config, u, i, opt.rings, base[i]);
      rep.local_extremum_ok.push_back(prof.local_extremum);
      rep.cone_profiles.push_back(std::move(prof));
    } catch (const Error& e) {
      rep.local_extremum_ok.push_back(0);
      rep.notes.push_back("cone profile " + std::to_string(i + 1) + ": " + e.what());
    }
    try {
      rep.end_moduli.push_back(end_moduli(mesh, config, u, i, opt.moduli_radius.value_or(base[i]), opt.halvings));
    } catch (const Error& e) {
      rep.notes.push_back("end moduli " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  if (opt.hopf && config.size() >= 1) {
    try {
      // annulus around the first point between the base radius and twice it
      const int c = config.points[0].vertex;
      const double r_out = std::min(2.0 * base[0], 0.5 * mesh.injectivity_radius());
      const auto ann = make_geodesic_annulus(mesh, c, base[0], r_out);
      const auto chart = build_annulus_chart(mesh, induced_metric(mesh, u, ann.triangles), ann);
      rep.hopf_residual = hopf_agreement(mesh, u, chart);
    } catch (const Error& e) {
      rep.notes.push_back(std::string("hopf: ") + e.what());
    }
  }
  return rep;
}

inline VerificationReport verify(const SingularMaximalGraph& graph, const VerifyOptions& opt = {}) {
  return verify(*graph.mesh, graph.config, graph.values, opt);
}

inline nlohmann::json report_to_json(const VerificationReport& r) {
  auto num = [](double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); };
  nlohmann::json j;
  j["max_principle_ok"] = r.max_principle_ok;
  j["max_principle_violation"] = r.max_principle_violation;
  j["harmonicity_residual"] = num(r.harmonicity_residual);
  j["harmonicity_rms"] = num(r.harmonicity_rms);
  j["mean_curvature_residual"] = num(r.mean_curvature_residual);
  j["hopf_residual"] = num(r.hopf_residual);
  j["jacobian_min"] = num(r.jacobian_min);
  j["not_spacelike_triangles"] = r.not_spacelike_triangles;
  j["lightlike_singular_triangles"] = r.lightlike_singular_triangles;
  j["local_extremum_ok"] = nlohmann::json::array();
  for (char ok : r.local_extremum_ok) j["local_extremum_ok"].push_back(static_cast<bool>(ok));
  j["cone_profiles"] = nlohmann::json::array();
  for (const auto& p : r.cone_profiles) {
    nlohmann::json rings = nlohmann::json::array();
    for (const auto& ring : p.rings)
      rings.push_back({{"ring", ring.index},
                       {"outer_radius", ring.outer_radius},
                       {"inner_radius", ring.inner_radius},
                       {"max_gradient", ring.max_gradient},
                       {"triangles", ring.triangle_count}});
    j["cone_profiles"].push_back({{"singularity", p.singularity + 1},
                                  {"truncated", p.truncated},
                                  {"local_extremum", p.local_extremum},
                                  {"extremum_sign", p.extremum_sign},
                                  {"rings", rings}});
  }
  j["end_moduli"] = nlohmann::json::array();
  for (const auto& m : r.end_moduli)
    j["end_moduli"].push_back({{"singularity", m.singularity + 1},
                               {"inner_radii", m.radii},
                               {"modulus_surface", m.surface_moduli},
                               {"modulus_induced", m.induced_moduli},
                               {"truncated", m.truncated}});
  j["notes"] = r.notes;
  return j;
}

}  // namespace maxgraph
