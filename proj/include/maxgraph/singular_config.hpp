#pragma once

// Singular point sets {(p_i, t_i)}, the spacelike test, shrinking punctured
// domains and the Lipschitz extension of constant boundary data.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "json.hpp"
#include "maxgraph/calculus.hpp"
#include "maxgraph/error.hpp"
#include "maxgraph/geodesic.hpp"
#include "maxgraph/mesh.hpp"

namespace maxgraph {

struct SingularPoint {
  int vertex = -1;
  double t = 0.0;

  bool operator==(const SingularPoint&) const = default;
};

/// Point list plus a mark: mark[k] is the (0-based) index of the k-th point
/// in the ordering. An empty mark means the identity ordering.
struct SingularityConfig {
  std::vector<SingularPoint> points;
  std::vector<int> mark;

  int size() const noexcept { return static_cast<int>(points.size()); }

  std::vector<int> vertices() const {
    std::vector<int> v;
    for (const auto& p : points) v.push_back(p.vertex);
    return v;
  }
  std::vector<double> heights() const {
    std::vector<double> h;
    for (const auto& p : points) h.push_back(p.t);
    return h;
  }
  std::vector<int> ordering() const {
    if (!mark.empty()) return mark;
    std::vector<int> id(points.size());
    std::iota(id.begin(), id.end(), 0);
    return id;
  }

  /// Points listed in mark order, identity mark.
  SingularityConfig marked_order() const {
    SingularityConfig out;
    for (int k : ordering()) out.points.push_back(points[k]);
    return out;
  }

  /// Structural checks: m >= 1, vertex ids in range, distinct points, mark a bijection.
  void check(const SurfaceMesh& mesh) const {
    if (points.empty()) throw Error(ErrorCode::invalid_config, "configuration needs at least one point");
    std::vector<int> seen;
    for (const auto& p : points) {
      if (p.vertex < 0 || p.vertex >= mesh.vertex_count())
        throw Error(ErrorCode::invalid_config, "vertex id " + std::to_string(p.vertex) + " out of range");
      if (!std::isfinite(p.t)) throw Error(ErrorCode::invalid_config, "non-finite height");
      seen.push_back(p.vertex);
    }
    std::sort(seen.begin(), seen.end());
    if (std::adjacent_find(seen.begin(), seen.end()) != seen.end())
      throw Error(ErrorCode::invalid_config, "base points must be pairwise distinct");
    if (!mark.empty()) {
      auto m = mark;
      std::sort(m.begin(), m.end());
      for (int k = 0; k < size(); ++k)
        if (static_cast<int>(m.size()) != size() || m[k] != k)
          throw Error(ErrorCode::invalid_config, "mark is not a permutation of the points");
    }
  }
};

// JSON: [{"vertex": v, "t": t}, ...] or {"points": [...], "mark": [1-based ints]}.
inline SingularityConfig config_from_json(const nlohmann::json& j) {
  SingularityConfig c;
  const nlohmann::json* pts = &j;
  try {
    if (j.is_object()) {
      pts = &j.at("points");
      if (j.contains("mark"))
        for (const auto& k : j.at("mark")) c.mark.push_back(k.get<int>() - 1);
    }
    if (!pts->is_array()) throw Error(ErrorCode::invalid_config, "points must be an array");
    for (const auto& p : *pts) c.points.push_back({p.at("vertex").get<int>(), p.at("t").get<double>()});
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::invalid_config, e.what());
  }
  return c;
}

inline nlohmann::json config_to_json(const SingularityConfig& c) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : c.points) pts.push_back({{"vertex", p.vertex}, {"t", p.t}});
  if (c.mark.empty()) return pts;
  nlohmann::json mark = nlohmann::json::array();
  for (int k : c.mark) mark.push_back(k + 1);
  return {{"points", pts}, {"mark", mark}};
}

inline SingularityConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open config " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::invalid_config, path + ": " + e.what());
  }
  return config_from_json(j);
}

inline constexpr double kSpacelikeSafety = 0.02;

struct PairRecord {
  int i = 0, j = 0;
  double distance = 0.0;
  double gap = 0.0;  // |t_i - t_j|
};

struct SpacelikeCertificate {
  double epsilon = 0.0;  // max |t_i - t_j| / dist(p_i, p_j)
  double margin = std::numeric_limits<double>::infinity();
  std::vector<PairRecord> pairs;
};

/// One distance field per singular point.
inline std::vector<DistanceField> point_distances(const SurfaceMesh& mesh, const SingularityConfig& config,
                                                  int threads = 1) {
  std::vector<DistanceField> out(config.size());
  geodesic_graph(mesh);
  parallel_for(config.size(), threads, [&](int i) { out[i] = geodesic_distance(mesh, config.points[i].vertex); });
  return out;
}

inline SpacelikeCertificate validate_spacelike(const SurfaceMesh& mesh, const SingularityConfig& config,
                                               int threads = 1) {
  config.check(mesh);
  const auto dist = point_distances(mesh, config, threads);
  SpacelikeCertificate cert;
  for (int i = 0; i < config.size(); ++i) {
    for (int j = i + 1; j < config.size(); ++j) {
      const double d = dist[i][config.points[j].vertex];
      const double gap = std::abs(config.points[i].t - config.points[j].t);
      cert.pairs.push_back({i, j, d, gap});
      if (gap >= (1.0 - kSpacelikeSafety) * d) {
        throw NotSpacelikeError(i, j,
                                "points " + std::to_string(i + 1) + " and " + std::to_string(j + 1) +
                                    " (vertices " + std::to_string(config.points[i].vertex) + ", " +
                                    std::to_string(config.points[j].vertex) + ") have height gap " +
                                    std::to_string(gap) + " >= 0.98 * distance " + std::to_string(d));
      }
      cert.epsilon = std::max(cert.epsilon, gap / d);
      cert.margin = std::min(cert.margin, d - gap);
    }
  }
  return cert;
}

enum class VertexRole : char { free, boundary, excluded };

struct PuncturedDomain {
  int level = 0;  // -1 for the point-limit domain
  std::vector<TriangleSet> excluded_disks;
  TriangleSet interior_triangles;
  std::vector<std::vector<int>> boundary_loops;  // oriented vertex cycles
  std::vector<double> disk_radius;
  std::vector<VertexRole> roles;  // per mesh vertex
  std::vector<int> owner;         // loop / disk index for non-free vertices, else -1

  int loop_count() const noexcept { return static_cast<int>(boundary_loops.size()); }

  /// Vertices of the interior triangles not pinned by boundary data.
  std::vector<int> free_vertices() const {
    std::vector<int> out;
    for (int v = 0; v < static_cast<int>(roles.size()); ++v)
      if (roles[v] == VertexRole::free) out.push_back(v);
    return out;
  }
};

/// Base disk radii: a quarter of the distance to the nearest other point,
/// capped at a quarter of the injectivity radius.
inline std::vector<double> base_disk_radii(const SurfaceMesh& mesh, const SingularityConfig& config,
                                           const std::vector<DistanceField>& dist) {
  std::vector<double> r(config.size(), 0.25 * mesh.injectivity_radius());
  for (int i = 0; i < config.size(); ++i)
    for (int j = 0; j < config.size(); ++j)
      if (i != j) r[i] = std::min(r[i], 0.25 * dist[i][config.points[j].vertex]);
  return r;
}

namespace detail {

// Ordered boundary cycle of a triangle set, or empty if the boundary is not
// a single simple cycle.
inline std::vector<int> boundary_cycle(const SurfaceMesh& mesh, std::span<const int> set) {
  std::vector<int> use(mesh.edge_count(), 0);
  for (int t : set)
    for (int e : mesh.triangle_edges(t)) ++use[e];
  std::map<int, int> next;
  int count = 0;
  for (int t : set) {
    const auto& tri = mesh.triangle(t);
    for (int k = 0; k < 3; ++k) {
      if (use[mesh.triangle_edges(t)[k]] != 1) continue;
      if (!next.emplace(tri[k], tri[(k + 1) % 3]).second) return {};
      ++count;
    }
  }
  if (count == 0) return {};
  std::vector<int> cycle{next.begin()->first};
  while (true) {
    const auto it = next.find(cycle.back());
    if (it == next.end()) return {};
    if (it->second == cycle.front()) break;
    cycle.push_back(it->second);
    if (static_cast<int>(cycle.size()) > count) return {};
  }
  if (static_cast<int>(cycle.size()) != count) return {};
  return cycle;
}

// Triangle set of a disk of radius rho around `center`: the triangles with
// all corners closer than rho, restricted to the component of the center and
// with holes filled.
inline TriangleSet metric_disk(const SurfaceMesh& mesh, const DistanceField& d, int center, double rho) {
  const int nt = mesh.triangle_count();
  std::vector<char> raw(nt, 0);
  for (int t = 0; t < nt; ++t) {
    const auto& tri = mesh.triangle(t);
    raw[t] = d[tri[0]] < rho && d[tri[1]] < rho && d[tri[2]] < rho;
  }
  // triangles sharing an edge
  auto neighbours = [&](int t, auto&& visit) {
    for (int e : mesh.triangle_edges(t)) {
      const auto [a, b] = mesh.edges()[e];
      for (int s : mesh.vertex_triangles(a)) {
        if (s == t) continue;
        const auto& q = mesh.triangle(s);
        if (std::find(q.begin(), q.end(), b) != q.end()) visit(s);
      }
    }
  };
  auto flood = [&](int seed, const std::vector<char>& allowed, std::vector<char>& mark) {
    std::vector<int> stack{seed};
    mark[seed] = 1;
    while (!stack.empty()) {
      const int t = stack.back();
      stack.pop_back();
      neighbours(t, [&](int s) {
        if (allowed[s] && !mark[s]) {
          mark[s] = 1;
          stack.push_back(s);
        }
      });
    }
  };
  std::vector<char> disk(nt, 0);
  for (int t : mesh.vertex_triangles(center))
    if (raw[t] && !disk[t]) flood(t, raw, disk);
  // complement components other than the one holding the farthest triangle are holes
  std::vector<char> outside(nt, 0), far(nt, 0);
  int farthest = -1;
  double best = -1.0;
  for (int t = 0; t < nt; ++t) {
    outside[t] = !disk[t];
    const auto& tri = mesh.triangle(t);
    const double m = d[tri[0]] + d[tri[1]] + d[tri[2]];
    if (outside[t] && m > best) best = m, farthest = t;
  }
  if (farthest < 0) return all_triangles(mesh);
  flood(farthest, outside, far);
  TriangleSet out;
  for (int t = 0; t < nt; ++t)
    if (!far[t]) out.push_back(t);
  return out;
}

}  // namespace detail

/// The domain with every singular disk collapsed to its point: loops are the
/// single vertices p_i and all triangles are interior.
inline PuncturedDomain point_domain(const SurfaceMesh& mesh, const SingularityConfig& config) {
  PuncturedDomain dom;
  dom.level = -1;
  dom.interior_triangles = all_triangles(mesh);
  dom.roles.assign(mesh.vertex_count(), VertexRole::free);
  dom.owner.assign(mesh.vertex_count(), -1);
  for (int i = 0; i < config.size(); ++i) {
    const int v = config.points[i].vertex;
    dom.excluded_disks.emplace_back();
    dom.boundary_loops.push_back({v});
    dom.disk_radius.push_back(0.0);
    dom.roles[v] = VertexRole::boundary;
    dom.owner[v] = i;
  }
  return dom;
}

/// Disk radii at `level` are base radii times 2^-level. `dist` holds one
/// distance field per point (see point_distances).
inline PuncturedDomain build_domain_sequence(const SurfaceMesh& mesh, const SingularityConfig& config, int level,
                                             const std::vector<DistanceField>& dist) {
  if (level < 0) throw Error(ErrorCode::invalid_parameter, "level must be >= 0");
  if (static_cast<int>(dist.size()) != config.size())
    throw Error(ErrorCode::invalid_parameter, "one distance field per point required");
  const auto base = base_disk_radii(mesh, config, dist);
  const double scale = std::ldexp(1.0, -level);

  PuncturedDomain dom;
  dom.level = level;
  dom.roles.assign(mesh.vertex_count(), VertexRole::free);
  dom.owner.assign(mesh.vertex_count(), -1);
  std::vector<char> excluded(mesh.triangle_count(), 0);

  for (int i = 0; i < config.size(); ++i) {
    const double rho = base[i] * scale;
    if (rho < 3.0 * mesh.mesh_size())
      throw Error(ErrorCode::resolution_exceeded, "disk radius " + std::to_string(rho) + " at level " +
                                                      std::to_string(level) + " is below three mesh sizes");
    auto disk = detail::metric_disk(mesh, dist[i], config.points[i].vertex, rho);
    auto loop = detail::boundary_cycle(mesh, disk);
    const auto verts = set_vertices(mesh, disk);
    int edges = 0;
    {
      std::vector<char> seen(mesh.edge_count(), 0);
      for (int t : disk)
        for (int e : mesh.triangle_edges(t)) edges += !seen[e]++;
    }
    const int chi = static_cast<int>(verts.size()) - edges + static_cast<int>(disk.size());
    if (loop.empty() || chi != 1)
      throw Error(ErrorCode::resolution_exceeded,
                  "disk around point " + std::to_string(i + 1) + " is not a topological disk; refine the mesh");
    for (int v : verts) {
      if (dom.owner[v] != -1)
        throw Error(ErrorCode::internal, "singular disks overlap at vertex " + std::to_string(v));
      dom.owner[v] = i;
      dom.roles[v] = VertexRole::excluded;
    }
    for (int v : loop) dom.roles[v] = VertexRole::boundary;
    if (dom.roles[config.points[i].vertex] != VertexRole::excluded)
      throw Error(ErrorCode::resolution_exceeded, "singular vertex is not interior to its disk");
    for (int t : disk) excluded[t] = 1;
    dom.excluded_disks.push_back(std::move(disk));
    dom.boundary_loops.push_back(std::move(loop));
    dom.disk_radius.push_back(rho);
  }
  for (int t = 0; t < mesh.triangle_count(); ++t)
    if (!excluded[t]) dom.interior_triangles.push_back(t);
  return dom;
}

inline PuncturedDomain build_domain_sequence(const SurfaceMesh& mesh, const SingularityConfig& config, int level) {
  return build_domain_sequence(mesh, config, level, point_distances(mesh, config));
}

/// Constant value per boundary loop.
struct BoundaryData {
  std::vector<double> values;

  static BoundaryData from_config(const SingularityConfig& config) { return {config.heights()}; }
};

/// Distance from every vertex to each boundary loop.
inline std::vector<DistanceField> loop_distances(const SurfaceMesh& mesh, const PuncturedDomain& domain,
                                                 int threads = 1) {
  std::vector<DistanceField> out(domain.loop_count());
  geodesic_graph(mesh);
  parallel_for(domain.loop_count(), threads,
               [&](int i) { out[i] = distance_to_set(mesh, domain.boundary_loops[i]); });
  return out;
}

/// Smallest slope any extension must have: max |t_i - t_j| / dist(loop_i, loop_j).
inline double loop_lipschitz_constant(const PuncturedDomain& domain, const BoundaryData& data,
                                      const std::vector<DistanceField>& loop_dist) {
  double worst = 0.0;
  for (int i = 0; i < domain.loop_count(); ++i) {
    for (int j = 0; j < domain.loop_count(); ++j) {
      if (i == j) continue;
      double d = std::numeric_limits<double>::infinity();
      for (int v : domain.boundary_loops[j]) d = std::min(d, loop_dist[i][v]);
      worst = std::max(worst, std::abs(data.values[i] - data.values[j]) / d);
    }
  }
  return worst;
}

/// phi(p) = min_i (t_i + eps * dist(p, loop_i)) on the punctured domain;
/// vertices inside disk i take the value t_i.
inline std::vector<double> lipschitz_extend(const SurfaceMesh& mesh, const PuncturedDomain& domain,
                                            const BoundaryData& data, double epsilon,
                                            const std::vector<DistanceField>& loop_dist) {
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw Error(ErrorCode::invalid_parameter, "epsilon must lie in (0,1), got " + std::to_string(epsilon));
  if (static_cast<int>(data.values.size()) != domain.loop_count())
    throw Error(ErrorCode::invalid_parameter, "boundary data needs one value per loop");
  const double needed = loop_lipschitz_constant(domain, data, loop_dist);
  if (epsilon < needed)
    throw Error(ErrorCode::invalid_parameter, "epsilon " + std::to_string(epsilon) +
                                                  " is below the boundary data slope " + std::to_string(needed));
  std::vector<double> phi(mesh.vertex_count());
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    if (domain.roles[v] != VertexRole::free) {
      phi[v] = data.values[domain.owner[v]];
      continue;
    }
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < domain.loop_count(); ++i) best = std::min(best, data.values[i] + epsilon * loop_dist[i][v]);
    phi[v] = best;
  }
  return phi;
}

inline std::vector<double> lipschitz_extend(const SurfaceMesh& mesh, const PuncturedDomain& domain,
                                            const BoundaryData& data, double epsilon) {
  return lipschitz_extend(mesh, domain, data, epsilon, loop_distances(mesh, domain));
}

}  // namespace maxgraph
