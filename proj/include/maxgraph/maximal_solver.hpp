#pragma once

// Discrete maximal graphs: the area functional A(u) = sum_T sqrt(1 - |grad u|^2) area(T),
// its Euler-Lagrange residual, damped Newton for the Dirichlet problem and the
// shrinking-disk limit producing the singular graph u_A.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "json.hpp"
#include "maxgraph/calculus.hpp"
#include "maxgraph/error.hpp"
#include "maxgraph/geodesic.hpp"
#include "maxgraph/mesh.hpp"
#include "maxgraph/singular_config.hpp"

namespace maxgraph {

struct SolverSettings {
  double newton_tol = 1e-10;
  int max_iters = 200;
  double barrier_delta = 1e-3;
  double cauchy_tol = 1e-4;
  int max_levels = 10;
  int threads = 1;
  std::optional<TriangleSet> probe_set;

  void check() const {
    if (!(newton_tol > 0 && cauchy_tol > 0 && barrier_delta > 0 && barrier_delta < 1))
      throw Error(ErrorCode::invalid_parameter, "tolerances must be positive and barrier_delta < 1");
    if (max_iters < 1 || max_levels < 1 || threads < 1)
      throw Error(ErrorCode::invalid_parameter, "max_iters, max_levels and threads must be >= 1");
  }
};

inline SolverSettings settings_from_json(const nlohmann::json& j) {
  SolverSettings s;
  try {
    s.newton_tol = j.value("newton_tol", s.newton_tol);
    s.max_iters = j.value("max_iters", s.max_iters);
    s.barrier_delta = j.value("barrier_delta", s.barrier_delta);
    s.cauchy_tol = j.value("cauchy_tol", s.cauchy_tol);
    s.max_levels = j.value("max_levels", s.max_levels);
    s.threads = j.value("threads", s.threads);
    if (j.contains("probe_set")) s.probe_set = j.at("probe_set").get<TriangleSet>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::invalid_parameter, std::string("settings: ") + e.what());
  }
  s.check();
  return s;
}

inline nlohmann::json settings_to_json(const SolverSettings& s) {
  nlohmann::json j{{"newton_tol", s.newton_tol}, {"cauchy_tol", s.cauchy_tol},
                   {"barrier_delta", s.barrier_delta}, {"max_iters", s.max_iters},
                   {"max_levels", s.max_levels}, {"threads", s.threads}};
  if (s.probe_set) j["probe_set"] = *s.probe_set;
  return j;
}

inline SolverSettings load_settings(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open settings " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::invalid_parameter, path + ": " + e.what());
  }
  return settings_from_json(j);
}

/// A(u) over a triangle set.
inline double area(const SurfaceMesh& mesh, std::span<const int> triangles, std::span<const double> u) {
  double sum = 0.0;
  for (int t : triangles) {
    const double g2 = triangle_gradient(mesh, t, u).squaredNorm();
    if (g2 > 1.0 + 1e-9)
      throw Error(ErrorCode::not_weakly_spacelike,
                  "|grad u| = " + std::to_string(std::sqrt(g2)) + " > 1 on triangle " + std::to_string(t));
    sum += std::sqrt(std::max(0.0, 1.0 - g2)) * mesh.geometry(t).area;
  }
  return sum;
}

inline double area(const SurfaceMesh& mesh, const PuncturedDomain& domain, std::span<const double> u) {
  return area(mesh, domain.interior_triangles, u);
}

struct ResidualField {
  std::vector<int> vertices;
  std::vector<double> values;  // parallel to `vertices`
  double sup = 0.0;
};

/// Weak-form residual sum_T area <grad u / sqrt(1 - |grad u|^2), grad hat_v>,
/// divided by the dual area of v, at the listed vertices.
inline ResidualField mc_residual(const SurfaceMesh& mesh, std::span<const int> triangles, std::span<const double> u,
                                 std::span<const int> vertices) {
  std::vector<double> acc(mesh.vertex_count(), 0.0);
  for (int t : triangles) {
    const Eigen::Vector2d g = triangle_gradient(mesh, t, u);
    const double g2 = g.squaredNorm();
    if (!(g2 < 1.0))
      throw NotSpacelikeError::on_triangle(
          t, "|grad u| = " + std::to_string(std::sqrt(g2)) + " >= 1 on triangle " + std::to_string(t));
    const auto& geo = mesh.geometry(t);
    const Eigen::Vector2d flux = g * (geo.area / std::sqrt(1.0 - g2));
    const auto& tri = mesh.triangle(t);
    for (int k = 0; k < 3; ++k) acc[tri[k]] += flux.dot(geo.hat_gradients[k]);
  }
  ResidualField r;
  r.vertices.assign(vertices.begin(), vertices.end());
  for (int v : vertices) {
    const double value = acc[v] / mesh.dual_area(v);
    r.values.push_back(value);
    r.sup = std::max(r.sup, std::abs(value));
  }
  return r;
}

/// Free vertices of the domain, minus the neighbours of point-sized loops
/// (where the continuum gradient tends to 1 and the residual sits at the
/// rounding floor).
inline std::vector<int> residual_vertices(const SurfaceMesh& mesh, const PuncturedDomain& domain) {
  std::vector<char> skip(mesh.vertex_count(), 0);
  for (const auto& loop : domain.boundary_loops)
    if (loop.size() == 1)
      for (int w : mesh.vertex_neighbors(loop[0])) skip[w] = 1;
  std::vector<int> out;
  for (int v : domain.free_vertices())
    if (!skip[v]) out.push_back(v);
  return out;
}

/// Residual at the free vertices of the domain (see residual_vertices).
inline ResidualField mc_residual(const SurfaceMesh& mesh, const PuncturedDomain& domain, std::span<const double> u) {
  return mc_residual(mesh, domain.interior_triangles, u, residual_vertices(mesh, domain));
}

struct DirichletProblem {
  const SurfaceMesh* mesh = nullptr;
  PuncturedDomain domain;
  BoundaryData boundary;
  std::vector<double> initial;  // per mesh vertex; empty selects the Lipschitz extension (constant data: the constant)
};

struct SolutionField {
  std::vector<double> values;
  double residual_norm = 0.0;
  double area = 0.0;
  int iterations = 0;
  double max_gradient = 0.0;
  std::vector<double> area_history;  // accepted Newton steps, starting at the initial iterate
  bool floor_limited = false;        // stopped on a stagnating residual within 1e3 * newton_tol
  std::vector<std::string> events;
};

namespace detail {

// Sparse symmetric system on the free vertices with a fixed pattern, so the
// symbolic factorization is done once per domain.
class NewtonSystem {
 public:
  NewtonSystem(const SurfaceMesh& mesh, const PuncturedDomain& domain) : mesh_(mesh), domain_(domain) {
    index_.assign(mesh.vertex_count(), -1);
    for (int v : domain.free_vertices()) {
      index_[v] = static_cast<int>(free_.size());
      free_.push_back(v);
    }
    std::vector<Eigen::Triplet<double>> pattern;
    for (int t : domain.interior_triangles) {
      const auto& tri = mesh.triangle(t);
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
          if (index_[tri[a]] >= 0 && index_[tri[b]] >= 0) pattern.emplace_back(index_[tri[a]], index_[tri[b]], 1.0);
    }
    const int n = size();
    hessian_.resize(n, n);
    hessian_.setFromTriplets(pattern.begin(), pattern.end());
    hessian_.makeCompressed();
    slots_.resize(domain.interior_triangles.size());
    for (std::size_t i = 0; i < domain.interior_triangles.size(); ++i) {
      const auto& tri = mesh.triangle(domain.interior_triangles[i]);
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
          int slot = -1;
          const int r = index_[tri[a]], c = index_[tri[b]];
          if (r >= 0 && c >= 0) {
            const int* begin = hessian_.innerIndexPtr() + hessian_.outerIndexPtr()[c];
            const int* end = hessian_.innerIndexPtr() + hessian_.outerIndexPtr()[c + 1];
            slot = static_cast<int>(std::lower_bound(begin, end, r) - hessian_.innerIndexPtr());
          }
          slots_[i][3 * a + b] = slot;
        }
    }
    if (n > 0) solver_.analyzePattern(hessian_);
  }

  int size() const noexcept { return static_cast<int>(free_.size()); }
  const std::vector<int>& free_vertices() const noexcept { return free_; }
  int index(int v) const { return index_[v]; }

  // Gradient of -A with respect to the free values; fills the Hessian when asked.
  Eigen::VectorXd gradient(std::span<const double> u, bool with_hessian) {
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(size());
    if (with_hessian) std::fill_n(hessian_.valuePtr(), hessian_.nonZeros(), 0.0);
    const auto& tris = domain_.interior_triangles;
    for (std::size_t i = 0; i < tris.size(); ++i) {
      const int t = tris[i];
      const auto& geo = mesh_.geometry(t);
      const auto& tri = mesh_.triangle(t);
      const Eigen::Vector2d g = triangle_gradient(mesh_, t, u);
      const double w = 1.0 / std::sqrt(1.0 - g.squaredNorm());
      const Eigen::Vector2d flux = g * (geo.area * w);
      for (int a = 0; a < 3; ++a)
        if (index_[tri[a]] >= 0) grad[index_[tri[a]]] += flux.dot(geo.hat_gradients[a]);
      if (!with_hessian) continue;
      const Eigen::Matrix2d m = geo.area * (w * Eigen::Matrix2d::Identity() + w * w * w * g * g.transpose());
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
          const int slot = slots_[i][3 * a + b];
          if (slot >= 0) hessian_.valuePtr()[slot] += geo.hat_gradients[a].dot(m * geo.hat_gradients[b]);
        }
    }
    return grad;
  }

  // Newton direction; empty on factorization failure.
  std::optional<Eigen::VectorXd> newton_direction(const Eigen::VectorXd& grad) {
    solver_.factorize(hessian_);
    if (solver_.info() != Eigen::Success) return std::nullopt;
    Eigen::VectorXd d = solver_.solve(-grad);
    if (solver_.info() != Eigen::Success || !d.allFinite()) return std::nullopt;
    return d;
  }

 private:
  const SurfaceMesh& mesh_;
  const PuncturedDomain& domain_;
  std::vector<int> index_;
  std::vector<int> free_;
  Eigen::SparseMatrix<double> hessian_;
  std::vector<std::array<int, 9>> slots_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver_;
};

// A(u + step * dir) - A(u), evaluated per triangle from the increment so it
// stays accurate when the change is tiny.
inline double area_increase(const SurfaceMesh& mesh, std::span<const int> triangles, std::span<const double> u,
                            std::span<const double> dir, double step) {
  double sum = 0.0;
  for (int t : triangles) {
    const Eigen::Vector2d g = triangle_gradient(mesh, t, u);
    const Eigen::Vector2d dg = step * triangle_gradient(mesh, t, dir);
    const Eigen::Vector2d h = g + dg;
    const double su = std::sqrt(1.0 - g.squaredNorm()), sv = std::sqrt(1.0 - h.squaredNorm());
    sum -= mesh.geometry(t).area * dg.dot(g + h) / (su + sv);
  }
  return sum;
}

}  // namespace detail

/// Linear-interpolation (cotangent) harmonic extension of the boundary data.
inline std::vector<double> harmonic_extension(const SurfaceMesh& mesh, const PuncturedDomain& domain,
                                              const BoundaryData& data) {
  std::vector<double> u(mesh.vertex_count(), 0.0);
  for (int v = 0; v < mesh.vertex_count(); ++v)
    if (domain.roles[v] != VertexRole::free) u[v] = data.values[domain.owner[v]];
  std::vector<int> index(mesh.vertex_count(), -1);
  int n = 0;
  for (int v : domain.free_vertices()) index[v] = n++;
  if (n == 0) return u;
  std::vector<Eigen::Triplet<double>> entries;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  for (int t : domain.interior_triangles) {
    const auto& geo = mesh.geometry(t);
    const auto& tri = mesh.triangle(t);
    for (int a = 0; a < 3; ++a) {
      if (index[tri[a]] < 0) continue;
      for (int b = 0; b < 3; ++b) {
        const double k = geo.area * geo.hat_gradients[a].dot(geo.hat_gradients[b]);
        if (index[tri[b]] >= 0)
          entries.emplace_back(index[tri[a]], index[tri[b]], k);
        else
          rhs[index[tri[a]]] -= k * u[tri[b]];
      }
    }
  }
  Eigen::SparseMatrix<double> lap(n, n);
  lap.setFromTriplets(entries.begin(), entries.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(lap);
  if (solver.info() != Eigen::Success) throw Error(ErrorCode::internal, "harmonic extension factorization failed");
  const Eigen::VectorXd x = solver.solve(rhs);
  for (int v = 0; v < mesh.vertex_count(); ++v)
    if (index[v] >= 0) u[v] = x[index[v]];
  return u;
}

/// Maximizes A(u) with u pinned to the boundary data, by damped Newton with
/// a spacelike barrier max |grad u| <= 1 - delta_k, delta_k shrinking toward 1e-8.
inline SolutionField solve_dirichlet(const DirichletProblem& problem, const SolverSettings& settings) {
  settings.check();
  if (problem.mesh == nullptr) throw Error(ErrorCode::invalid_problem, "problem has no mesh");
  const SurfaceMesh& mesh = *problem.mesh;
  const PuncturedDomain& dom = problem.domain;
  if (static_cast<int>(problem.boundary.values.size()) != dom.loop_count())
    throw Error(ErrorCode::invalid_problem, "boundary data needs one value per loop");
  if (static_cast<int>(dom.roles.size()) != mesh.vertex_count())
    throw Error(ErrorCode::invalid_problem, "domain does not belong to this mesh");

  SolutionField out;
  std::vector<double> u = problem.initial;
  const auto& values = problem.boundary.values;
  if (u.empty() && !values.empty() &&
      std::all_of(values.begin(), values.end(), [&](double x) { return x == values[0]; })) {
    u.assign(mesh.vertex_count(), values[0]);
  } else if (u.empty()) {
    const auto loops = loop_distances(mesh, dom, settings.threads);
    const double eps = std::clamp(loop_lipschitz_constant(dom, problem.boundary, loops), 0.5, 0.95);
    u = lipschitz_extend(mesh, dom, problem.boundary, eps, loops);
  }
  if (static_cast<int>(u.size()) != mesh.vertex_count())
    throw Error(ErrorCode::invalid_problem, "initial iterate needs one value per vertex");
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    if (dom.roles[v] == VertexRole::free) continue;
    if (u[v] != problem.boundary.values[dom.owner[v]])
      throw Error(ErrorCode::invalid_problem, "initial iterate does not match the boundary data at vertex " +
                                                  std::to_string(v));
  }
  const auto& tris = dom.interior_triangles;
  const double initial_max = max_gradient(mesh, u, tris);
  if (!(initial_max < 1.0))
    throw Error(ErrorCode::invalid_problem, "initial iterate is not spacelike (max |grad u| = " +
                                                std::to_string(initial_max) + ")");

  detail::NewtonSystem system(mesh, dom);
  const auto& free = system.free_vertices();
  // residual weights: 1/dual area on measured vertices, 0 on skipped ones
  Eigen::VectorXd weight = Eigen::VectorXd::Zero(system.size());
  Eigen::VectorXd dual(system.size());
  for (int i = 0; i < system.size(); ++i) dual[i] = mesh.dual_area(free[i]);
  for (int v : residual_vertices(mesh, dom)) weight[system.index(v)] = 1.0 / mesh.dual_area(v);

  double delta = std::min(settings.barrier_delta, 0.5 * (1.0 - initial_max));
  double current_area = area(mesh, tris, u);
  out.area_history.push_back(current_area);
  std::vector<double> trial(u);
  std::vector<double> dir(mesh.vertex_count(), 0.0);
  double best_residual = std::numeric_limits<double>::infinity();
  int stalled = 0;

  for (int iter = 0;; ++iter) {
    Eigen::VectorXd grad = system.gradient(u, true);
    const double residual = grad.size() ? grad.cwiseProduct(weight).lpNorm<Eigen::Infinity>() : 0.0;
    out.residual_norm = residual;
    out.iterations = iter;
    if (residual <= settings.newton_tol) break;
    if (residual < 0.5 * best_residual) {
      best_residual = residual;
      stalled = 0;
    } else if (++stalled >= 5 && residual <= 1e3 * settings.newton_tol) {
      out.floor_limited = true;
      out.events.push_back("iteration " + std::to_string(iter) + ": residual stagnated at rounding floor " +
                           std::to_string(residual));
      break;
    }
    if (iter >= settings.max_iters) throw NoConvergenceError(residual, dom.level, "Newton did not reach tolerance");

    auto direction = system.newton_direction(grad);
    bool newton = direction.has_value() && grad.dot(*direction) < 0.0;
    if (!newton) {
      out.events.push_back("iteration " + std::to_string(iter) + ": Newton direction unavailable, gradient step");
      direction = -grad.cwiseQuotient(dual);
    }
    const Eigen::VectorXd& d = *direction;
    const double slope = grad.dot(d);
    for (int i = 0; i < system.size(); ++i) dir[free[i]] = d[i];
    const double limit = 1.0 - delta;

    double step = 1.0;
    if (!newton) {
      // keep the first gradient trial on the scale of the mesh
      const double dn = d.lpNorm<Eigen::Infinity>();
      if (dn > 0) step = std::min(1.0, mesh.mesh_size() / dn);
    }
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls, step *= 0.5) {
      for (int i = 0; i < system.size(); ++i) trial[free[i]] = u[free[i]] + step * d[i];
      if (max_gradient(mesh, trial, tris) > limit) continue;
      const double gain = detail::area_increase(mesh, tris, u, dir, step);
      if (gain >= -1e-4 * step * slope && gain >= 0.0) {
        accepted = true;
        current_area += gain;
        break;
      }
    }
    if (!accepted) {
      // no admissible progress: the iterate is optimal to working precision
      out.events.push_back("iteration " + std::to_string(iter) + ": line search stalled at residual " +
                           std::to_string(residual));
      throw NoConvergenceError(residual, dom.level,
                               "line search stalled at iteration " + std::to_string(iter) + ", residual " +
                                   std::to_string(residual) + ", level " + std::to_string(dom.level));
    }
    u.swap(trial);
    trial = u;
    out.area_history.push_back(current_area);
    delta = std::max(1e-8, 0.5 * delta);
  }
  out.values = std::move(u);
  out.area = area(mesh, tris, out.values);
  out.max_gradient = max_gradient(mesh, out.values, tris);
  return out;
}

struct SingularMaximalGraph {
  const SurfaceMesh* mesh = nullptr;
  SingularityConfig config;
  std::vector<double> values;
  int levels_used = 0;
  std::vector<int> levels;             // shrink levels actually solved
  std::vector<double> cauchy_history;  // entry k: sup difference between solved levels k+1 and k
  std::vector<int> level_iterations;
  std::vector<double> level_residuals;
  double limit_difference = 0.0;  // point-pinned solve vs last shrink level
  int final_iterations = 0;
  double final_residual = 0.0;
  bool resolution_limited = false;
  SpacelikeCertificate certificate;
  std::vector<std::vector<double>> per_level_solutions;
  std::vector<std::string> events;
};

enum class Initialization {
  warm_start,      // Lipschitz extension at level 0, previous level afterwards
  harmonic_blend,  // every level from the midpoint of extension and harmonic extension
};

/// Vertices at distance >= base disk radius from every singular point.
inline std::vector<int> default_probe_vertices(const SurfaceMesh& mesh, const SingularityConfig& config,
                                               const std::vector<DistanceField>& dist) {
  const auto base = base_disk_radii(mesh, config, dist);
  std::vector<int> out;
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    bool far = true;
    for (int i = 0; i < config.size(); ++i) far = far && dist[i][v] >= base[i];
    if (far) out.push_back(v);
  }
  return out;
}

inline SingularMaximalGraph solve_singular(const SurfaceMesh& mesh, const SingularityConfig& config,
                                           const SolverSettings& settings,
                                           Initialization init = Initialization::warm_start,
                                           bool keep_levels = false) {
  settings.check();
  SingularMaximalGraph g;
  g.mesh = &mesh;
  g.config = config;
  g.certificate = validate_spacelike(mesh, config, settings.threads);
  const auto data = BoundaryData::from_config(config);
  if (config.size() == 1) {
    g.values.assign(mesh.vertex_count(), config.points[0].t);
    return g;
  }

  const auto dist = point_distances(mesh, config, settings.threads);
  std::vector<int> probe;
  if (settings.probe_set)
    probe = set_vertices(mesh, *settings.probe_set);
  else
    probe = default_probe_vertices(mesh, config, dist);

  std::vector<double> previous;
  for (int level = 0; level < settings.max_levels; ++level) {
    PuncturedDomain dom;
    try {
      dom = build_domain_sequence(mesh, config, level, dist);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::resolution_exceeded || level == 0) throw;
      g.resolution_limited = true;
      g.events.push_back("level " + std::to_string(level) + ": " + e.what());
      break;
    }
    const auto loops = loop_distances(mesh, dom, settings.threads);
    const double needed = loop_lipschitz_constant(dom, data, loops);
    if (needed > 0.95) {
      g.events.push_back("level " + std::to_string(level) + ": skipped, boundary slope " + std::to_string(needed));
      continue;
    }
    const double eps = std::min(0.95, std::max({needed, g.certificate.epsilon, 0.5}));
    auto phi = lipschitz_extend(mesh, dom, data, eps, loops);
    if (max_gradient(mesh, phi, dom.interior_triangles) > 0.95) {
      g.events.push_back("level " + std::to_string(level) + ": skipped, extension slope above 0.95");
      continue;
    }
    DirichletProblem problem{&mesh, dom, data, {}};
    if (init == Initialization::harmonic_blend) {
      const auto h = harmonic_extension(mesh, dom, data);
      problem.initial.resize(mesh.vertex_count());
      for (int v = 0; v < mesh.vertex_count(); ++v) problem.initial[v] = 0.5 * (phi[v] + h[v]);
      for (int v = 0; v < mesh.vertex_count(); ++v)
        if (dom.roles[v] != VertexRole::free) problem.initial[v] = data.values[dom.owner[v]];
      if (!(max_gradient(mesh, problem.initial, dom.interior_triangles) < 1.0)) problem.initial = phi;
    } else if (!previous.empty()) {
      problem.initial = previous;
      for (int v = 0; v < mesh.vertex_count(); ++v)
        if (dom.roles[v] != VertexRole::free) problem.initial[v] = data.values[dom.owner[v]];
      if (!(max_gradient(mesh, problem.initial, dom.interior_triangles) < 1.0)) problem.initial = phi;
    } else {
      problem.initial = phi;
    }
    auto sol = solve_dirichlet(problem, settings);
    for (auto& e : sol.events) g.events.push_back("level " + std::to_string(level) + ": " + e);
    g.levels.push_back(level);
    g.level_iterations.push_back(sol.iterations);
    g.level_residuals.push_back(sol.residual_norm);
    bool settled = false;
    if (!previous.empty()) {
      double diff = 0.0;
      for (int v : probe) diff = std::max(diff, std::abs(sol.values[v] - previous[v]));
      g.cauchy_history.push_back(diff);
      settled = diff <= settings.cauchy_tol;
    }
    previous = std::move(sol.values);
    if (keep_levels) g.per_level_solutions.push_back(previous);
    if (settled) break;
  }
  if (previous.empty())
    throw Error(ErrorCode::resolution_exceeded, "no admissible shrink level; refine the mesh");
  g.levels_used = static_cast<int>(g.levels.size());

  DirichletProblem final_problem{&mesh, point_domain(mesh, config), data, previous};
  for (const auto& p : config.points) final_problem.initial[p.vertex] = p.t;
  auto sol = solve_dirichlet(final_problem, settings);
  for (auto& e : sol.events) g.events.push_back("point limit: " + e);
  g.final_iterations = sol.iterations;
  g.final_residual = sol.residual_norm;
  for (int v : probe) g.limit_difference = std::max(g.limit_difference, std::abs(sol.values[v] - previous[v]));
  g.values = std::move(sol.values);
  return g;
}

}  // namespace maxgraph
