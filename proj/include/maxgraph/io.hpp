#pragma once

// File formats: surface specs, mesh OBJ + JSON sidecar, per-vertex field CSV
// and VTK legacy, convergence history, and the CSV tables of the analysis and
// moduli experiments. Numbers are written with 17 significant digits so a
// rerun reproduces files byte for byte.

#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "maxgraph/analysis.hpp"
#include "maxgraph/error.hpp"
#include "maxgraph/maximal_solver.hpp"
#include "maxgraph/mesh.hpp"
#include "maxgraph/moduli.hpp"

namespace maxgraph {

/// Parsed `sphere:<level>` or `torus:<nx>x<ny>:<Lx>x<Ly>`.
struct SurfaceSpec {
  Topology topology = Topology::sphere;
  int level = 0;
  TorusGrid grid;

  std::string str() const {
    std::ostringstream s;
    s << std::setprecision(17);
    if (topology == Topology::sphere)
      s << "sphere:" << level;
    else
      s << "torus:" << grid.nx << 'x' << grid.ny << ':' << grid.lx << 'x' << grid.ly;
    return s.str();
  }
};

inline SurfaceSpec parse_surface(const std::string& text) {
  static const std::regex sphere(R"(sphere:(\d+))");
  static const std::regex torus(R"(torus:(\d+)x(\d+):([0-9.eE+-]+)x([0-9.eE+-]+))");
  std::smatch m;
  SurfaceSpec s;
  try {
    if (std::regex_match(text, m, sphere)) {
      s.level = std::stoi(m[1]);
      return s;
    }
    if (std::regex_match(text, m, torus)) {
      s.topology = Topology::torus;
      s.grid = {std::stoi(m[1]), std::stoi(m[2]), std::stod(m[3]), std::stod(m[4])};
      return s;
    }
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::invalid_parameter,
              "surface must be sphere:<level> or torus:<nx>x<ny>:<Lx>x<Ly>, got '" + text + "'");
}

inline SurfaceMesh build_surface(const SurfaceSpec& s) {
  return s.topology == Topology::sphere ? build_icosphere(s.level)
                                        : build_flat_torus(s.grid.nx, s.grid.ny, s.grid.lx, s.grid.ly);
}

namespace detail {

inline std::ostream& exact(std::ostream& out) { return out << std::setprecision(std::numeric_limits<double>::max_digits10); }

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorCode::io, "write failed for " + path);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace detail

/// Wavefront OBJ: one `v x y z` line per vertex, one `f a b c` (1-based) per triangle.
inline void write_obj(std::ostream& out, const SurfaceMesh& mesh) {
  detail::exact(out);
  for (const auto& p : mesh.positions()) out << "v " << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
  for (const auto& t : mesh.triangles()) out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
}

inline nlohmann::json mesh_sidecar(const SurfaceMesh& mesh) {
  nlohmann::json j{{"topology_tag", std::string(to_string(mesh.topology()))},
                   {"subdivision_level", mesh.subdivision_level()},
                   {"vertex_count", mesh.vertex_count()},
                   {"triangle_count", mesh.triangle_count()},
                   {"mesh_size", mesh.mesh_size()}};
  if (mesh.topology() == Topology::torus) {
    const auto& g = mesh.torus();
    j["grid"] = {{"nx", g.nx}, {"ny", g.ny}, {"lx", g.lx}, {"ly", g.ly}};
  }
  return j;
}

/// Header `vertex_id,u`, one row per vertex.
inline void write_field_csv(std::ostream& out, std::span<const double> u) {
  detail::exact(out) << "vertex_id,u\n";
  for (std::size_t v = 0; v < u.size(); ++v) out << v << ',' << u[v] << '\n';
}

inline std::vector<double> read_field_csv(std::istream& in, int vertex_count) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("vertex_id,u", 0) != 0)
    throw Error(ErrorCode::io, "field CSV must start with the header vertex_id,u");
  std::vector<double> u(vertex_count, std::numeric_limits<double>::quiet_NaN());
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw Error(ErrorCode::io, "field CSV row " + std::to_string(row) + " has no comma");
    try {
      const int v = std::stoi(line.substr(0, comma));
      if (v < 0 || v >= vertex_count) throw Error(ErrorCode::io, "field CSV vertex id out of range: " + std::to_string(v));
      u[v] = std::stod(line.substr(comma + 1));
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::io, "field CSV row " + std::to_string(row) + " is not numeric");
    }
  }
  for (int v = 0; v < vertex_count; ++v)
    if (std::isnan(u[v])) throw Error(ErrorCode::io, "field CSV misses vertex " + std::to_string(v));
  return u;
}

/// VTK legacy ASCII polydata with the field as point scalars.
inline void write_vtk(std::ostream& out, const SurfaceMesh& mesh, std::span<const double> u, const std::string& name = "u") {
  detail::exact(out) << "# vtk DataFile Version 3.0\nmaximal graph\nASCII\nDATASET POLYDATA\n";
  out << "POINTS " << mesh.vertex_count() << " double\n";
  for (const auto& p : mesh.positions()) out << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
  out << "POLYGONS " << mesh.triangle_count() << ' ' << 4 * mesh.triangle_count() << '\n';
  for (const auto& t : mesh.triangles()) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  out << "POINT_DATA " << mesh.vertex_count() << "\nSCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
  for (double x : u) out << x << '\n';
}

/// Header `level,sup_diff,iters,residual`; one row per solved shrink level
/// (sup_diff against the previous solved level, empty on the first) and a
/// final row with level `point` for the solve pinned at the points.
inline void write_history_csv(std::ostream& out, const SingularMaximalGraph& g) {
  detail::exact(out) << "level,sup_diff,iters,residual\n";
  for (std::size_t k = 0; k < g.levels.size(); ++k) {
    out << g.levels[k] << ',';
    if (k > 0) out << g.cauchy_history[k - 1];
    out << ',' << g.level_iterations[k] << ',' << g.level_residuals[k] << '\n';
  }
  out << "point," << g.limit_difference << ',' << g.final_iterations << ',' << g.final_residual << '\n';
}

inline void write_cone_csv(std::ostream& out, const std::vector<ConeProfile>& profiles) {
  detail::exact(out) << "singularity,ring,outer_radius,inner_radius,max_gradient,triangles\n";
  for (const auto& p : profiles)
    for (const auto& r : p.rings)
      out << p.singularity + 1 << ',' << r.index << ',' << r.outer_radius << ',' << r.inner_radius << ','
          << r.max_gradient << ',' << r.triangle_count << '\n';
}

inline void write_moduli_csv(std::ostream& out, const std::vector<EndModuli>& moduli) {
  detail::exact(out) << "singularity,halvings,inner_radius,modulus_surface,modulus_induced\n";
  for (const auto& m : moduli)
    for (std::size_t k = 0; k < m.radii.size(); ++k)
      out << m.singularity + 1 << ',' << k + 1 << ',' << m.radii[k] << ',' << m.surface_moduli[k] << ','
          << m.induced_moduli[k] << '\n';
}

inline void write_continuity_csv(std::ostream& out, const ContinuityTable& table) {
  detail::exact(out) << "delta,change,ratio,skipped\n";
  for (const auto& r : table.rows)
    out << r.delta << ',' << r.change << ',' << r.ratio << ',' << (r.skipped ? 1 : 0) << '\n';
}

inline void write_openness_csv(std::ostream& out, const std::vector<OpennessRow>& rows) {
  detail::exact(out) << "sample,delta,solved,detected,min_terminal_gradient\n";
  for (const auto& r : rows) {
    double lo = r.terminal_gradients.empty() ? 0.0 : *std::min_element(r.terminal_gradients.begin(), r.terminal_gradients.end());
    out << r.sample << ',' << r.delta << ',' << (r.solved ? 1 : 0) << ',' << (r.detected ? 1 : 0) << ',' << lo << '\n';
  }
}

inline void write_configs_json(std::ostream& out, const std::vector<SingularityConfig>& configs) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& c : configs) j.push_back(config_to_json(c));
  out << j.dump(2) << '\n';
}

}  // namespace maxgraph
