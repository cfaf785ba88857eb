#pragma once

// Command-line front end: mesh, solve, verify, moduli and oracle subcommands.
// Exit codes: 0 success, 1 domain error (bad input data), 2 resource or
// convergence failure, 64 usage error.

#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "maxgraph/analysis.hpp"
#include "maxgraph/io.hpp"
#include "maxgraph/maximal_solver.hpp"
#include "maxgraph/moduli.hpp"
#include "maxgraph/ode_oracle.hpp"

#ifndef MAXGRAPH_VERSION
#define MAXGRAPH_VERSION "0.0.0"
#endif

namespace maxgraph::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitFailure = 2;
inline constexpr int kExitUsage = 64;

struct RunManifest {
  std::string command;
  std::string surface;
  std::string config;
  std::string settings;
  std::string field;
  std::string manifest;
  std::string out = ".";
  int threads = 1;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const {
    nlohmann::json j{{"command", command}, {"surface", surface}, {"out", out},
                     {"threads", threads}, {"seed", seed},       {"version", MAXGRAPH_VERSION}};
    if (!config.empty()) j["config"] = config;
    if (!settings.empty()) j["settings"] = settings;
    if (!field.empty()) j["field"] = field;
    if (!manifest.empty()) j["manifest"] = manifest;
    return j;
  }
};

namespace detail {

namespace fs = std::filesystem;

inline void require_inputs(const RunManifest& m) {
  for (const auto* p : {&m.config, &m.settings, &m.field, &m.manifest})
    if (!p->empty() && !fs::exists(*p)) throw Error(ErrorCode::io, "input file does not exist: " + *p);
}

inline std::string prepare_out(const RunManifest& m) {
  std::error_code ec;
  fs::create_directories(m.out, ec);
  if (ec || !fs::is_directory(m.out)) throw Error(ErrorCode::io, "cannot create output directory " + m.out);
  maxgraph::detail::write_file((fs::path(m.out) / "manifest.json").string(), m.to_json().dump(2) + "\n");
  return m.out;
}

template <class Writer>
void emit(const std::string& dir, const std::string& name, Writer&& write) {
  std::ostringstream s;
  write(s);
  maxgraph::detail::write_file((fs::path(dir) / name).string(), s.str());
}

inline SolverSettings settings_for(const RunManifest& m) {
  SolverSettings s = m.settings.empty() ? SolverSettings{} : load_settings(m.settings);
  s.threads = m.threads;
  s.check();
  return s;
}

inline nlohmann::json graph_summary(const SingularMaximalGraph& g) {
  auto margin = g.certificate.margin;
  return {{"config", config_to_json(g.config)},
          {"levels", g.levels},
          {"cauchy_history", g.cauchy_history},
          {"level_iterations", g.level_iterations},
          {"level_residuals", g.level_residuals},
          {"limit_difference", g.limit_difference},
          {"final_iterations", g.final_iterations},
          {"final_residual", g.final_residual},
          {"resolution_limited", g.resolution_limited},
          {"certificate",
           {{"epsilon", g.certificate.epsilon}, {"margin", std::isfinite(margin) ? nlohmann::json(margin) : nullptr}}},
          {"events", g.events}};
}

inline int cmd_mesh(const RunManifest& m, std::ostream& out) {
  const auto mesh = build_surface(parse_surface(m.surface));
  const auto dir = prepare_out(m);
  emit(dir, "mesh.obj", [&](std::ostream& s) { write_obj(s, mesh); });
  emit(dir, "mesh.json", [&](std::ostream& s) { s << mesh_sidecar(mesh).dump(2) << '\n'; });
  out << "mesh " << m.surface << ": " << mesh.vertex_count() << " vertices, " << mesh.triangle_count()
      << " triangles, mesh size " << mesh.mesh_size() << '\n';
  return kExitOk;
}

inline int cmd_solve(const RunManifest& m, std::ostream& out) {
  require_inputs(m);
  const auto mesh = build_surface(parse_surface(m.surface));
  const auto config = load_config(m.config);
  const auto settings = settings_for(m);
  const auto g = solve_singular(mesh, config, settings);
  const auto dir = prepare_out(m);
  emit(dir, "field.csv", [&](std::ostream& s) { write_field_csv(s, g.values); });
  emit(dir, "field.vtk", [&](std::ostream& s) { write_vtk(s, mesh, g.values); });
  emit(dir, "history.csv", [&](std::ostream& s) { write_history_csv(s, g); });
  emit(dir, "solution.json", [&](std::ostream& s) { s << graph_summary(g).dump(2) << '\n'; });
  out << "solved " << config.size() << " points on " << m.surface << ": levels " << g.levels.size()
      << ", final residual " << g.final_residual << '\n';
  return kExitOk;
}

inline int cmd_verify(const RunManifest& m, std::ostream& out) {
  require_inputs(m);
  const auto mesh = build_surface(parse_surface(m.surface));
  const auto config = load_config(m.config);
  config.check(mesh);
  std::vector<double> u;
  if (m.field.empty()) {
    u = solve_singular(mesh, config, settings_for(m)).values;
  } else {
    std::istringstream in(maxgraph::detail::read_file(m.field));
    u = read_field_csv(in, mesh.vertex_count());
  }
  const auto rep = verify(mesh, config, u);
  const auto dir = prepare_out(m);
  emit(dir, "report.json", [&](std::ostream& s) { s << report_to_json(rep).dump(2) << '\n'; });
  emit(dir, "cone_profiles.csv", [&](std::ostream& s) { write_cone_csv(s, rep.cone_profiles); });
  emit(dir, "end_moduli.csv", [&](std::ostream& s) { write_moduli_csv(s, rep.end_moduli); });
  out << "max principle " << (rep.max_principle_ok ? "ok" : "violated") << ", harmonicity residual "
      << rep.harmonicity_residual << ", hopf residual " << rep.hopf_residual << ", jacobian min " << rep.jacobian_min
      << ", non-spacelike triangles " << rep.not_spacelike_triangles.size() << '\n';
  return kExitOk;
}

inline int cmd_moduli(const RunManifest& m, std::ostream& out, bool seed_given) {
  require_inputs(m);
  const auto mesh = build_surface(parse_surface(m.surface));
  nlohmann::json mj;
  try {
    mj = nlohmann::json::parse(maxgraph::detail::read_file(m.manifest));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::invalid_config, m.manifest + ": " + e.what());
  }
  auto mf = manifest_from_json(mj);
  if (seed_given) mf.seed = m.seed;
  const auto settings = settings_for(m);
  const auto configs = sample_configs(mesh, mf.m, mf.count, mf.seed, {.min_separation = mf.min_separation});
  const auto dir = prepare_out(m);
  emit(dir, "moduli_manifest.json", [&](std::ostream& s) { s << manifest_to_json(mf).dump(2) << '\n'; });
  emit(dir, "samples.json", [&](std::ostream& s) { write_configs_json(s, configs); });
  for (int k = 0; k < static_cast<int>(configs.size()); ++k) {
    const auto table = continuity_probe(mesh, configs[k], mf.deltas, settings, 0);
    emit(dir, "continuity_" + std::to_string(k) + ".csv", [&](std::ostream& s) { write_continuity_csv(s, table); });
  }
  const auto rows = openness_probe(mesh, configs, settings);
  emit(dir, "openness.csv", [&](std::ostream& s) { write_openness_csv(s, rows); });
  int detected = 0;
  for (const auto& r : rows) detected += r.detected;
  out << configs.size() << " samples, singularities detected after perturbation in " << detected << '\n';
  return kExitOk;
}

inline int cmd_oracle(double tau, double theta0, int samples, std::ostream& out) {
  const auto p = rotational_profile(tau, theta0);
  out << std::setprecision(17) << "c " << p.constant() << "\nrise " << p.rise() << "\ntheta,u,du\n";
  const double span = std::numbers::pi - 2.0 * theta0;
  for (int k = 0; k <= samples; ++k) {
    const double th = theta0 + span * k / samples;
    out << th << ',' << p(th) << ',' << p.slope(th) << '\n';
  }
  return kExitOk;
}

}  // namespace detail

/// Runs one command line (without the program name).
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Maximal graphs with isolated singularities in M x R", "maxgraph"};
  app.set_version_flag("--version", MAXGRAPH_VERSION);
  app.require_subcommand(1);
  RunManifest m;
  double tau = 0.8, theta0 = 0.0;
  int samples = 16;

  auto surface = [&](CLI::App* c, bool required) {
    auto* o = c->add_option("--surface", m.surface, "sphere:<level> or torus:<nx>x<ny>:<Lx>x<Ly>");
    if (required) o->required();
  };
  auto common = [&](CLI::App* c) {
    c->add_option("--out", m.out, "output directory")->capture_default_str();
    c->add_option("--threads", m.threads, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();
    c->add_option("--seed", m.seed, "random seed");
  };
  auto* mesh = app.add_subcommand("mesh", "build a surface mesh and export OBJ + JSON sidecar");
  surface(mesh, true);
  common(mesh);
  auto* solve = app.add_subcommand("solve", "solve for the maximal graph of a configuration");
  surface(solve, true);
  solve->add_option("--config", m.config, "configuration JSON")->required();
  solve->add_option("--settings", m.settings, "solver settings JSON");
  common(solve);
  auto* ver = app.add_subcommand("verify", "check a field against the geometric properties");
  surface(ver, true);
  ver->add_option("--config", m.config, "configuration JSON")->required();
  ver->add_option("--field", m.field, "field CSV (vertex_id,u); solved if omitted");
  ver->add_option("--settings", m.settings, "solver settings JSON");
  common(ver);
  auto* mod = app.add_subcommand("moduli", "sampling, continuity and openness experiments");
  surface(mod, true);
  mod->add_option("--manifest", m.manifest, "experiment manifest JSON (seed, m, count, deltas)")->required();
  mod->add_option("--settings", m.settings, "solver settings JSON");
  common(mod);
  auto* ora = app.add_subcommand("oracle", "rotationally symmetric profile between antipodal points");
  ora->add_option("--tau", tau, "height difference")->capture_default_str();
  ora->add_option("--theta0", theta0, "inner colatitude (annulus variant)")->capture_default_str();
  ora->add_option("--samples", samples, "profile samples")->check(CLI::PositiveNumber)->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << MAXGRAPH_VERSION << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n' << app.help();
    return kExitUsage;
  }

  try {
    m.command = app.get_subcommands().front()->get_name();
    if (m.command == "mesh") return detail::cmd_mesh(m, out);
    if (m.command == "solve") return detail::cmd_solve(m, out);
    if (m.command == "verify") return detail::cmd_verify(m, out);
    if (m.command == "moduli") return detail::cmd_moduli(m, out, mod->count("--seed") > 0);
    return detail::cmd_oracle(tau, theta0, samples, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.is_domain_error() ? kExitDomain : kExitFailure;
  } catch (const std::bad_alloc&) {
    err << "error: out of memory\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

inline int run(int argc, char** argv) { return run(std::vector<std::string>(argv + 1, argv + argc)); }

}  // namespace maxgraph::cli
