#pragma once

// Experiments on the space of configurations: sampling valid configurations,
// continuity of the solution in the heights, openness under small height
// changes, and the bookkeeping of marks (orderings of the points).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "maxgraph/analysis.hpp"
#include "maxgraph/error.hpp"
#include "maxgraph/geodesic.hpp"
#include "maxgraph/maximal_solver.hpp"
#include "maxgraph/singular_config.hpp"

namespace maxgraph {

struct SamplingOptions {
  double min_separation = 4.0;  // pairwise point distance, in mesh sizes
  double slope = 0.5;           // |t_i - t_j| <= slope * dist(p_i, p_j)
  double height_offset = 0.0;   // heights are centred here
};

/// Seeded rejection sampling of valid configurations. The first sample has
/// t_1 = ... = t_{m-1} != t_m.
inline std::vector<SingularityConfig> sample_configs(const SurfaceMesh& mesh, int m, int count, std::uint64_t seed,
                                                     const SamplingOptions& opt = {}) {
  if (m < 2) throw Error(ErrorCode::invalid_parameter, "sampling needs m >= 2");
  if (count < 0) throw Error(ErrorCode::invalid_parameter, "sample count must be >= 0");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, mesh.vertex_count() - 1);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const double separation = opt.min_separation * mesh.mesh_size();
  std::vector<SingularityConfig> out;
  const long long budget = 1000LL * std::max(count, 1);
  long long attempts = 0;
  while (static_cast<int>(out.size()) < count) {
    if (attempts++ >= budget)
      throw Error(ErrorCode::sampling_exhausted, "only " + std::to_string(out.size()) + " of " +
                                                     std::to_string(count) + " configurations after " +
                                                     std::to_string(budget) + " attempts");
    std::vector<int> pts;
    std::vector<DistanceField> dist;
    bool ok = true;
    for (int i = 0; i < m && ok; ++i) {
      const int v = pick(rng);
      for (int j = 0; j < i; ++j) ok = ok && dist[j][v] >= separation;
      if (!ok) break;
      pts.push_back(v);
      dist.push_back(geodesic_distance(mesh, v));
    }
    if (!ok) continue;
    double closest = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j) closest = std::min(closest, dist[i][pts[j]]);
    // |t_i - t_j| <= 2 * half <= slope * closest
    const double half = 0.5 * opt.slope * closest;
    SingularityConfig c;
    for (int i = 0; i < m; ++i) c.points.push_back({pts[i], opt.height_offset + half * unit(rng)});
    if (out.empty()) {
      const double base = c.points[0].t;
      for (int i = 1; i < m - 1; ++i) c.points[i].t = base;
      double last = opt.height_offset + half * unit(rng);
      if (last == base) last = opt.height_offset + (base > opt.height_offset ? -half : half);
      c.points[m - 1].t = last;
    }
    try {
      validate_spacelike(mesh, c);
    } catch (const Error&) {
      continue;
    }
    out.push_back(std::move(c));
  }
  return out;
}

struct ContinuityRow {
  double delta = 0.0;
  double change = 0.0;  // sup over vertices of |u_perturbed - u|
  double ratio = 0.0;   // change / delta (0 when delta = 0)
  bool skipped = false;
  std::string note;
};

struct ContinuityTable {
  int perturbed_point = 0;
  std::vector<ContinuityRow> rows;  // delta strictly decreasing

  bool monotone() const {
    double prev = std::numeric_limits<double>::infinity();
    for (const auto& r : rows) {
      if (r.skipped) continue;
      if (!(r.change < prev)) return false;
      prev = r.change;
    }
    return true;
  }
  double max_ratio() const {
    double m = 0.0;
    for (const auto& r : rows)
      if (!r.skipped) m = std::max(m, r.ratio);
    return m;
  }
};

inline double sup_difference(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a[k] - b[k]));
  return d;
}

/// Solves with height `point` raised by each delta (points fixed) and records
/// the sup-norm change against the unperturbed solution.
inline ContinuityTable continuity_probe(const SurfaceMesh& mesh, const SingularityConfig& config,
                                        std::vector<double> deltas, const SolverSettings& settings, int point = 0,
                                        const std::vector<double>* base_values = nullptr) {
  if (point < 0 || point >= config.size()) throw Error(ErrorCode::invalid_parameter, "no such point to perturb");
  for (double d : deltas)
    if (!(d >= 0.0)) throw Error(ErrorCode::invalid_parameter, "perturbation sizes must be >= 0");
  std::sort(deltas.begin(), deltas.end(), std::greater<>());
  deltas.erase(std::unique(deltas.begin(), deltas.end()), deltas.end());
  std::vector<double> base;
  if (base_values)
    base = *base_values;
  else
    base = solve_singular(mesh, config, settings).values;
  ContinuityTable table;
  table.perturbed_point = point;
  for (double d : deltas) {
    ContinuityRow row;
    row.delta = d;
    auto c = config;
    c.points[point].t += d;
    try {
      validate_spacelike(mesh, c);
      row.change = sup_difference(solve_singular(mesh, c, settings).values, base);
      row.ratio = d > 0 ? row.change / d : 0.0;
    } catch (const NotSpacelikeError& e) {
      row.skipped = true;
      row.note = e.what();
    }
    table.rows.push_back(row);
  }
  return table;
}

/// sup |u_shifted - (u + delta)| for the common shift of all heights.
inline double shift_equivariance_error(const SurfaceMesh& mesh, const SingularityConfig& config, double delta,
                                       const SolverSettings& settings,
                                       const std::vector<double>* base_values = nullptr) {
  auto shifted = config;
  for (auto& p : shifted.points) p.t += delta;
  const auto base = base_values ? *base_values : solve_singular(mesh, config, settings).values;
  const auto moved = solve_singular(mesh, shifted, settings).values;
  double err = 0.0;
  for (std::size_t v = 0; v < base.size(); ++v) err = std::max(err, std::abs(moved[v] - (base[v] + delta)));
  return err;
}

struct MarkedGraph {
  SingularMaximalGraph graph;
  std::vector<int> mark;  // ordering of the points, 0-based
};

/// Forget the mark.
inline const SingularMaximalGraph& unmark(const MarkedGraph& g) { return g.graph; }

/// Same point set with the same heights (in any order) and the same field to `tol`.
inline bool same_unmarked(const SingularMaximalGraph& a, const SingularMaximalGraph& b, double tol) {
  auto key = [](const SingularityConfig& c) {
    auto p = c.points;
    std::sort(p.begin(), p.end(), [](const SingularPoint& x, const SingularPoint& y) { return x.vertex < y.vertex; });
    return p;
  };
  return key(a.config) == key(b.config) && a.values.size() == b.values.size() &&
         sup_difference(a.values, b.values) <= tol;
}

inline constexpr int kMaxMarkedPoints = 7;

/// All m! orderings in lexicographic order.
inline std::vector<std::vector<int>> enumerate_marks(const SingularityConfig& config) {
  if (config.size() > kMaxMarkedPoints)
    throw Error(ErrorCode::resource, std::to_string(config.size()) + "! orderings exceed the limit of " +
                                         std::to_string(kMaxMarkedPoints) + " points");
  std::vector<int> perm(config.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::vector<int>> out;
  do out.push_back(perm);
  while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

/// The configuration listed in the order given by `mark`, carrying that mark.
inline SingularityConfig reorder(const SingularityConfig& config, const std::vector<int>& mark) {
  SingularityConfig out;
  for (int k : mark) out.points.push_back(config.points.at(k));
  return out;
}

struct OpennessRow {
  int sample = 0;
  double delta = 0.0;
  bool solved = false;
  std::vector<double> terminal_gradients;
  bool detected = false;  // every point has terminal ring maximum >= threshold
  std::string note;
};

/// Raises the last height by delta = margin / 4 and checks every point is
/// still resolved as a singularity.
inline std::vector<OpennessRow> openness_probe(const SurfaceMesh& mesh, const std::vector<SingularityConfig>& configs,
                                               const SolverSettings& settings, double threshold = 0.5,
                                               int rings = 6) {
  std::vector<OpennessRow> rows;
  for (int s = 0; s < static_cast<int>(configs.size()); ++s) {
    OpennessRow row;
    row.sample = s;
    try {
      const auto cert = validate_spacelike(mesh, configs[s]);
      row.delta = std::isfinite(cert.margin) ? cert.margin / 4.0 : 0.25;
      auto c = configs[s];
      c.points.back().t += row.delta;
      const auto g = solve_singular(mesh, c, settings);
      row.solved = true;
      row.detected = true;
      for (int i = 0; i < c.size(); ++i) {
        const double term = cone_tangency_profile(g, i, rings).terminal();
        row.terminal_gradients.push_back(term);
        row.detected = row.detected && term >= threshold;
      }
    } catch (const Error& e) {
      row.note = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

struct ModuliManifest {
  std::uint64_t seed = 0;
  int m = 2;
  int count = 1;
  std::vector<double> deltas{0.04, 0.02, 0.01};
  double min_separation = SamplingOptions{}.min_separation;  // in mesh sizes
};

inline ModuliManifest manifest_from_json(const nlohmann::json& j) {
  ModuliManifest mf;
  try {
    mf.seed = j.value("seed", mf.seed);
    mf.m = j.value("m", mf.m);
    mf.count = j.value("count", mf.count);
    mf.deltas = j.value("deltas", mf.deltas);
    mf.min_separation = j.value("min_separation", mf.min_separation);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::invalid_config, std::string("moduli manifest: ") + e.what());
  }
  if (mf.m < 2 || mf.count < 1) throw Error(ErrorCode::invalid_config, "moduli manifest needs m >= 2 and count >= 1");
  return mf;
}

inline nlohmann::json manifest_to_json(const ModuliManifest& mf) {
  return {{"seed", mf.seed},
          {"m", mf.m},
          {"count", mf.count},
          {"deltas", mf.deltas},
          {"min_separation", mf.min_separation}};
}

}  // namespace maxgraph
