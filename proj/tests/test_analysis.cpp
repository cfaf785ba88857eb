#include <cmath>
#include <map>
#include <numeric>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "maxgraph/analysis.hpp"

using namespace maxgraph;

namespace {

const SurfaceMesh& sphere(int level) {
  static std::map<int, SurfaceMesh> cache;
  auto it = cache.find(level);
  if (it == cache.end()) it = cache.emplace(level, build_icosphere(level)).first;
  return it->second;
}

SingularityConfig antipodal(double t0, double t1) { return {{{0, t0}, {11, t1}}, {}}; }

const SingularMaximalGraph& antipodal_solution() {
  static const SingularMaximalGraph g = solve_singular(sphere(4), antipodal(0.0, 0.8), SolverSettings{});
  return g;
}

double chart_x(const SurfaceMesh& mesh, int v) { return mesh.position(v).x(); }

// Torus of 2 pi x 2 pi cells of width 2 pi / 64 with spare columns; the first
// 64 columns form a strip that is an annulus in the chart (s, phi).
struct Strip {
  SurfaceMesh mesh = build_flat_torus(72, 64, 2.0 * std::numbers::pi * 72 / 64, 2.0 * std::numbers::pi);
  TriangleSet triangles;
  std::vector<double> s;  // chart coordinate shifted to [-2 pi, 0]

  Strip() {
    const double w = 2.0 * std::numbers::pi;
    for (int v = 0; v < mesh.vertex_count(); ++v) s.push_back(chart_x(mesh, v) - w);
    for (int t = 0; t < mesh.triangle_count(); ++t) {
      const auto& tri = mesh.triangle(t);
      bool inside = true;
      for (int v : tri) inside = inside && s[v] <= 1e-9;
      // triangles wrapping around the x period span the whole chart
      double lo = 1e9, hi = -1e9;
      for (int v : tri) lo = std::min(lo, s[v]), hi = std::max(hi, s[v]);
      if (inside && hi - lo < 1.0) triangles.push_back(t);
    }
  }

  Annulus annulus() const { return make_annulus(mesh, triangles, s); }

  // Straight planar triangles with corners exp(s) (cos phi, sin phi), as a
  // per-triangle metric pulled back to the chart frame.
  InducedMetric planar_metric() const {
    auto m = surface_metric(mesh);
    for (int t : triangles) {
      const auto& tri = mesh.triangle(t);
      const auto& c = mesh.geometry(t).frame.corners;
      std::array<Eigen::Vector2d, 3> p;
      for (int a = 0; a < 3; ++a) {
        const double phi = mesh.position(tri[a]).y();
        p[a] = std::exp(s[tri[a]]) * Eigen::Vector2d(std::cos(phi), std::sin(phi));
      }
      Eigen::Matrix2d dp, dc;
      dp << p[1] - p[0], p[2] - p[0];
      dc << c[1] - c[0], c[2] - c[0];
      const Eigen::Matrix2d j = dp * dc.inverse();
      m.g[t] = j.transpose() * j;
    }
    return m;
  }
};

const Strip& strip() {
  static const Strip s;
  return s;
}

}  // namespace

TEST(InducedMetric, LinearFieldOnTorus) {
  const auto mesh = build_flat_torus(8, 8, 1.0, 1.0);
  // cells away from the periodic seam of the chart
  TriangleSet cells;
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    bool ok = true;
    for (int v : mesh.triangle(t)) ok = ok && chart_x(mesh, v) <= 0.5;
    if (ok) cells.push_back(t);
  }
  std::vector<double> u(mesh.vertex_count());
  for (int v = 0; v < mesh.vertex_count(); ++v) u[v] = 0.6 * chart_x(mesh, v);
  const auto g = induced_metric(mesh, u, cells);
  for (int t : cells) {
    EXPECT_NEAR(g[t](0, 0), 1.0 - 0.36, 1e-12);
    EXPECT_NEAR(g[t](1, 1), 1.0, 1e-12);
    EXPECT_NEAR(g[t](0, 1), 0.0, 1e-12);
  }
  for (int v = 0; v < mesh.vertex_count(); ++v) u[v] = 1.2 * chart_x(mesh, v);
  try {
    induced_metric(mesh, u, cells);
    FAIL();
  } catch (const NotSpacelikeError& e) {
    EXPECT_EQ(e.code(), ErrorCode::not_spacelike);
    EXPECT_EQ(e.triangle(), cells.front());
  }
}

TEST(Harmonicity, ConstantFieldIsExactlyHarmonic) {
  const auto& mesh = sphere(3);
  const std::vector<double> u(mesh.vertex_count(), 0.7);
  const auto r = harmonicity_residual(mesh, u, all_triangles(mesh));
  EXPECT_EQ(r.vertices.size(), static_cast<std::size_t>(mesh.vertex_count()));
  EXPECT_EQ(r.sup, 0.0);
  EXPECT_EQ(r.rms, 0.0);
}

TEST(Harmonicity, MatchesMeanCurvatureOperator) {
  // Laplace-Beltrami of u in g_u has the same numerator as the mean curvature
  // operator; only the dual area differs.
  const auto& mesh = sphere(3);
  std::vector<double> u(mesh.vertex_count());
  for (int v = 0; v < mesh.vertex_count(); ++v) u[v] = 0.3 * mesh.position(v).z() + 0.2 * mesh.position(v).x() * mesh.position(v).y();
  const auto tris = all_triangles(mesh);
  std::vector<int> verts(mesh.vertex_count());
  std::iota(verts.begin(), verts.end(), 0);
  const auto h = harmonicity_residual(mesh, u, tris, verts);
  const auto m = mc_residual(mesh, tris, u, verts);
  std::vector<double> dual_g(mesh.vertex_count(), 0.0);
  for (int t : tris) {
    const double g2 = triangle_gradient(mesh, t, u).squaredNorm();
    for (int v : mesh.triangle(t)) dual_g[v] += mesh.geometry(t).area * std::sqrt(1.0 - g2) / 3.0;
  }
  for (int v : verts) EXPECT_NEAR(h.values[v] * dual_g[v], m.values[v] * mesh.dual_area(v), 1e-13);
  EXPECT_GT(h.sup, 0.1);
}

TEST(AnnulusModulus, FlatStripIsExact) {
  const auto& st = strip();
  const auto ann = st.annulus();
  EXPECT_EQ(ann.inner_loop.size(), 64u);
  EXPECT_EQ(ann.outer_loop.size(), 64u);
  for (int v : ann.inner_loop) EXPECT_NEAR(st.s[v], -2.0 * std::numbers::pi, 1e-9);
  EXPECT_NEAR(annulus_modulus(st.mesh, surface_metric(st.mesh), ann), 1.0, 1e-10);
}

TEST(AnnulusModulus, PlanarRoundAnnulus) {
  // r < |z| < 1 with r = exp(-2 pi) has modulus 1
  const auto& st = strip();
  EXPECT_NEAR(annulus_modulus(st.mesh, st.planar_metric(), st.annulus()), 1.0, 0.03);
}

TEST(AnnulusModulus, InvariantUnderConstantScaling) {
  const auto& st = strip();
  auto metric = st.planar_metric();
  const double m = annulus_modulus(st.mesh, metric, st.annulus());
  for (auto& g : metric.g) g *= 4.0;
  EXPECT_NEAR(annulus_modulus(st.mesh, metric, st.annulus()), m, 1e-10);
}

TEST(AnnulusModulus, GeodesicAnnulusOnSphere) {
  const auto& mesh = sphere(5);
  const double a = 0.3, b = 1.0;
  const auto ann = make_geodesic_annulus(mesh, 0, a, b);
  const double exact = std::log(std::tan(b / 2) / std::tan(a / 2)) / (2 * std::numbers::pi);
  EXPECT_NEAR(annulus_modulus(mesh, surface_metric(mesh), ann), exact, 0.03 * exact);
}

TEST(AnnulusModulus, RejectsNonAnnuli) {
  const auto& mesh = sphere(3);
  const auto d = geodesic_distance(mesh, 0);
  try {
    make_annulus(mesh, detail::metric_disk(mesh, d, 0, 0.8), d.values);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::invalid_topology);
  }
  EXPECT_THROW(make_geodesic_annulus(mesh, 0, 0.5, 0.4), Error);
}

TEST(AnnulusChart, PlanarAnnulusGivesLogPolar) {
  const auto& st = strip();
  const auto chart = build_annulus_chart(st.mesh, st.planar_metric(), st.annulus());
  EXPECT_NEAR(chart.period, chart.energy, 1e-12);
  EXPECT_LT(chart.closure_error, 1e-8 * chart.period);
  // chart x is log|z| + 2 pi and chart y is arg z, up to a constant and orientation
  const double diameter = 2.0 * std::numbers::pi;
  const int v0 = chart.annulus.outer_loop.front();
  const double phi0 = st.mesh.position(v0).y();
  const double y0 = chart.scale * chart.theta[v0];
  double sign = 0.0, err = 0.0;
  for (int v : set_vertices(st.mesh, chart.annulus.triangles)) {
    err = std::max(err, std::abs(chart.scale * chart.psi[v] - (st.s[v] + diameter)));
    double dy = chart.scale * chart.theta[v] - y0;
    double dphi = st.mesh.position(v).y() - phi0;
    dy -= diameter * std::round(dy / diameter);
    dphi -= diameter * std::round(dphi / diameter);
    if (sign == 0.0 && std::abs(dphi) > 0.5) sign = dy * dphi > 0 ? 1.0 : -1.0;
    if (sign != 0.0) {
      double e = dy - sign * dphi;
      e -= diameter * std::round(e / diameter);
      err = std::max(err, std::abs(e));
    }
  }
  EXPECT_LT(err, 0.03 * diameter);
  EXPECT_LT(chart.cauchy_riemann, 5.0 * st.mesh.mesh_size());
}

TEST(ConeProfile, AntipodalSolution) {
  const auto& g = antipodal_solution();
  for (int i = 0; i < 2; ++i) {
    const auto prof = cone_tangency_profile(g, i, 6);
    EXPECT_TRUE(prof.truncated);
    EXPECT_TRUE(prof.monotone());
    EXPECT_GT(prof.terminal(), 0.9);
    EXPECT_TRUE(prof.local_extremum);
    EXPECT_EQ(prof.extremum_sign, i == 0 ? 1 : -1);
    EXPECT_DOUBLE_EQ(prof.rings.back().inner_radius, 0.0);
  }
}

TEST(ConeProfile, ConstantSolutionHasNoExtremum) {
  const auto& mesh = sphere(3);
  const auto c = antipodal(0.4, 0.4);
  const std::vector<double> u(mesh.vertex_count(), 0.4);
  const auto prof = cone_tangency_profile(mesh, c, u, 0, 3);
  EXPECT_FALSE(prof.local_extremum);
  for (const auto& r : prof.rings) EXPECT_EQ(r.max_gradient, 0.0);
  EXPECT_THROW(cone_tangency_profile(mesh, c, u, 2, 3), Error);
}

TEST(Hopf, SolutionAgreesAndPerturbationDoesNot) {
  const auto& mesh = sphere(5);
  const auto g = solve_singular(mesh, antipodal(0.0, 2.0), SolverSettings{});
  const auto ann = make_geodesic_annulus(mesh, 0, std::numbers::pi / 3, 2 * std::numbers::pi / 3);
  const auto chart = build_annulus_chart(mesh, induced_metric(mesh, g.values, ann.triangles), ann);
  const double base = hopf_agreement(mesh, g.values, chart);
  EXPECT_LT(base, 0.1);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> noise(-1.0, 1.0);
  auto u = g.values;
  for (int v = 0; v < mesh.vertex_count(); ++v) u[v] += 0.5 * mesh.mesh_size() * noise(rng);
  EXPECT_GT(hopf_agreement(mesh, u, chart), 5.0 * base);
}

TEST(Hopf, ResidualDecaysUnderRefinement) {
  double prev = 1.0;
  for (int level : {4, 5}) {
    const auto& mesh = sphere(level);
    const auto g = level == 4 ? antipodal_solution() : solve_singular(mesh, antipodal(0.0, 0.8), SolverSettings{});
    const auto ann = make_geodesic_annulus(mesh, 0, std::numbers::pi / 3, 2 * std::numbers::pi / 3);
    const auto chart = build_annulus_chart(mesh, induced_metric(mesh, g.values, ann.triangles), ann);
    const double r = hopf_agreement(mesh, g.values, chart);
    EXPECT_LT(r, prev);
    prev = r;
  }
}

TEST(Verify, AntipodalReport) {
  const auto& g = antipodal_solution();
  const auto rep = verify(g);
  EXPECT_TRUE(rep.max_principle_ok);
  EXPECT_TRUE(rep.not_spacelike_triangles.empty());
  EXPECT_GE(rep.jacobian_min, 1.0);
  ASSERT_EQ(rep.cone_profiles.size(), 2u);
  ASSERT_EQ(rep.end_moduli.size(), 2u) << (rep.notes.empty() ? "" : rep.notes.front());
  EXPECT_FALSE(rep.end_moduli[0].surface_moduli.empty());
  EXPECT_EQ(rep.local_extremum_ok, (std::vector<char>{1, 1}));
  EXPECT_TRUE(std::isfinite(rep.hopf_residual)) << (rep.notes.empty() ? "" : rep.notes.back());
  const auto j = report_to_json(rep);
  for (const char* key : {"max_principle_ok", "harmonicity_residual", "cone_profiles", "end_moduli", "hopf_residual",
                          "jacobian_min", "not_spacelike_triangles"})
    EXPECT_TRUE(j.contains(key)) << key;
}

TEST(Verify, FlagsTimelikeTrianglesWithoutThrowing) {
  const auto& mesh = sphere(3);
  const auto c = antipodal(0.0, 0.8);
  std::vector<double> u(mesh.vertex_count());
  for (int v = 0; v < mesh.vertex_count(); ++v) u[v] = 0.4 + 1.5 * mesh.position(v).x();
  VerificationReport rep;
  ASSERT_NO_THROW(rep = verify(mesh, c, u));
  EXPECT_FALSE(rep.not_spacelike_triangles.empty());
  EXPECT_FALSE(rep.max_principle_ok);
}
