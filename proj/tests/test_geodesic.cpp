#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "maxgraph/geodesic.hpp"

using namespace maxgraph;

namespace {

int torus_vertex(const SurfaceMesh& mesh, double x, double y) {
  int best = -1;
  double best_d = 1e9;
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    const double d = std::hypot(mesh.position(v).x() - x, mesh.position(v).y() - y);
    if (d < best_d) best_d = d, best = v;
  }
  return best;
}

// Periodic Euclidean distance: minimum over the nine translates.
double periodic_distance(double x0, double y0, double x1, double y1, double lx, double ly) {
  double best = 1e9;
  for (int i = -1; i <= 1; ++i)
    for (int j = -1; j <= 1; ++j) best = std::min(best, std::hypot(x1 + i * lx - x0, y1 + j * ly - y0));
  return best;
}

}  // namespace

TEST(GeodesicDistance, AntipodalOnSphere) {
  const auto mesh = build_icosphere(5);
  const auto d = geodesic_distance(mesh, 0);
  EXPECT_NEAR(d[11], std::numbers::pi, 0.02 * std::numbers::pi);
  EXPECT_EQ(d[0], 0.0);
}

TEST(GeodesicDistance, TorusDiagonal) {
  const auto mesh = build_flat_torus(64, 64, 1.0, 1.0);
  const int a = torus_vertex(mesh, 0.0, 0.0), b = torus_vertex(mesh, 0.5, 0.5);
  const auto d = geodesic_distance(mesh, a);
  const double oracle = periodic_distance(0.0, 0.0, 0.5, 0.5, 1.0, 1.0);
  EXPECT_NEAR(oracle, std::sqrt(2.0) / 2.0, 1e-15);
  EXPECT_NEAR(d[b], oracle, 0.02 * oracle);
}

TEST(GeodesicDistance, TorusMatchesPeriodicEuclidean) {
  const auto mesh = build_flat_torus(32, 24, 1.0, 0.75);
  const auto d = geodesic_distance(mesh, 37);
  const auto& p = mesh.position(37);
  for (int v = 0; v < mesh.vertex_count(); v += 7) {
    const double oracle = periodic_distance(p.x(), p.y(), mesh.position(v).x(), mesh.position(v).y(), 1.0, 0.75);
    EXPECT_GE(d[v], oracle - 1e-12);
    EXPECT_LE(d[v], oracle * 1.02 + 1e-12);
  }
}

TEST(GeodesicDistance, SphereBoundedByPiAndGreatCircle) {
  const auto mesh = build_icosphere(4);
  const auto d = geodesic_distance(mesh, 17);
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    EXPECT_LE(d[v], std::numbers::pi * 1.02);
    const double exact = std::acos(std::clamp(mesh.position(17).dot(mesh.position(v)), -1.0, 1.0));
    EXPECT_NEAR(d[v], exact, 0.02 * exact + 1e-12);
  }
}

TEST(GeodesicDistance, SymmetryAndTriangleInequality) {
  const auto mesh = build_icosphere(4);
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> pick(0, mesh.vertex_count() - 1);
  for (int trial = 0; trial < 100; ++trial) {
    const int a = pick(rng), b = pick(rng), c = pick(rng);
    const auto da = geodesic_distance(mesh, a);
    const auto db = geodesic_distance(mesh, b);
    EXPECT_NEAR(da[b], db[a], 1e-9);
    EXPECT_LE(da[c], da[b] + db[c] + 1e-9);
  }
}

TEST(GeodesicDistance, RefinementChangesLessThanMeshSize) {
  for (int level : {3, 4}) {
    const auto coarse = build_icosphere(level);
    const auto fine = build_icosphere(level + 1);
    const auto dc = geodesic_distance(coarse, 5);
    const auto df = geodesic_distance(fine, 5);
    for (int v = 0; v < coarse.vertex_count(); ++v) EXPECT_LT(std::abs(dc[v] - df[v]), coarse.mesh_size());
  }
}

TEST(GeodesicDistance, ParallelSourcesMatchSerial) {
  const auto mesh = build_icosphere(3);
  std::vector<std::vector<double>> serial(6), threaded(6);
  parallel_for(6, 1, [&](int i) { serial[i] = geodesic_distance(mesh, 10 * i).values; });
  parallel_for(6, 3, [&](int i) { threaded[i] = geodesic_distance(mesh, 10 * i).values; });
  EXPECT_EQ(serial, threaded);
}

TEST(GeodesicDistance, MultiSourceIsMinimumOfSingles) {
  const auto mesh = build_icosphere(3);
  const std::vector<int> sources{0, 50, 300};
  const auto multi = distance_to_set(mesh, sources);
  std::vector<DistanceField> singles;
  for (int s : sources) singles.push_back(geodesic_distance(mesh, s));
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    double m = 1e9;
    for (const auto& f : singles) m = std::min(m, f[v]);
    EXPECT_DOUBLE_EQ(multi[v], m);
  }
}

TEST(GeodesicDistance, InvalidSource) {
  const auto mesh = build_icosphere(1);
  EXPECT_THROW(geodesic_distance(mesh, mesh.vertex_count()), Error);
}
