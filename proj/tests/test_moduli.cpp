#include <cmath>
#include <map>
#include <set>

#include <gtest/gtest.h>

#include "maxgraph/moduli.hpp"

using namespace maxgraph;

namespace {

const SurfaceMesh& sphere(int level) {
  static std::map<int, SurfaceMesh> cache;
  auto it = cache.find(level);
  if (it == cache.end()) it = cache.emplace(level, build_icosphere(level)).first;
  return it->second;
}

SingularityConfig antipodal(double t0, double t1) { return {{{0, t0}, {11, t1}}, {}}; }

}  // namespace

TEST(SampleConfigs, ValidDeterministicAndWitnessFirst) {
  const auto& mesh = sphere(4);
  const auto a = sample_configs(mesh, 2, 10, 7);
  ASSERT_EQ(a.size(), 10u);
  for (const auto& c : a) {
    EXPECT_NO_THROW(validate_spacelike(mesh, c));
    const auto d = geodesic_distance(mesh, c.points[0].vertex);
    EXPECT_GE(d[c.points[1].vertex], 4 * mesh.mesh_size());
    EXPECT_LE(std::abs(c.points[0].t - c.points[1].t), 0.5 * d[c.points[1].vertex] + 1e-12);
  }
  const auto b = sample_configs(mesh, 2, 10, 7);
  for (int k = 0; k < 10; ++k) EXPECT_EQ(a[k].points, b[k].points);
  EXPECT_NE(sample_configs(mesh, 2, 1, 8)[0].points, a[0].points);

  const auto w = sample_configs(mesh, 4, 3, 11);
  EXPECT_EQ(w[0].points[0].t, w[0].points[1].t);
  EXPECT_EQ(w[0].points[1].t, w[0].points[2].t);
  EXPECT_NE(w[0].points[2].t, w[0].points[3].t);
}

TEST(SampleConfigs, Exhaustion) {
  const auto& mesh = sphere(1);
  try {
    sample_configs(mesh, 5, 1, 3, {.min_separation = 100.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::sampling_exhausted);
  }
  EXPECT_THROW(sample_configs(mesh, 1, 1, 3), Error);
}

TEST(ContinuityProbe, ZeroDeltaAndMonotoneChanges) {
  const auto& mesh = sphere(4);
  const SolverSettings s;
  const auto table = continuity_probe(mesh, antipodal(0.0, 0.8), {0.01, 0.0, 0.04, 0.02}, s, 1);
  ASSERT_EQ(table.rows.size(), 4u);
  for (std::size_t k = 1; k < table.rows.size(); ++k) EXPECT_LT(table.rows[k].delta, table.rows[k - 1].delta);
  EXPECT_LE(table.rows.back().change, 10 * s.newton_tol);
  EXPECT_TRUE(table.monotone());
}

TEST(ContinuityProbe, LipschitzBoundAndSkippedRows) {
  const auto& mesh = sphere(4);
  const auto table = continuity_probe(mesh, antipodal(0.0, 0.8), {0.04, 0.02, 0.01, 5.0}, {}, 1);
  ASSERT_EQ(table.rows.size(), 4u);
  EXPECT_TRUE(table.rows[0].skipped);
  EXPECT_FALSE(table.rows[0].note.empty());
  EXPECT_TRUE(table.monotone());
  EXPECT_LE(table.max_ratio(), 5.0);
  EXPECT_GT(table.max_ratio(), 0.0);
}

TEST(ContinuityProbe, CommonShiftIsEquivariant) {
  const SolverSettings s;
  EXPECT_LE(shift_equivariance_error(sphere(4), antipodal(0.0, 0.8), 0.37, s), 10 * s.newton_tol);
}

TEST(Marks, EnumerationAndGuard) {
  EXPECT_EQ(enumerate_marks(antipodal(0, 1)).size(), 2u);
  SingularityConfig three{{{0, 0.0}, {5, 0.1}, {9, 0.2}}, {}};
  const auto marks = enumerate_marks(three);
  EXPECT_EQ(marks.size(), 6u);
  EXPECT_EQ(std::set<std::vector<int>>(marks.begin(), marks.end()).size(), 6u);
  SingularityConfig eight;
  for (int k = 0; k < 8; ++k) eight.points.push_back({k, 0.0});
  try {
    enumerate_marks(eight);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::resource);
  }
  EXPECT_EQ(reorder(three, {2, 0, 1}).points[0].vertex, 9);
}

TEST(Marks, FieldIndependentOfOrdering) {
  const auto& mesh = sphere(4);
  const auto c = sample_configs(mesh, 3, 1, 5, {.min_separation = 16.0})[0];
  const SolverSettings s;
  const MarkedGraph first{solve_singular(mesh, c, s), {0, 1, 2}};
  for (const auto& mark : enumerate_marks(c)) {
    const MarkedGraph g{solve_singular(mesh, reorder(c, mark), s), mark};
    EXPECT_TRUE(same_unmarked(unmark(g), unmark(first), 10 * s.newton_tol));
  }
}

TEST(Openness, PerturbedSamplesKeepTheirSingularities) {
  const auto& mesh = sphere(4);
  const auto configs = sample_configs(mesh, 2, 2, 3, {.min_separation = 16.0});
  for (const auto& row : openness_probe(mesh, configs, {})) {
    EXPECT_TRUE(row.solved) << row.note;
    EXPECT_TRUE(row.detected);
    EXPECT_EQ(row.terminal_gradients.size(), 2u);
    EXPECT_GT(row.delta, 0.0);
  }
}

TEST(ModuliManifest, JsonRoundTrip) {
  const auto mf = manifest_from_json(nlohmann::json::parse(R"({"seed": 9, "m": 3, "count": 4})"));
  EXPECT_EQ(mf.seed, 9u);
  EXPECT_EQ(mf.deltas, (std::vector<double>{0.04, 0.02, 0.01}));
  EXPECT_EQ(manifest_to_json(mf)["m"], 3);
  EXPECT_THROW(manifest_from_json(nlohmann::json::parse(R"({"m": 1})")), Error);
}
