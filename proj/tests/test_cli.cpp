#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "maxgraph/cli.hpp"

#ifndef MAXGRAPH_DATA_DIR
#error "MAXGRAPH_DATA_DIR must point at the sample configurations"
#endif

namespace fs = std::filesystem;
using maxgraph::cli::run;

namespace {

std::string data(const std::string& name) { return std::string(MAXGRAPH_DATA_DIR) + "/" + name; }

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("maxgraph_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct Result {
  int code;
  std::string out, err;
};

Result call(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST(Cli, UsageErrorsExit64) {
  auto r = call({"frobnicate"});
  EXPECT_EQ(r.code, 64);
  EXPECT_FALSE(r.err.empty());
  EXPECT_EQ(call({"solve", "--surface", "sphere:2"}).code, 64);
  EXPECT_EQ(call({"mesh", "--surface", "sphere:2", "--bogus"}).code, 64);
  EXPECT_EQ(call({}).code, 64);
}

TEST(Cli, MeshWritesObjSidecarAndManifest) {
  const auto dir = scratch("mesh");
  const auto r = call({"mesh", "--surface", "sphere:2", "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "mesh.obj"));
  const auto side = nlohmann::json::parse(slurp(dir / "mesh.json"));
  EXPECT_EQ(side["vertex_count"], 162);
  const auto man = nlohmann::json::parse(slurp(dir / "manifest.json"));
  EXPECT_EQ(man["command"], "mesh");
  EXPECT_EQ(man["surface"], "sphere:2");
  EXPECT_EQ(man["threads"], 1);
}

TEST(Cli, SolveWritesOutputsAndRerunIsByteIdentical) {
  const auto a = scratch("solve_a"), b = scratch("solve_b");
  for (const auto& dir : {a, b}) {
    const auto r = call({"solve", "--surface", "sphere:4", "--config", data("antipodal.json"), "--settings",
                         data("settings.json"), "--out", dir.string()});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  for (const char* f : {"field.csv", "field.vtk", "history.csv", "solution.json"}) {
    ASSERT_TRUE(fs::exists(a / f)) << f;
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
  EXPECT_EQ(slurp(a / "field.csv").rfind("vertex_id,u\n", 0), 0u);
  EXPECT_EQ(nlohmann::json::parse(slurp(a / "manifest.json"))["config"], data("antipodal.json"));
}

TEST(Cli, NotSpacelikeExits1NamingThePair) {
  const auto r = call({"solve", "--surface", "sphere:3", "--config", data("antipodal_steep.json"), "--out",
                       scratch("steep").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("points 1 and 2"), std::string::npos) << r.err;
}

TEST(Cli, MissingInputAndConvergenceExitCodes) {
  const auto r = call({"solve", "--surface", "sphere:2", "--config", "/nonexistent/config.json", "--out",
                       scratch("missing").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("/nonexistent/config.json"), std::string::npos);
  const auto dir = scratch("noconv");
  fs::create_directories(dir);
  std::ofstream(dir / "settings.json") << R"({"max_iters": 1})";
  const auto c = call({"solve", "--surface", "sphere:3", "--config", data("antipodal.json"), "--settings",
                       (dir / "settings.json").string(), "--out", dir.string()});
  EXPECT_EQ(c.code, 2) << c.err;
}

TEST(Cli, VerifyFromFieldFile) {
  const auto dir = scratch("verify");
  ASSERT_EQ(call({"solve", "--surface", "sphere:4", "--config", data("antipodal.json"), "--out", dir.string()}).code, 0);
  const auto r = call({"verify", "--surface", "sphere:4", "--config", data("antipodal.json"), "--field",
                       (dir / "field.csv").string(), "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rep = nlohmann::json::parse(slurp(dir / "report.json"));
  EXPECT_EQ(rep["max_principle_ok"], true);
  EXPECT_TRUE(fs::exists(dir / "cone_profiles.csv"));
  EXPECT_TRUE(fs::exists(dir / "end_moduli.csv"));
}

TEST(Cli, OraclePrintsSelfConsistentConstant) {
  const auto r = call({"oracle", "--tau", "0.8", "--samples", "4"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(r.out);
  std::string tag;
  double c = 0;
  in >> tag >> c;
  ASSERT_EQ(tag, "c");
  // Simpson quadrature of c / sqrt(sin^2 + c^2) over [0, pi], independent of the oracle's elliptic form.
  const int n = 200000;
  const double h = std::numbers::pi / n;
  double sum = 0;
  for (int k = 0; k <= n; ++k) {
    const double s = std::sin(k * h);
    const double w = (k == 0 || k == n) ? 1 : (k % 2 ? 4 : 2);
    sum += w * c / std::sqrt(s * s + c * c);
  }
  EXPECT_NEAR(sum * h / 3, 0.8, 1e-10);
  EXPECT_NE(r.out.find("theta,u,du\n"), std::string::npos);
}

TEST(Cli, ModuliTablesAreReproducible) {
  const auto a = scratch("moduli_a"), b = scratch("moduli_b");
  for (const auto& dir : {a, b})
    ASSERT_EQ(call({"moduli", "--surface", "sphere:4", "--manifest", data("moduli_manifest.json"), "--out",
                    dir.string()})
                  .code,
              0);
  for (const char* f : {"samples.json", "continuity_0.csv", "continuity_2.csv", "openness.csv"}) {
    ASSERT_TRUE(fs::exists(a / f)) << f;
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
  const auto c = scratch("moduli_seed");
  ASSERT_EQ(call({"moduli", "--surface", "sphere:4", "--manifest", data("moduli_manifest.json"), "--seed", "8",
                  "--out", c.string()})
                .code,
            0);
  EXPECT_NE(slurp(a / "samples.json"), slurp(c / "samples.json"));
  EXPECT_EQ(nlohmann::json::parse(slurp(c / "moduli_manifest.json"))["seed"], 8);
}
