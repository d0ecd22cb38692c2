#include "linetension/harness.hpp"

#include "oracles.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

using namespace linetension;
namespace fs = std::filesystem;

namespace {

nlohmann::json base_config(const std::string& out) {
  nlohmann::json j;
  j["schema"] = 1;
  j["mesh"] = {{"generator", "unit-cube-6tet"}};
  j["field"] = {{"potential_builtin", "quadratic-demo"}, {"burgers_dim", 3}};
  j["psi"] = {{"builtin", "iso"}};
  j["k"] = {2, 3};
  j["sigma"] = {0.5, 0.25};
  j["eps"] = 0.01;
  j["envelope"] = {{"zmax", 2}, {"d", 48}};
  j["seed"] = 7;
  j["out"] = out;
  return j;
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  REQUIRE(f);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("lt_test_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("config validation lists every violation") {
  nlohmann::json j = base_config("x");
  j["k"] = {1, 2};
  j["sigma"] = {-0.5};
  j["format"] = "stl";
  try {
    parse_config(j);
    FAIL("expected validation failure");
  } catch (const std::runtime_error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("k: values must be >= 2") != std::string::npos);
    CHECK(msg.find("sigma: values must be positive") != std::string::npos);
    CHECK(msg.find("format") != std::string::npos);
  }
}

TEST_CASE("config parsing and canonical hashing") {
  const auto cfg = parse_config(base_config("somewhere"));
  CHECK(cfg.ks == std::vector<int>{2, 3});
  CHECK(cfg.envelope.z_max == 2);
  const auto cfg2 = parse_config(base_config("somewhere"));
  CHECK(fnv1a64(cfg.canonical_json()) == fnv1a64(cfg2.canonical_json()));
}

TEST_CASE("approximate run is deterministic byte for byte") {
  TempDir d1("det1"), d2("det2");
  auto j1 = base_config(d1.path.string());
  auto j2 = base_config(d2.path.string());
  std::ostringstream sink;
  REQUIRE(cmd_approximate(parse_config(j1), sink) == 0);
  REQUIRE(cmd_approximate(parse_config(j2), sink) == 0);
  CHECK(slurp(d1.path / "approximation.csv") == slurp(d2.path / "approximation.csv"));
  CHECK(slurp(d1.path / "measure_k2.csv") == slurp(d2.path / "measure_k2.csv"));
  CHECK(slurp(d1.path / "measure_k3.csv") == slurp(d2.path / "measure_k3.csv"));
  CHECK(slurp(d1.path / "summary.txt") == slurp(d2.path / "summary.txt"));
  // manifest carries the config hash and code version
  const std::string manifest = slurp(d1.path / "manifest.json");
  CHECK(manifest.find("config_hash") != std::string::npos);
  CHECK(manifest.find(kCodeVersion) != std::string::npos);

  // the geometry export round-trips exactly
  const auto mu = import_csv_file((d1.path / "measure_k2.csv").string());
  CHECK(mu.size() > 0);
  std::ostringstream out;
  export_csv(mu, out);
  CHECK(out.str() == slurp(d1.path / "measure_k2.csv"));
}

TEST_CASE("energy command writes rows and the recovery measure") {
  TempDir d("energy");
  auto j = base_config(d.path.string());
  j["k"] = {2};
  std::ostringstream sink;
  const int rc = cmd_energy(parse_config(j), sink);
  CHECK(rc == 0);
  const std::string csv = slurp(d.path / "energy.csv");
  CHECK(csv.find("f_inf_full") != std::string::npos);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);  // header + 2 sigma rows
  CHECK(fs::exists(d.path / "recovery_kmax.csv"));
  CHECK(fs::exists(d.path / "summary.txt"));
}

TEST_CASE("envelope command emits certificates per tet") {
  TempDir d("env");
  auto j = base_config(d.path.string());
  std::ostringstream sink;
  REQUIRE(cmd_envelope(parse_config(j), sink) == 0);
  const std::string csv = slurp(d.path / "envelope.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);  // header + 6 tets
  CHECK(csv.find("g_tilde") != std::string::npos);
}

TEST_CASE("verify command runs the invariant suites") {
  TempDir d("verify");
  auto j = base_config(d.path.string());
  std::ostringstream log;
  const int rc = cmd_verify(parse_config(j), log);
  INFO(log.str());
  CHECK(rc == 0);
  CHECK(log.str().find("FAIL") == std::string::npos);
  CHECK(log.str().find("glued measure divergence free") != std::string::npos);
}

TEST_CASE("report regenerates the summary from artifacts") {
  TempDir d("report");
  auto j = base_config(d.path.string());
  std::ostringstream sink;
  REQUIRE(cmd_approximate(parse_config(j), sink) == 0);
  std::ostringstream log;
  CHECK(cmd_report(d.path.string(), log) == 0);
  CHECK(log.str().find("approximation rows") != std::string::npos);
  std::ostringstream nolog;
  CHECK(cmd_report((d.path / "missing").string(), nolog) == 1);
}

TEST_CASE("psi tables integrate with the config") {
  TempDir d("table");
  const std::string table_path = (d.path / "psi.csv").string();
  {
    std::ofstream f(table_path);
    f << "1,0,0,0,0,1.0\n0,1,0,0,0,1.0\n0,0,1,0,0,1.0\n";
  }
  auto j = base_config(d.path.string());
  j["psi"] = {{"table", table_path}, {"c", 1.0}, {"cbar", 2.0}};
  const auto cfg = parse_config(j);
  const Density psi = build_density(cfg);
  CHECK(psi.assumed_elliptic());
  Burgers e1(3);
  e1 << 1, 0, 0;
  CHECK(psi(e1, Vec3(0, 0, 1)) == Catch::Approx(1.0));

  // malformed tables name the offending row
  {
    std::ofstream f(table_path);
    f << "1,0,0,0,0,1.0\n1,0,0,0,0\n";
  }
  CHECK_THROWS_WITH(build_density(cfg), Catch::Matchers::ContainsSubstring("row 2"));
}

TEST_CASE("builtin potentials and meshes resolve") {
  CHECK_THROWS_AS(builtin_potential("nope", 3), std::invalid_argument);
  CHECK_THROWS_AS(make_mesh_generator("nope"), std::invalid_argument);
  const auto mesh = make_mesh_generator("kuhn", 2);
  CHECK(mesh.tets().size() == 48);
}

TEST_CASE("zero field runs to empty outputs with success status") {
  TempDir d("zero");
  auto j = base_config(d.path.string());
  j["field"] = {{"potential_builtin", "zero"}, {"burgers_dim", 3}};
  std::ostringstream sink;
  CHECK(cmd_approximate(parse_config(j), sink) == 0);
  const std::string csv = slurp(d.path / "measure_k2.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1);  // header only
}

TEST_CASE("verify flags a field file with broken normal jumps") {
  TempDir d("badfield");
  // mesh: two tets sharing the x = 0 face; field jumps across it
  const std::string mesh_path = (d.path / "mesh.txt").string();
  {
    std::ofstream f(mesh_path);
    f << "0 0 0  1 0 0  0 1 0  0 0 1\n";
    f << "0 0 0  -1 0 0  0 1 0  0 0 1\n";
  }
  const std::string field_path = (d.path / "field.csv").string();
  {
    std::ofstream f(field_path);
    f << "tet,a11,a12,a13,a21,a22,a23,a31,a32,a33\n";
    f << "0,1,0,0,0,0,0,0,0,0\n";
    f << "1,0,0,0,0,0,0,0,0,0\n";
  }
  nlohmann::json j = base_config(d.path.string());
  j["mesh"] = {{"file", mesh_path}};
  j["field"] = {{"matrix_file", field_path}, {"burgers_dim", 3}};
  std::ostringstream log;
  const int rc = cmd_verify(parse_config(j), log);
  CHECK(rc != 0);
  CHECK(log.str().find("FAIL  normal jumps") != std::string::npos);
}

TEST_CASE("export of 1e5 segments stays under the time budget") {
  PolyhedralCurrent mu(3);
  std::uint64_t st = 1;
  Burgers b(3);
  b << 1, 2, 3;
  for (int i = 0; i < 100000; ++i) {
    const Vec3 p(unit_uniform(st), unit_uniform(st), unit_uniform(st));
    mu.add(p, p + Vec3(0.01, 0, 0), b);
  }
  const auto t0 = std::chrono::steady_clock::now();
  std::ostringstream out;
  export_csv(mu, out);
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  CHECK(dt < 5.0);
  CHECK(std::count(out.str().begin(), out.str().end(), '\n') == 100001);
}
