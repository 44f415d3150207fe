#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "pmelab/config.hpp"
#include "pmelab/errors.hpp"
#include "pmelab/io_util.hpp"
#include "pmelab/solver.hpp"

using namespace pmelab;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("pmelab_cfg_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path file(const std::string& name, const std::string& content) {
    const fs::path p = path / name;
    std::ofstream(p) << content;
    return p;
  }
};

const char* kMinimalConfig = R"(# minimal run
[manifold]
kind = euclidean
dimension = 3

[problem]
m = 2.0
measure = atom:1.0
)";

}  // namespace

TEST_CASE("minimal config parses with defaults") {
  TempDir tmp;
  const auto cfg = parse_config(tmp.file("run.ini", kMinimalConfig).string());
  CHECK(cfg.manifold_kind == "euclidean");
  CHECK(cfg.dimension == 3);
  CHECK(cfg.m == 2.0);
  CHECK(cfg.measure.size() == 1);
  CHECK(cfg.measure[0].mass == 1.0);
  CHECK(cfg.solver.cells == 1024);
  CHECK(cfg.output_directory == "out");
  auto profile = cfg.build_profile();
  CHECK(profile->dimension() == 3);
}

TEST_CASE("all validation errors are collected, not just the first") {
  TempDir tmp;
  const auto path = tmp.file("bad.ini", R"(
[manifold]
kind = euclidean
dimension = 1

[problem]
m = 0.8
mystery_key = 1

[solver]
cells = banana
)");
  try {
    parse_config(path.string());
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("dimension must be >= 2") != std::string::npos);
    CHECK(msg.find("m must exceed 1") != std::string::npos);
    CHECK(msg.find("mystery_key") != std::string::npos);
    CHECK(msg.find("expected an integer") != std::string::npos);
    CHECK(msg.find("line 10") != std::string::npos);  // cells = banana
  }
}

TEST_CASE("unknown sections and malformed lines are rejected") {
  TempDir tmp;
  const auto path = tmp.file("bad2.ini", R"(
[manifold]
kind = hyperbolic
dimension = 3

[frobnicator]
x = 1

[problem]
this line has no equals sign
)");
  CHECK_THROWS_WITH_AS(parse_config(path.string()),
                       doctest::Contains("unknown section [frobnicator]"), ValidationError);
}

TEST_CASE("measure grammar") {
  TempDir tmp;
  const auto path = tmp.file("m.ini", R"(
[manifold]
kind = euclidean
dimension = 3

[problem]
m = 2.0
measure = atom:0.5 + shell:1.0,1.0,2.0 + bump:0.25,0.5,0.2
)");
  const auto cfg = parse_config(path.string());
  REQUIRE(cfg.measure.size() == 3);
  CHECK(cfg.measure[0].kind == MeasureTerm::Kind::Atom);
  CHECK(cfg.measure[1].kind == MeasureTerm::Kind::Shell);
  CHECK(cfg.measure[1].a == 1.0);
  CHECK(cfg.measure[2].kind == MeasureTerm::Kind::Bump);

  // Realize on a grid: total mass adds up exactly.
  auto profile = cfg.build_profile();
  auto grid = build_grid(profile, 4.0, 512, 1.0);
  const RadialMeasure mu = cfg.build_measure(grid);
  CHECK(mu.atom_mass() == 0.5);
  CHECK(mu.total_mass(*profile) == doctest::Approx(1.75).epsilon(1e-12));

  const auto bad = tmp.file("mbad.ini", R"(
[manifold]
kind = euclidean
dimension = 3

[problem]
measure = shell:1.0,2.0,1.0
)");
  CHECK_THROWS_WITH_AS(parse_config(bad.string()), doctest::Contains("inner < outer"),
                       ValidationError);
}

TEST_CASE("radii lists: explicit and logspace") {
  TempDir tmp;
  const auto path = tmp.file("r.ini", R"(
[manifold]
kind = euclidean
dimension = 3

[green]
radii = logspace:0.1,10,5

[meanvalue]
radii = 0.5, 1.0, 2.0
)");
  const auto cfg = parse_config(path.string());
  REQUIRE(cfg.green_radii.size() == 5);
  CHECK(cfg.green_radii.front() == doctest::Approx(0.1));
  CHECK(cfg.green_radii.back() == doctest::Approx(10.0));
  REQUIRE(cfg.meanvalue_radii.size() == 3);
  CHECK(cfg.meanvalue_radii[1] == 1.0);
}

TEST_CASE("tabulated profile file loading") {
  TempDir tmp;
  std::string table = "# r psi\n";
  for (int i = 0; i <= 100; ++i) {
    const double r = i * 0.05;
    table += format_double(r) + " " + format_double(std::sinh(r)) + "\n";
  }
  const auto tpath = tmp.file("profile.tsv", table);
  const auto cpath = tmp.file("t.ini", std::string(R"(
[manifold]
kind = tabulated
dimension = 3
table = )") + tpath.string() + "\n");
  const auto cfg = parse_config(cpath.string());
  auto profile = cfg.build_profile();
  CHECK(profile->kind() == ManifoldProfile::Kind::Tabulated);
  CHECK(profile->psi(1.0) == doctest::Approx(std::sinh(1.0)).epsilon(1e-6));

  const auto missing = tmp.file("miss.ini", R"(
[manifold]
kind = tabulated
dimension = 3
table = /nonexistent/file.tsv
)");
  CHECK_THROWS_WITH_AS(parse_config(missing.string()), doctest::Contains("does not exist"),
                       ValidationError);
}

TEST_CASE("schedules must pair up") {
  TempDir tmp;
  const auto path = tmp.file("s.ini", R"(
[manifold]
kind = euclidean
dimension = 3

[problem]
radius_schedule = 4, 8
eps_schedule = 0.01
)");
  CHECK_THROWS_WITH_AS(parse_config(path.string()), doctest::Contains("equal length"),
                       ValidationError);
}

TEST_CASE("atomic file writes") {
  TempDir tmp;
  const fs::path p = tmp.path / "sub" / "file.txt";
  write_file_atomic(p, "hello\n");
  std::ifstream in(p);
  std::string content((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
  CHECK(content == "hello\n");
  CHECK_FALSE(fs::exists(tmp.path / "sub" / "file.txt.tmp"));
  // Overwrite keeps the new content.
  write_file_atomic(p, "world\n");
  std::ifstream in2(p);
  std::string c2((std::istreambuf_iterator<char>(in2)), std::istreambuf_iterator<char>());
  CHECK(c2 == "world\n");
}

TEST_CASE("17 significant digit round trip") {
  for (double v : {1.0 / 3.0, M_PI, 1e-300, 6.02214076e23, -0.0}) {
    const std::string s = format_double(v);
    CHECK(std::stod(s) == v);
  }
}
