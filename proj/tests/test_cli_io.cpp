#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "msgfem/config.hpp"
#include "msgfem/experiment.hpp"
#include "msgfem/io.hpp"

using namespace msgfem;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int count_lines(const std::string& s) { return static_cast<int>(std::count(s.begin(), s.end(), '\n')); }

std::filesystem::path scratch(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("msgfem_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

} // namespace

TEST_CASE("defaults") {
  const RunConfig c = parse_config("");
  CHECK(c.mesh_n == 64);
  CHECK(c.grid_m == 4);
  CHECK(c.overlap == 2);
  CHECK(c.oversampling == 4);
  CHECK(c.gamma0_sq == 10.0);
  CHECK(c == RunConfig{});
}

TEST_CASE("parsing and validation") {
  const RunConfig c = parse_config("# comment\n mesh_n = 32  # trailing\n\ncoefficient = checkerboard\n"
                                   "contrast = 1e4\nsweep_nj = 1, 2,3\nseed = 9\n");
  CHECK(c.mesh_n == 32);
  CHECK(c.coefficient.kind == CoefficientSpec::Kind::checkerboard);
  CHECK(c.coefficient.contrast == 1e4);
  CHECK(c.sweep_nj == std::vector<int>{1, 2, 3});
  CHECK(c.seed == 9u);

  auto rejected = [](const std::string& text, int line, const std::string& key) {
    try {
      parse_config(text);
    } catch (const ConfigError& e) {
      CHECK(e.line() == line);
      CHECK(e.key() == key);
      return;
    }
    FAIL("accepted: " << text);
  };
  rejected("mesh_n = 0\n", 1, "mesh_n");
  rejected("\nbogus = 3\n", 2, "bogus");
  rejected("mesh_n = 8\nmesh_n = 16\n", 2, "mesh_n");
  rejected("mesh_n = eight\n", 1, "mesh_n");
  rejected("gamma0_sq\n", 1, "gamma0_sq");
  rejected("mesh_n = 6\ncoefficient = checkerboard\n", 0, "block");
  rejected("mesh_n = 6\ncoefficient = checkerboard\nblock = 4\n", 3, "block");
  rejected("overlap = 1\n", 1, "overlap");
  rejected("source = cosine\n", 1, "source");
  try {
    parse_config("mesh_n = 0\n");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("n >= 1") != std::string::npos);
  }
}

TEST_CASE("serialize round trip") {
  RunConfig c;
  c.mesh_n = 24;
  c.grid_m = 3;
  c.gamma0_sq = 12.345678901234567;
  c.coefficient.kind = CoefficientSpec::Kind::log_uniform;
  c.coefficient.nu_min = 0.1;
  c.coefficient.nu_max = 1e3;
  c.coarse_rule.kind = CoarseRule::Kind::threshold;
  c.coarse_rule.tau = 0.05;
  c.sweep_nj = {2, 4, 6};
  c.checks = false;
  c.out_dir = "results/a";
  const RunConfig back = parse_config(serialize(c));
  CHECK(back == c);
  CHECK(back.gamma0_sq == c.gamma0_sq);
  CHECK(serialize(back) == serialize(c));
}

TEST_CASE("exports") {
  const TriMesh mesh = build_structured_mesh(2);
  std::ostringstream m;
  write_mesh(m, mesh);
  CHECK(count_lines(m.str()) == 4 + 9 + 8 + 8 + 8);
  const Coefficient nu(std::vector<double>(8, 0.1));
  std::ostringstream c;
  write_coefficient(c, nu);
  CHECK(c.str() == "0.1\n0.1\n0.1\n0.1\n0.1\n0.1\n0.1\n0.1\n");
  const Decomposition dec = build_decomposition(mesh, 1, 2, 1);
  std::ostringstream d;
  write_decomposition(d, dec);
  CHECK(count_lines(d.str()) == 2);
  std::ostringstream coo;
  write_matrix_coo(coo, assemble_mass(mesh, ElementSet::all(mesh)).matrix);
  CHECK(count_lines(coo.str()) == 8 * 9);
  std::ostringstream pou;
  write_pou(pou, build_pou(mesh, dec));
  CHECK(pou.str() == "1 1 1 1 1 1 1 1 1\n");
  CHECK(format_double(0.1) == "0.1");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
}

TEST_CASE("small run writes three artifacts, deterministically") {
  const auto dir = scratch("run");
  RunConfig c = parse_config("mesh_n = 16\ngrid_m = 2\noversampling = 2\nsweep_nj = 2,3,4,5,6,7,8,9,10,11,12\n");
  c.out_dir = (dir / "a").string();
  std::ostringstream log;
  const ExperimentResult r1 = run(c, {2, false}, log);
  INFO(log.str());
  CHECK(r1.exit_code == 0);
  for (const char* f : {"checks.json", "eigenvalues.csv", "errors.csv"})
    CHECK(std::filesystem::exists(dir / "a" / f));
  const std::string errors = slurp(dir / "a" / "errors.csv");
  CHECK(count_lines(errors) == 12);
  CHECK(errors.rfind("m,l,l_star,n_j,gamma0,contrast,n_total,relBplusErr,relL2Err,maxSqrtLambdaNext,fitSlope,fitR2\n", 0) == 0);
  CHECK(slurp(dir / "a" / "eigenvalues.csv").rfind("j,k,lambda,is_infinite\n", 0) == 0);

  c.out_dir = (dir / "b").string();
  std::ostringstream log2;
  const ExperimentResult r2 = run(c, {1, false}, log2);
  CHECK(r2.exit_code == 0);
  CHECK(slurp(dir / "a" / "errors.csv") == slurp(dir / "b" / "errors.csv"));
  CHECK(slurp(dir / "a" / "eigenvalues.csv") == slurp(dir / "b" / "eigenvalues.csv"));
  CHECK(slurp(dir / "a" / "checks.json") == slurp(dir / "b" / "checks.json"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("two configurations in one process do not interfere") {
  const auto dir = scratch("iso");
  RunConfig a = parse_config("mesh_n = 8\ngrid_m = 2\noversampling = 1\nchecks = false\n");
  RunConfig b = parse_config("mesh_n = 12\ngrid_m = 3\noversampling = 1\nchecks = false\ncoefficient = checkerboard\n"
                             "contrast = 100\nblock = 2\n");
  a.out_dir = (dir / "a1").string();
  b.out_dir = (dir / "b").string();
  std::ostringstream log;
  run(a, {}, log);
  run(b, {}, log);
  a.out_dir = (dir / "a2").string();
  run(a, {}, log);
  CHECK(slurp(dir / "a1" / "errors.csv") == slurp(dir / "a2" / "errors.csv"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("broken penalty fails the run with exit code 1") {
  const auto dir = scratch("weak");
  RunConfig c = parse_config("mesh_n = 8\ngrid_m = 2\noversampling = 1\ngamma0_sq = 1e-4\n");
  c.out_dir = dir.string();
  std::ostringstream log;
  const ExperimentResult r = run(c, {}, log);
  CHECK(r.exit_code == 1);
  REQUIRE(r.report);
  CHECK(r.report->first_failure()->name == "coercivity");
  CHECK(std::filesystem::exists(dir / "checks.json"));
  std::filesystem::remove_all(dir);
}
