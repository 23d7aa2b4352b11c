#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <string>

#include "psindy/csv.hpp"
#include "psindy/mapmodel.hpp"

namespace fs = std::filesystem;
using namespace psindy;

namespace {

int psindy_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + PSINDY_CLI_PATH + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("psindy_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

const char* kRc = R"(name = rc
system.name = rc
integration.t1 = 40
integration.n_trajectories = 2
integration.seed = 3
integration.init_box = -1:1
section.kind = strobe
stlsq.lambda = 0.05
)";

}  // namespace

TEST_CASE("discover recovers the identity map from exact pairs") {
  const fs::path dir = scratch("identity");
  write_text(dir / "x1.csv", "x\n0.1\n0.5\n-0.7\n");
  write_text(dir / "x2.csv", "x\n0.1\n0.5\n-0.7\n");
  REQUIRE(psindy_cli("discover --x1 " + q(dir / "x1.csv") + " --x2 " + q(dir / "x2.csv") +
                     " --degree 1 --lambda 0.05 -o " + q(dir)) == 0);
  const MapModel m = load_model(dir / "model.txt");
  CHECK(m.coefficients().active_terms() == 1);
  CHECK(m.xi()(1, 0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("iterating a saturating map increases monotonically") {
  const fs::path dir = scratch("iterate");
  // x -> 1.5 x - 0.5 x^3 has a stable fixed point at 1 approached from below.
  write_text(dir / "x1.csv", "x\n0.1\n0.3\n0.6\n0.9\n1.2\n");
  std::string x2 = "x\n";
  for (double x : {0.1, 0.3, 0.6, 0.9, 1.2}) x2 += std::to_string(1.5 * x - 0.5 * x * x * x) + "\n";
  write_text(dir / "x2.csv", x2);
  REQUIRE(psindy_cli("discover --x1 " + q(dir / "x1.csv") + " --x2 " + q(dir / "x2.csv") +
                     " --degree 3 --lambda 0.01 -o " + q(dir)) == 0);
  REQUIRE(psindy_cli("iterate -m " + q(dir / "model.txt") + " --x0 0.2 -n 50 -o " + q(dir)) == 0);
  const Matrix orbit = read_matrix_csv(dir / "orbit.csv");
  REQUIRE(orbit.rows() == 51);
  for (Eigen::Index n = 1; n < orbit.rows(); ++n) CHECK(orbit(n, 1) >= orbit(n - 1, 1) - 1e-12);
  CHECK(orbit(50, 1) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("exit codes") {
  const fs::path dir = scratch("codes");
  CHECK(psindy_cli("") == 2);
  CHECK(psindy_cli("discover --degree 2") == 2);
  CHECK(psindy_cli("run -c " + q(dir / "missing.cfg") + " -o " + q(dir / "o")) == 4);
  write_text(dir / "bad.cfg", std::string(kRc) + "stlsq.lambda_typo = 1\n");
  CHECK(psindy_cli("run -c " + q(dir / "bad.cfg") + " -o " + q(dir / "o")) == 2);
  write_text(dir / "div.cfg", R"(system.name = logistic
integration.t1 = 20
integration.n_trajectories = 1
integration.init_box = -50:-40
section.kind = strobe
)");
  CHECK(psindy_cli("run -c " + q(dir / "div.cfg") + " -o " + q(dir / "d")) == 3);
  CHECK(read_text(dir / "d" / "report.txt").rfind("status: diverged", 0) == 0);
  write_text(dir / "m.txt", "not a model\n");
  CHECK(psindy_cli("iterate -m " + q(dir / "m.txt") + " --x0 0.1 -o " + q(dir)) == 4);
}

TEST_CASE("chained subcommands reproduce the single-shot run") {
  const fs::path dir = scratch("chain");
  write_text(dir / "rc.cfg", kRc);
  REQUIRE(psindy_cli("run -c " + q(dir / "rc.cfg") + " -o " + q(dir / "run")) == 0);
  REQUIRE(psindy_cli("simulate -c " + q(dir / "rc.cfg") + " -o " + q(dir / "sim")) == 0);
  REQUIRE(psindy_cli("section -c " + q(dir / "rc.cfg") + " " + q(dir / "sim" / "trajectory_00.csv") + " " +
                     q(dir / "sim" / "trajectory_01.csv") + " -o " + q(dir / "sec")) == 0);
  CHECK(read_text(dir / "sec" / "section_01.csv") == read_text(dir / "run" / "section_01.csv"));
  REQUIRE(psindy_cli("pairs " + q(dir / "sec" / "section_00.csv") + " " + q(dir / "sec" / "section_01.csv") +
                     " -o " + q(dir / "pairs")) == 0);
  REQUIRE(psindy_cli("discover --x1 " + q(dir / "pairs" / "pairs_x1.csv") + " --x2 " +
                     q(dir / "pairs" / "pairs_x2.csv") + " --lambda 0.05 -o " + q(dir / "dis")) == 0);
  CHECK(load_model(dir / "dis" / "model.txt").xi() == load_model(dir / "run" / "model.txt").xi());

  REQUIRE(psindy_cli("analyze -m " + q(dir / "dis" / "model.txt") + " --box -2:2 -o " + q(dir / "an")) == 0);
  CHECK(read_text(dir / "an" / "report.txt").find("fixed_points: 1") != std::string::npos);
  REQUIRE(psindy_cli("sweep --x1 " + q(dir / "pairs" / "pairs_x1.csv") + " --x2 " + q(dir / "pairs" / "pairs_x2.csv") +
                     " --sequence " + q(dir / "sec" / "section_00.csv") + " -o " + q(dir / "sw")) == 0);
  const std::string sweep = read_text(dir / "sw" / "sweep.csv");
  CHECK(std::count(sweep.begin(), sweep.end(), '\n') == 6);
}
