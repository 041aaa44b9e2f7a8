// Exit codes and files of the command-line tool.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

namespace fs = std::filesystem;

namespace {

const fs::path kTmp = fs::temp_directory_path() / "hunfold_cli";

int run(const std::string& args) {
  const std::string cmd = std::string(HUNFOLD_CLI) + " " + args + " > " + (kTmp / "stdout.txt").string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

fs::path write(const std::string& name, const std::string& text) {
  fs::create_directories(kTmp);
  const auto p = kTmp / name;
  std::ofstream(p) << text;
  return p;
}

std::vector<std::vector<double>> read_csv(const fs::path& p) {
  std::ifstream f(p);
  std::string line;
  std::getline(f, line);
  std::vector<std::vector<double>> rows;
  while (std::getline(f, line)) {
    std::vector<double> row;
    std::stringstream s(line);
    std::string cell;
    while (std::getline(s, cell, ',')) row.push_back(std::strtod(cell.c_str(), nullptr));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("usage and config errors exit with 2") {
    fs::create_directories(kTmp);
    CHECK(run("") == 2);
    CHECK(run("frobnicate") == 2);
    CHECK(run("cell --threads 0") == 2);
    CHECK(run("cell --config " + (kTmp / "missing.ini").string()) == 2);
    CHECK(run("cell --config " + write("unknown.ini", "[grid]\nsize = 4\n").string()) == 2);
    CHECK(slurp(kTmp / "stdout.txt").find("unknown key 'grid.size'") != std::string::npos);
    CHECK(run("cell --config " + write("syntax.ini", "[grid\n").string()) == 2);
    CHECK(run("converge --config " + write("coarse.ini", "[grid]\nn = 32 32 64\n").string()) == 2);
    CHECK(run("control --config " + write("other.ini", "command = cell\n").string()) == 2);
    CHECK(run("cell --set grid.cell_n=0") == 2);
    CHECK(run("cell --set grid.cell_n") == 2);
    CHECK(run("--help") == 0);
  }

  TEST_CASE("verify with defaults passes at least 12 groups") {
    const auto out = kTmp / "verify";
    REQUIRE(run("verify --out " + out.string()) == 0);
    const auto j = slurp(out / "result.json");
    std::size_t groups = 0;
    for (auto pos = j.find("\"gating\""); pos != std::string::npos; pos = j.find("\"gating\"", pos + 1)) ++groups;
    CHECK(groups >= 12);
    CHECK(j.find("\"passed\": false") == std::string::npos);
    CHECK(fs::exists(out / "run_info.json"));
  }

  TEST_CASE("cell with the identity preset gives 8 I") {
    const auto out = kTmp / "cell";
    REQUIRE(run("cell --set coefficient.preset=identity --set grid.cell_n=4 --out " + out.string()) == 0);
    const auto j = slurp(out / "result.json");
    CHECK(j.find("\"A0\": [\n      [\n        8.0") != std::string::npos);
  }

  TEST_CASE("solver failure exits with 1 and leaves diagnostics") {
    const auto out = kTmp / "numerical";
    CHECK(run("homogenize --set solver.maxit=1 --set grid.n=8,8,8 --set grid.cell_n=4 --out " + out.string()) == 1);
    CHECK(slurp(out / "result.json").find("solver_not_converged") != std::string::npos);
  }

  TEST_CASE("printed config reloads to the same config") {
    REQUIRE(run("control --set control.rho=0.25 --print-config") == 0);
    const auto printed = slurp(kTmp / "stdout.txt");
    const auto p = write("printed.ini", printed);
    REQUIRE(run("control --config " + p.string() + " --print-config") == 0);
    CHECK(slurp(kTmp / "stdout.txt") == printed);
  }

  TEST_CASE("identical runs give identical data files") {
    const auto a = kTmp / "det_a", b = kTmp / "det_b";
    REQUIRE(run("unfold-demo --threads 1 --out " + a.string()) == 0);
    REQUIRE(run("unfold-demo --threads 2 --out " + b.string()) == 0);
    CHECK(slurp(a / "unfold.csv") == slurp(b / "unfold.csv"));
    CHECK(slurp(a / "result.json") == slurp(b / "result.json"));
  }

  TEST_CASE("converge on the laminate gives a strictly decreasing L2 column") {
    const auto out = kTmp / "converge";
    const auto cfg = write("converge.ini", R"(command = converge
[eps]
values = 0.5 0.25 0.125
[grid]
n = 32 32 256
cell_n = 32
[coefficient]
preset = laminate
[source]
preset = x1
)");
    REQUIRE(run("converge --config " + cfg.string() + " --out " + out.string()) == 0);
    const auto rows = read_csv(out / "converge.csv");
    REQUIRE(rows.size() == 3);
    CHECK(rows[1][2] < rows[0][2]);
    CHECK(rows[2][2] < rows[1][2]);
    CHECK(read_csv(out / "pairing.csv").size() == 72);
  }
}
