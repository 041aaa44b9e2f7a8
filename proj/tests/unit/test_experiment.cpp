#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hunfold/experiment.hpp"
#include "hunfold/parallel.hpp"

using namespace hunfold;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("hunfold_unit_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_SUITE("cli-runner") {
  TEST_CASE("command names") {
    for (auto c : {Command::verify, Command::unfold_demo, Command::cell, Command::homogenize, Command::converge,
                   Command::control})
      CHECK(parse_command(command_name(c)) == c);
    CHECK_THROWS_AS(parse_command("solve"), ConfigError);
  }

  TEST_CASE("format_double keeps 17 digits") {
    CHECK(format_double(0.1) == "0.10000000000000001");
    CHECK(format_double(8.0) == "8");
  }

  TEST_CASE("parse a config") {
    const auto cfg = parse_config(R"(
; comment
command = converge
# other comment
[domain]
lo = 0, 0, 0
hi = 2 2 2
[eps]
values = 0.5 0.25
[grid]
n = 16 16 64
cell_n = 8
[coefficient]
preset = checkerboard
low = 2
high = 5
[source]
preset = constant
value = 3
)");
    CHECK(cfg.command == Command::converge);
    CHECK(cfg.eps == std::vector<double>{0.5, 0.25});
    CHECK(cfg.grid == Resolution{16, 16, 64});
    CHECK(cfg.cell_n == 8);
    CHECK(cfg.coefficient.preset == "checkerboard");
    CHECK(cfg.coefficient.high == 5.0);
    CHECK(cfg.source.value == 3.0);
    CHECK(cfg.solver_tol == 1e-8);
  }

  TEST_CASE("config errors") {
    CHECK_THROWS_AS(parse_config("[grid]\nn = 8 8 8\n"), ConfigError);                          // no command
    CHECK_THROWS_AS(parse_config("command = cell\n[grid]\nsize = 3\n"), ConfigError);            // unknown key
    CHECK_THROWS_AS(parse_config("command = cell\n[mystery]\nn = 3\n"), ConfigError);            // unknown section
    CHECK_THROWS_AS(parse_config("command = cell\n", Command::control), ConfigError);            // conflict
    CHECK_THROWS_AS(parse_config("command = cell\n[eps]\nvalues = 0.25 0.5\n"), ConfigError);   // not decreasing
    CHECK_THROWS_AS(parse_config("command = cell\n[eps]\nvalues = 0.5 -1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("command = cell\n[grid]\nn = 8 8\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("command = cell\n[grid]\ncell_n = eight\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("command = cell\n[solver]\ntol = 1e-8x\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("command = cell\n[coefficient]\npreset = laminate\na1 = 3\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("command = cell\n[coefficient]\npreset = marble\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("command = cell\n[domain]\nhi = 0 1 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("command = cell\n[grid]\nn = 8 8 8\nn = 4 4 4\n"), ConfigError);  // duplicate
    CHECK_THROWS_AS(parse_config("command = cell\n[grid\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("command = control\n[eps]\nvalues = 0.5 0.25\n"), ConfigError);
    // converge must resolve the smallest eps
    CHECK_THROWS_AS(parse_config("command = converge\n[grid]\nn = 64 64 128\n"), ConfigError);
    CHECK_NOTHROW(parse_config("command = converge\n[grid]\nn = 64 64 256\n"));
    CHECK_THROWS_AS(load_config("/nonexistent/file.ini"), ConfigError);
  }

  TEST_CASE("round trips through INI and JSON") {
    for (auto c : {Command::verify, Command::unfold_demo, Command::cell, Command::homogenize, Command::converge,
                   Command::control}) {
      auto cfg = default_config(c);
      CHECK(parse_config(to_ini(cfg)) == cfg);
      CHECK(config_from_json(config_to_json(cfg)) == cfg);
    }
    auto cfg = default_config(Command::homogenize);
    apply_setting(cfg, "coefficient.preset", "constant");
    apply_setting(cfg, "coefficient.matrix", "2 0.1 0.1 1.0000000000000002");
    apply_setting(cfg, "domain.hi", "2.3 1.7 0.30000000000000004");
    apply_setting(cfg, "verify.seed", "18446744073709551615");
    apply_setting(cfg, "eps.values", "0.7 0.1");
    apply_setting(cfg, "output.dir", "runs/a b");
    CHECK(parse_config(to_ini(cfg)) == cfg);
    CHECK(config_from_json(config_to_json(cfg)) == cfg);
    CHECK_THROWS_AS(config_from_json("{\"command\": \"cell\", \"grid\": {\"n\": true}}"), ConfigError);
    CHECK_THROWS_AS(config_from_json("[1, 2]"), ConfigError);
    CHECK_THROWS_AS(config_from_json("{\"grid\": {}}"), ConfigError);
  }

  TEST_CASE("cell run with the identity coefficient") {
    auto cfg = default_config(Command::cell);
    cfg.coefficient.preset = "identity";
    cfg.cell_n = 4;
    const auto dir = scratch("cell_identity");
    const auto rep = run_experiment(cfg, dir);
    CHECK(rep.passed);
    const auto j = nlohmann::json::parse(slurp(dir / "result.json"));
    CHECK(j["data"]["A0"][0][0].get<double>() == doctest::Approx(8.0).epsilon(1e-12));
    CHECK(std::abs(j["data"]["A0"][0][1].get<double>()) < 1e-12);
    CHECK(j["data"]["A0"][1][1].get<double>() == doctest::Approx(8.0).epsilon(1e-12));
    CHECK(fs::exists(dir / "cell.csv"));
    CHECK(fs::exists(dir / "run_info.json"));
    // the metadata re-parses into the same config
    CHECK(config_from_json(j["config"].dump()) == cfg);
  }

  TEST_CASE("outputs are byte-identical across runs and thread counts") {
    auto cfg = default_config(Command::cell);
    cfg.cell_n = 8;
    const auto a = scratch("det_a"), b = scratch("det_b");
    const int before = thread_count();
    set_thread_count(1);
    run_experiment(cfg, a);
    set_thread_count(3);
    run_experiment(cfg, b);
    set_thread_count(before);
    CHECK(slurp(a / "result.json") == slurp(b / "result.json"));
    CHECK(slurp(a / "cell.csv") == slurp(b / "cell.csv"));
  }

  TEST_CASE("solver failure is reported, not thrown") {
    auto cfg = default_config(Command::homogenize);
    cfg.grid = {8, 8, 8};
    cfg.cell_n = 4;
    cfg.solver_maxit = 1;
    const auto dir = scratch("numerical");
    const auto rep = run_experiment(cfg, dir);
    CHECK_FALSE(rep.passed);
    CHECK(rep.numerical_failure);
    const auto j = nlohmann::json::parse(slurp(dir / "result.json"));
    CHECK(j["error"]["type"] == "solver_not_converged");
    CHECK(j["error"]["iterations"] == 1);
  }

  TEST_CASE("control run writes theta on the Y grid") {
    auto cfg = default_config(Command::control);
    cfg.grid = {8, 8, 8};
    cfg.control_n = 4;
    const auto dir = scratch("control");
    const auto rep = run_experiment(cfg, dir);
    CHECK(rep.passed);
    std::ifstream f(dir / "theta.csv");
    std::string line;
    int rows = 0;
    std::getline(f, line);
    CHECK(line == "y1,y2,y3,theta");
    while (std::getline(f, line)) ++rows;
    CHECK(rows == 125);
  }

  TEST_CASE("verification battery") {
    auto cfg = default_config(Command::verify);
    cfg.samples = 2000;
    const auto checks = verify_battery(cfg);
    CHECK(checks.size() >= 12);
    for (const auto& c : checks) {
      INFO(c.name << ": " << c.detail);
      CHECK(c.passed);
    }
  }
}
