// Links only libhunfold through its C header.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <string>

#include "hunfold/hunfold.h"

TEST_SUITE("capi") {
  TEST_CASE("version and status names") {
    CHECK(std::strlen(hf_version()) > 0);
    CHECK(std::string(hf_status_name(HF_E_CONFIG)) == "config error");
    CHECK(hf_set_threads(0) == HF_E_INVALID_ARGUMENT);
    CHECK(hf_set_threads(2) == HF_OK);
    CHECK(hf_threads() == 2);
    CHECK(hf_set_threads(1) == HF_OK);
  }

  TEST_CASE("group arithmetic") {
    hf_point r{};
    REQUIRE(hf_group_mul({1, 2, 3}, {4, 5, 6}, &r) == HF_OK);
    CHECK(r.x1 == 5.0);
    CHECK(r.x2 == 7.0);
    CHECK(r.x3 == 15.0);
    REQUIRE(hf_dilate(3.0, {1, 2, 5}, &r) == HF_OK);
    CHECK(r.x3 == 45.0);
    CHECK(hf_dilate(-1.0, {1, 2, 5}, &r) == HF_E_INVALID_ARGUMENT);
    CHECK(std::strlen(hf_last_error()) > 0);
    double n = 0;
    REQUIRE(hf_hnorm({3, 4, 16}, &n) == HF_OK);
    CHECK(n == 5.0);
    CHECK(hf_group_mul({1, 2, 3}, {4, 5, 6}, nullptr) == HF_E_INVALID_ARGUMENT);
  }

  TEST_CASE("decomposition round trip") {
    hf_cell_index k{};
    hf_point y{}, x{};
    REQUIRE(hf_decompose(0.5, {1.25, 1.55, 1.825}, &k, &y) == HF_OK);
    CHECK(k.k1 == 1);
    CHECK(k.k2 == 1);
    CHECK(k.k3 == 4);
    CHECK(y.x1 == doctest::Approx(0.5));
    REQUIRE(hf_reconstruct(0.5, k, y, &x) == HF_OK);
    CHECK(x.x3 == doctest::Approx(1.825).epsilon(1e-14));
    CHECK(hf_decompose(0.0, {1, 1, 1}, &k, &y) == HF_E_INVALID_ARGUMENT);
  }

  TEST_CASE("config handles") {
    hf_config* c = nullptr;
    CHECK(hf_config_default("nonsense", &c) == HF_E_CONFIG);
    CHECK(c == nullptr);
    REQUIRE(hf_config_default("cell", &c) == HF_OK);
    CHECK(hf_config_set(c, "grid.cell_n", "6") == HF_OK);
    CHECK(hf_config_set(c, "grid.cell_n", "1") == HF_E_CONFIG);
    CHECK(hf_config_set(c, "grid.bogus", "1") == HF_E_CONFIG);
    char* json = nullptr;
    REQUIRE(hf_config_to_json(c, &json) == HF_OK);
    CHECK(std::string(json).find("\"cell_n\": 6") != std::string::npos);
    hf_config* d = nullptr;
    REQUIRE(hf_config_from_json(json, &d) == HF_OK);
    char *a = nullptr, *b = nullptr;
    hf_config_to_ini(c, &a);
    hf_config_to_ini(d, &b);
    CHECK(std::string(a) == std::string(b));
    hf_config* e = nullptr;
    REQUIRE(hf_config_parse(a, nullptr, &e) == HF_OK);
    CHECK(hf_config_parse(a, "control", &e) == HF_E_CONFIG);
    CHECK(hf_config_load("/nonexistent.ini", "cell", &e) == HF_E_CONFIG);
    hf_string_free(a);
    hf_string_free(b);
    hf_string_free(json);
    hf_config_free(c);
    hf_config_free(d);
    hf_config_free(e);
    hf_config_free(nullptr);
  }

  TEST_CASE("cell problem through handles") {
    hf_coefficient* lam = nullptr;
    REQUIRE(hf_coefficient_laminate(2.0, 1.0, 1, &lam) == HF_OK);
    double m[4];
    REQUIRE(hf_coefficient_eval(lam, {0.5, 0, 0}, m) == HF_OK);
    CHECK(m[0] == doctest::Approx(3.0));
    hf_cell* cell = nullptr;
    REQUIRE(hf_cell_solve(lam, 16, 1e-12, &cell) == HF_OK);
    double A0[4];
    REQUIRE(hf_cell_homogenized(cell, A0) == HF_OK);
    CHECK(A0[0] == doctest::Approx(8.0 * std::sqrt(3.0)).epsilon(3e-3));
    CHECK(A0[3] == doctest::Approx(16.0));
    double z = 0;
    CHECK(hf_cell_corrector(cell, 1, {0.3, 0.4, 0.5}, &z) == HF_OK);
    CHECK(hf_cell_corrector(cell, 3, {0.3, 0.4, 0.5}, &z) == HF_E_INVALID_ARGUMENT);
    hf_cell_free(cell);
    CHECK(hf_cell_solve(lam, 1, 1e-12, &cell) == HF_E_INVALID_ARGUMENT);
    hf_coefficient_free(lam);
    hf_coefficient* bad = nullptr;
    CHECK(hf_coefficient_laminate(1.0, 2.0, 1, &bad) == HF_E_INVALID_ARGUMENT);
    const double asym[4] = {1, 0.5, 0, 1};
    CHECK(hf_coefficient_constant(asym, &bad) == HF_E_INVALID_ARGUMENT);
  }

  TEST_CASE("run and report") {
    const auto dir = std::filesystem::temp_directory_path() / "hunfold_capi_run";
    std::filesystem::remove_all(dir);
    hf_config* c = nullptr;
    REQUIRE(hf_config_default("cell", &c) == HF_OK);
    REQUIRE(hf_config_set(c, "coefficient.preset", "identity") == HF_OK);
    REQUIRE(hf_config_set(c, "grid.cell_n", "4") == HF_OK);
    hf_report* r = nullptr;
    REQUIRE(hf_run(c, dir.c_str(), &r) == HF_OK);
    CHECK(hf_report_passed(r) == 1);
    CHECK(hf_report_check_count(r) == 3);
    const char *name = nullptr, *detail = nullptr;
    int passed = 0, gating = 0;
    REQUIRE(hf_report_check(r, 0, &name, &passed, &gating, &detail) == HF_OK);
    CHECK(std::string(name) == "residual");
    CHECK(hf_report_check(r, 9, &name, &passed, &gating, &detail) == HF_E_INVALID_ARGUMENT);
    char* json = nullptr;
    REQUIRE(hf_report_json(r, &json) == HF_OK);
    CHECK(std::string(json).find("\"A0\"") != std::string::npos);
    hf_string_free(json);
    hf_report_free(r);
    CHECK(std::filesystem::exists(dir / "cell.csv"));

    REQUIRE(hf_config_set(c, "solver.cell_tol", "1e-15") == HF_OK);
    REQUIRE(hf_config_set(c, "solver.maxit", "1") == HF_OK);
    REQUIRE(hf_config_set(c, "grid.cell_n", "8") == HF_OK);
    REQUIRE(hf_config_set(c, "coefficient.preset", "laminate") == HF_OK);
    CHECK(hf_run(c, dir.c_str(), &r) == HF_E_NUMERICAL);
    REQUIRE(r != nullptr);
    CHECK(hf_report_numerical_failure(r) == 1);
    CHECK(hf_report_passed(r) == 0);
    hf_report_free(r);
    hf_config_free(c);
  }
}
