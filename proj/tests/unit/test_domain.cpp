#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "hunfold/domain.hpp"

using namespace hunfold;

namespace {
const BoxDomain kUnit2{{0, 0, 0}, {2, 2, 2}};
const BoxDomain kSym{{-1, -1, -1}, {1, 1, 1}};
}  // namespace

TEST_SUITE("domain-mesh") {
  TEST_CASE("box validation") {
    CHECK_THROWS_AS((BoxDomain{{0, 0, 0}, {1, 0, 1}}.validate()), std::invalid_argument);
    CHECK_THROWS_AS((BoxDomain{{0, 0, 0}, {1, INFINITY, 1}}.validate()), std::invalid_argument);
    CHECK(kUnit2.measure() == 8.0);
    CHECK(kUnit2.contains({2, 2, 2}));
    CHECK_FALSE(kUnit2.contains({2.1, 1, 1}));
  }

  TEST_CASE("interior cells of (0,2)^3") {
    // brute-force vertex enumeration in exact rational arithmetic
    const struct {
      double eps;
      std::size_t cells;
      double lambda;
    } rows[] = {{1.0, 1, 0.0}, {0.5, 4, 6.0}, {0.25, 80, 5.5}, {0.125, 2304, 3.5}};
    for (const auto& r : rows) {
      const auto dec = interior_cells(r.eps, kUnit2);
      CHECK(dec.interior.size() == r.cells);
      CHECK(dec.lambda_measure == doctest::Approx(r.lambda).epsilon(1e-12));
    }
    CHECK(interior_cells(1.0, kUnit2).interior.front() == CellIndex{0, 0, 0});
  }

  TEST_CASE("interior cells of (-1,1)^3 and (0,4)x(0,4)x(0,8)") {
    const struct {
      double eps;
      std::size_t cells;
      double lambda;
    } sym[] = {{1.0, 0, 8.0}, {0.5, 4, 6.0}, {0.25, 128, 4.0}, {0.125, 3072, 2.0}};
    for (const auto& r : sym) {
      const auto dec = interior_cells(r.eps, kSym);
      CHECK(dec.interior.size() == r.cells);
      CHECK(dec.lambda_measure == doctest::Approx(r.lambda).epsilon(1e-12));
    }
    const BoxDomain tall{{0, 0, 0}, {4, 4, 8}};
    CHECK(interior_cells(1.0, tall).interior.size() == 4);
    CHECK(interior_cells(0.5, tall).interior.size() == 80);
    CHECK(interior_cells(0.25, tall).lambda_measure == doctest::Approx(56.0));
  }

  TEST_CASE("interior cells are sorted, inside, and located") {
    const auto dec = interior_cells(0.25, kUnit2);
    CHECK(std::is_sorted(dec.interior.begin(), dec.interior.end()));
    for (const auto& k : dec.interior) {
      CHECK(cell_inside(0.25, k, kUnit2));
      const Point c = CellMap{0.25, k}({1, 1, 1});
      CellIndex kk;
      Point y;
      REQUIRE(dec.locate(c, kk, y));
      CHECK(kk == k);
    }
    CHECK_FALSE(dec.contains({100, 0, 0}));
  }

  TEST_CASE("quadrature rules") {
    for (int n = 1; n <= 10; ++n) {
      const auto q = QuadratureRule::gauss(n);
      double s = 0.0;
      for (double w : q.weights) s += w;
      CHECK(s == doctest::Approx(8.0).epsilon(1e-14));
      CHECK(q.size() == static_cast<std::size_t>(n * n * n));
    }
    CHECK_THROWS_AS(QuadratureRule::gauss(11), std::invalid_argument);
    CHECK_THROWS_AS(QuadratureRule::composite_gauss(2, 0), std::invalid_argument);
    // Gauss-3 integrates y1^5 exactly: int_0^2 y^5 dy * 4 = 64/6 * 4
    const auto q = QuadratureRule::gauss(3);
    double s = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) s += q.weights[i] * std::pow(q.nodes[i].x1, 5);
    CHECK(s == doctest::Approx(128.0 / 3.0).epsilon(1e-14));
  }

  TEST_CASE("Euclidean integrals on the box") {
    CHECK(integrate_omega([](const Point& x) { return x.x1; }, kUnit2, {2, 2, 2}) == doctest::Approx(8.0));
    CHECK(integrate_omega([](const Point& x) { return std::sin(x.x3); }, kUnit2, {4, 4, 4}, 4) ==
          doctest::Approx(4.0 * (1.0 - std::cos(2.0))).epsilon(1e-10));
  }

  TEST_CASE("covered integrals match the exact cell sums") {
    // sum over E_eps of eps^5 * 8 * (2 k1 + 1)
    const ScalarFn x1 = [](const Point& x) { return x.x1; };
    CHECK(integrate_covered(x1, interior_cells(0.5, kUnit2), QuadratureRule::gauss(2)) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(integrate_covered(x1, interior_cells(0.25, kUnit2), QuadratureRule::gauss(2)) ==
          doctest::Approx(25.0 / 16.0).epsilon(1e-13));
    CHECK(integrate_covered(x1, interior_cells(0.125, kUnit2), QuadratureRule::gauss(2)) ==
          doctest::Approx(123.0 / 32.0).epsilon(1e-13));
    CHECK(integrate_covered(x1, interior_cells(0.25, kSym), QuadratureRule::gauss(2)) == doctest::Approx(0.5).epsilon(1e-13));
  }

  TEST_CASE("Fubini rule converges to the cell-mapped integral") {
    const auto dec = interior_cells(0.5, kUnit2);
    const ScalarFn f = [](const Point& x) { return std::exp(0.2 * x.x1) * std::cos(x.x2 - x.x3); };
    const double ref = integrate_covered(f, dec, QuadratureRule::gauss(8));
    const double e1 = std::abs(integrate_covered_fubini(f, dec, 2, 1, 8) - ref);
    const double e2 = std::abs(integrate_covered_fubini(f, dec, 4, 1, 8) - ref);
    CHECK(std::log2(e1 / e2) == doctest::Approx(2.0).epsilon(0.05));
    CHECK(std::abs(integrate_covered_fubini(f, dec, 2, 3, 8) - ref) < 1e-6);
  }

  TEST_CASE("layer integral of 1 is the layer measure") {
    const auto dec = interior_cells(0.25, kUnit2);
    const double lay = integrate_layer([](const Point&) { return 1.0; }, dec, {16, 16, 64}, QuadratureRule::gauss(2));
    CHECK(lay == doctest::Approx(5.5).epsilon(1e-12));
  }

  TEST_CASE("cell quadrature weights scale by eps^4") {
    const auto m = cell_quadrature(0.5, {1, 0, 2}, QuadratureRule::gauss(2));
    double s = 0.0;
    for (double w : m.weights) s += w;
    CHECK(s == doctest::Approx(8.0 * 0.0625));
  }
}
