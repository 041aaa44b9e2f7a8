#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <numeric>

#include "hunfold/fem.hpp"

using namespace hunfold;

namespace {

const CoefficientFn kId = [](const Point&) { return Matrix2{1, 0, 0, 1}; };

// u = sin x1 + x3 cos x2, -(X1^2 + X2^2) u + u = f, flux (grad_H u . C n) on the faces
double u_exact(const Point& x) { return std::sin(x.x1) + x.x3 * std::cos(x.x2); }
double f_exact(const Point& x) { return std::sin(x.x1) + x.x3 * std::cos(x.x2) - 4 * x.x1 * std::sin(x.x2) + u_exact(x); }
double flux(const Point& x, const BoxDomain& b) {
  const double X1 = std::cos(x.x1) + 2 * x.x2 * std::cos(x.x2);
  const double X2 = -x.x3 * std::sin(x.x2) - 2 * x.x1 * std::cos(x.x2);
  const double c[3] = {x.x1, x.x2, x.x3}, lo[3] = {b.lo.x1, b.lo.x2, b.lo.x3}, hi[3] = {b.hi.x1, b.hi.x2, b.hi.x3};
  double n[3] = {0, 0, 0};
  for (int a = 0; a < 3; ++a) {
    if (std::abs(c[a] - lo[a]) < 1e-12) n[a] = -1;
    if (std::abs(c[a] - hi[a]) < 1e-12) n[a] = 1;
  }
  return X1 * (n[0] + 2 * x.x2 * n[2]) + X2 * (n[1] - 2 * x.x1 * n[2]);
}

double solve_manufactured(int n) {
  const BoxDomain box{{0, 0, 0}, {1, 1, 1}};
  const StructuredGrid g(box, {n, n, n});
  const auto K = assemble_operator(g, kId, 1.0);
  auto b = assemble_source(g, f_exact);
  const auto bd = assemble_boundary(g, [&](const Point& x) { return flux(x, box); });
  for (std::size_t i = 0; i < b.size(); ++i) b[i] += bd[i];
  std::vector<double> x(b.size(), 0.0);
  conjugate_gradient(K, b, x, line_multigrid({1e-12, 5000, false}, g));
  return l2_error({g, x}, u_exact);
}

}  // namespace

TEST_SUITE("fem") {
  TEST_CASE("grid indexing and location") {
    const StructuredGrid g({{0, 0, 0}, {2, 1, 4}}, {4, 2, 8});
    CHECK(g.node_count() == 5 * 3 * 9);
    CHECK(g.element_count() == 64);
    CHECK(g.node(g.node_index(4, 2, 8)) == Point{2, 1, 4});
    std::array<int, 3> e;
    std::array<double, 3> t;
    g.locate({1.25, 0.5, 4.0}, e, t);
    CHECK(e == std::array<int, 3>{2, 1, 7});
    CHECK(t[0] == doctest::Approx(0.5));
    CHECK(t[2] == doctest::Approx(1.0));
    CHECK_THROWS_AS(StructuredGrid({{0, 0, 0}, {1, 1, 1}}, {0, 1, 1}), std::invalid_argument);
  }

  TEST_CASE("trilinear interpolation is exact for trilinear functions") {
    const StructuredGrid g({{-1, 0, 0}, {1, 2, 1}}, {3, 4, 5});
    const ScalarFn f = [](const Point& x) { return 1 + x.x1 - 2 * x.x2 * x.x3 + x.x1 * x.x2 * x.x3; };
    const auto gf = GridFunction::interpolate(g, f);
    CHECK(gf({0.3, 1.7, 0.45}) == doctest::Approx(f({0.3, 1.7, 0.45})).epsilon(1e-13));
    CHECK(l2_error(gf, f) < 1e-13);
    const auto grad = gf.gradient({0.3, 1.7, 0.45});
    CHECK(grad[0] == doctest::Approx(1 + 1.7 * 0.45));
  }

  TEST_CASE("csr matrices") {
    const auto A = CsrMatrix::from_triplets(3, {0, 0, 1, 2, 2, 0}, {0, 1, 1, 2, 0, 0}, {1, 2, 3, 4, 5, 6});
    CHECK(A.get(0, 0) == 7.0);
    CHECK(A.get(1, 0) == 0.0);
    CHECK(A.nonzeros() == 5);
    CHECK(A.multiply(std::vector<double>{1, 1, 1}) == std::vector<double>{9, 3, 9});
    CHECK(A.asymmetry() == 5.0);
    auto B = A;
    CHECK_THROWS_AS(B.at(1, 2), std::out_of_range);
    B.add_scaled(A, -1.0);
    CHECK(B.multiply(std::vector<double>{1, 2, 3}) == std::vector<double>{0, 0, 0});
  }

  TEST_CASE("mass and stiffness matrices") {
    const StructuredGrid g({{0, 0, 0}, {2, 1, 3}}, {3, 2, 4});
    const auto M = assemble_operator(g, [](const Point&) { return Matrix2{0, 0, 0, 0}; }, 1.0);
    const auto v = M.values();
    CHECK(std::accumulate(v.begin(), v.end(), 0.0) == doctest::Approx(6.0).epsilon(1e-13));
    const auto S = assemble_operator(g, kId, 0.0);
    for (double r : S.multiply(std::vector<double>(g.node_count(), 1.0))) CHECK(std::abs(r) < 1e-12);
    CHECK(S.asymmetry() < 1e-13);
    // int grad_H x3 . grad_H x3 = int 4 (x1^2 + x2^2) = 4 (8 + 2)
    const auto x3 = GridFunction::interpolate(g, [](const Point& x) { return x.x3; });
    CHECK(dot(x3.values, S.multiply(x3.values)) == doctest::Approx(40.0).epsilon(1e-12));
  }

  TEST_CASE("conjugate gradient with each preconditioner agrees") {
    const StructuredGrid g({{0, 0, 0}, {1, 1, 1}}, {8, 8, 16});
    const auto K = assemble_operator(g, kId, 1.0);
    const auto b = assemble_source(g, [](const Point& x) { return std::cos(3 * x.x1) + x.x3; });
    std::vector<double> x0(b.size(), 0.0), x1 = x0, x2 = x0;
    const auto r0 = conjugate_gradient(K, b, x0, {1e-12, 5000, false});
    const auto r1 = conjugate_gradient(K, b, x1, vertical_lines({1e-12, 5000, false}, g));
    const auto r2 = conjugate_gradient(K, b, x2, line_multigrid({1e-12, 5000, false}, g));
    // converged runs report the true residual, accepted up to 10 tol
    CHECK(r0.residual <= 1e-11);
    CHECK(r2.iterations < r1.iterations);
    for (std::size_t i = 0; i < b.size(); ++i) {
      CHECK(x1[i] == doctest::Approx(x0[i]).epsilon(1e-9));
      CHECK(x2[i] == doctest::Approx(x0[i]).epsilon(1e-9));
    }
  }

  TEST_CASE("non-convergence reports the best iterate") {
    const StructuredGrid g({{0, 0, 0}, {1, 1, 1}}, {6, 6, 6});
    const auto K = assemble_operator(g, kId, 1.0);
    const auto b = assemble_source(g, [](const Point& x) { return x.x1; });
    std::vector<double> x(b.size(), 0.0);
    try {
      conjugate_gradient(K, b, x, {1e-14, 2, false});
      FAIL("expected NotConverged");
    } catch (const NotConverged& e) {
      CHECK(e.iterations == 2);
      CHECK(e.best.size() == b.size());
      CHECK(e.residual > 1e-14);
    }
  }

  TEST_CASE("manufactured solution converges at second order") {
    const double e4 = solve_manufactured(4), e8 = solve_manufactured(8), e16 = solve_manufactured(16);
    CHECK(std::log2(e4 / e8) == doctest::Approx(2.0).epsilon(0.1));
    CHECK(std::log2(e8 / e16) == doctest::Approx(2.0).epsilon(0.05));
  }
}
