#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <numbers>

#include "hunfold/horizontal.hpp"

using namespace hunfold;
using std::numbers::pi;

TEST_SUITE("horiz-calc") {
  TEST_CASE("frame matrix") {
    const auto C = frame_at({1, 2, 9});
    CHECK(C.rows[0] == std::array<double, 3>{1, 0, 4});
    CHECK(C.rows[1] == std::array<double, 3>{0, 1, -2});
    CHECK(C.rank() == 2);
    const auto v = apply_frame({1, 2, 9}, {1, 1, 1});
    CHECK(v.v1 == 5.0);
    CHECK(v.v2 == -1.0);
  }

  TEST_CASE("horizontal gradient of x3") {
    const SmoothField f{[](const Point& x) { return x.x3; }, [](const Point&) { return EuclideanGradient{0, 0, 1}; }};
    const Point x{0.7, -1.3, 2.0};
    const auto a = grad_H(f, x, Differentiation::analytic());
    CHECK(a.v1 == doctest::Approx(2 * x.x2));
    CHECK(a.v2 == doctest::Approx(-2 * x.x1));
    const auto b = grad_H(f, x, Differentiation::fd());
    CHECK(b.v1 == doctest::Approx(2 * x.x2).epsilon(1e-8));
    CHECK(b.v2 == doctest::Approx(-2 * x.x1).epsilon(1e-8));
  }

  TEST_CASE("cell-variable gradient") {
    const SmoothField f{[](const Point& y) { return std::sin(pi * y.x1); }, {}};
    const Point y{0.3, 1.2, 0.4};
    const auto g = grad_Hy(f, y, Differentiation::fd());
    CHECK(g.v1 == doctest::Approx(pi * std::cos(pi * 0.3)).epsilon(1e-8));
    CHECK(std::abs(g.v2) < 1e-8);
    const SmoothField z{[](const Point& y) { return y.x3; }, nullptr};
    const auto gz = grad_Hy(z, y, Differentiation::fd());
    CHECK(gz.v1 == doctest::Approx(2 * y.x2).epsilon(1e-8));
    CHECK(gz.v2 == doctest::Approx(-2 * y.x1).epsilon(1e-8));
  }

  TEST_CASE("horizontal divergence") {
    const HorizontalField id{[](const Point& x) { return HorizontalVector{x.x1, x.x2}; },
                             [](const Point&) {
                               return std::array<EuclideanGradient, 2>{EuclideanGradient{1, 0, 0},
                                                                       EuclideanGradient{0, 1, 0}};
                             }};
    const Point x{0.4, 0.9, -1.1};
    CHECK(div_H(id, x, Differentiation::analytic()) == doctest::Approx(2.0));
    CHECK(div_H(id, x, Differentiation::fd()) == doctest::Approx(2.0).epsilon(1e-8));
    CHECK(div_H_euclidean_form(id, x) == doctest::Approx(2.0).epsilon(1e-8));
    // grad_H(x1^2) = (2 x1, 0)
    const HorizontalField g{[](const Point& x) { return HorizontalVector{2 * x.x1, 0.0}; }, nullptr};
    CHECK(div_H(g, x, Differentiation::fd()) == doctest::Approx(2.0).epsilon(1e-8));
  }

  TEST_CASE("commutator [X1, X2] = -4 X3 at second order") {
    const std::function<double(const Point&)> f = [](const Point& x) { return x.x1 * x.x3 + std::sin(x.x2 * x.x3); };
    const Point p{0.5, 0.25, -0.75};
    std::vector<double> err;
    for (double h : {4e-2, 2e-2, 1e-2}) {
      const auto X1 = vector_field_fd(1, f, h), X2 = vector_field_fd(2, f, h), X3 = vector_field_fd(3, f, h);
      err.push_back(std::abs(vector_field_fd(1, X2, h)(p) - vector_field_fd(2, X1, h)(p) + 4 * X3(p)));
    }
    CHECK(std::log2(err[0] / err[1]) == doctest::Approx(2.0).epsilon(0.1));
    CHECK(std::log2(err[1] / err[2]) == doctest::Approx(2.0).epsilon(0.1));
  }

  TEST_CASE("argument errors") {
    const SmoothField f{[](const Point& x) { return x.x1; }, nullptr};
    CHECK_THROWS_AS(grad_H(f, {}, Differentiation::analytic()), std::invalid_argument);
    CHECK_THROWS_AS(fd_gradient(f.value, {}, 1e-13), std::invalid_argument);
    CHECK_THROWS_AS(vector_field_fd(4, f.value, 1e-3), std::invalid_argument);
  }
}
