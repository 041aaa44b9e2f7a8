#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <random>

#include "hunfold/heisenberg.hpp"

using namespace hunfold;

namespace {
void check_close(const Point& a, const Point& b, double tol) {
  CHECK(a.x1 == doctest::Approx(b.x1).epsilon(tol));
  CHECK(a.x2 == doctest::Approx(b.x2).epsilon(tol));
  CHECK(a.x3 == doctest::Approx(b.x3).epsilon(tol));
}
}  // namespace

TEST_SUITE("heis-core") {
  TEST_CASE("group law closed form") {
    CHECK(group_mul({1, 2, 3}, {4, 5, 6}) == Point{5, 7, 15});
    CHECK(group_mul({4, 5, 6}, {1, 2, 3}) == Point{5, 7, 3});
    CHECK(group_mul({1, 2, 3}, {0, 0, 0}) == Point{1, 2, 3});
    CHECK(group_inv({1, -2, 3}) == Point{-1, 2, -3});
    CHECK(group_mul({1, -2, 3}, group_inv({1, -2, 3})) == Point{0, 0, 0});
  }

  TEST_CASE("associativity on random triples") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(-5, 5);
    for (int s = 0; s < 1000; ++s) {
      const Point p{U(rng), U(rng), U(rng)}, q{U(rng), U(rng), U(rng)}, r{U(rng), U(rng), U(rng)};
      check_close(group_mul(group_mul(p, q), r), group_mul(p, group_mul(q, r)), 1e-13);
    }
  }

  TEST_CASE("dilations") {
    CHECK(dilate(3.0, {1, 2, 5}) == Point{3, 6, 45});
    CHECK_THROWS_AS(dilate(0.0, {1, 1, 1}), std::invalid_argument);
    CHECK_THROWS_AS(dilate(-1.0, {1, 1, 1}), std::invalid_argument);
    const Point p{0.3, -1.2, 2.5}, q{-0.7, 0.4, 1.1};
    check_close(dilate(2.5, group_mul(p, q)), group_mul(dilate(2.5, p), dilate(2.5, q)), 1e-14);
  }

  TEST_CASE("homogeneous norm and distance") {
    CHECK(hnorm({3, 4, 16}) == 5.0);
    CHECK(hnorm({0, 0, -9}) == 3.0);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> U(-3, 3);
    for (int s = 0; s < 200; ++s) {
      const Point q{U(rng), U(rng), U(rng)}, x{U(rng), U(rng), U(rng)}, r{U(rng), U(rng), U(rng)};
      CHECK(hdist(dilate(2.0, q), dilate(2.0, x)) == doctest::Approx(2.0 * hdist(q, x)).epsilon(1e-12));
      CHECK(hdist(group_mul(r, q), group_mul(r, x)) == doctest::Approx(hdist(q, x)).epsilon(1e-12));
    }
  }

  TEST_CASE("even integer and fractional parts") {
    CHECK(even_floor(3.1) == 2);
    CHECK(even_floor(-0.5) == -2);
    CHECK(even_floor(2.0) == 2);
    CHECK(even_floor(-2.0) == -2);
    CHECK(even_frac(3.1) == doctest::Approx(1.1).epsilon(1e-15));
    CHECK(even_frac(-0.5) == 1.5);
    CHECK(even_frac(4.0) == 0.0);
    CHECK_THROWS(even_floor(NAN));
  }

  TEST_CASE("Heisenberg integer and fractional parts") {
    CHECK(int_part_H({2.5, 3.1, 7.3}) == CellIndex{1, 1, 4});
    check_close(frac_part_H({2.5, 3.1, 7.3}), {0.5, 1.1, 1.7}, 1e-14);
    const auto d = eps_decompose(0.5, {1.25, 1.55, 1.825});
    CHECK(d.index == CellIndex{1, 1, 4});
    check_close(d.frac, {0.5, 1.1, 1.7}, 1e-13);
    check_close(reconstruct(0.5, d.index, d.frac), {1.25, 1.55, 1.825}, 1e-14);
  }

  TEST_CASE("fractional part is invariant under lattice translation") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(-4, 4);
    for (int s = 0; s < 50; ++s) {
      const Point x{U(rng), U(rng), U(rng)};
      const Point f = frac_part_H(x);
      for (int a = -2; a <= 2; ++a)
        for (int b = -2; b <= 2; ++b)
          for (int c = -2; c <= 2; ++c) {
            const Point g = frac_part_H(group_mul(scale_int(2, {a, b, c}), x));
            CHECK(std::abs(g.x1 - f.x1) + std::abs(g.x2 - f.x2) + std::abs(g.x3 - f.x3) < 1e-12);
          }
    }
  }

  TEST_CASE("lattice closure is exact") {
    for (int a = -3; a <= 3; ++a)
      for (int b = -3; b <= 3; ++b) {
        const CellIndex k{a, b, a - b}, m{b, -a, 2 * a};
        CHECK(group_mul(scale_int(2, k), scale_int(2, m)) == scale_int(2, lattice_mul(k, m)));
      }
  }

  TEST_CASE("decomposition round trip") {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> U(-10, 10);
    for (double eps : {1.0, 0.5, 0.1})
      for (int s = 0; s < 2000; ++s) {
        const Point x{U(rng), U(rng), U(rng)};
        CHECK(ReferenceCell::contains(eps_decompose(eps, x).frac));
        CHECK(reconstruction_error(eps, x) <= 1e-9);
      }
  }

  TEST_CASE("cell map geometry") {
    const CellMap m{1.0, {1, 0, 0}};
    CHECK(m({0, 2, 0}) == Point{2, 2, -8});
    CHECK(CellMap{0.5, {2, -1, 3}}.jacobian() == doctest::Approx(std::pow(0.5, 4)));
    const CellMap m2{0.25, {-1, 2, 5}};
    check_close(m2.inverse(m2({0.3, 1.7, 0.9})), {0.3, 1.7, 0.9}, 1e-12);
    const auto v = cell_vertices(1.0, {1, 0, 0});
    CHECK(v[2] == Point{2, 2, -8});
  }

  TEST_CASE("reference cell is half open") {
    CHECK(ReferenceCell::contains({0, 0, 0}));
    CHECK_FALSE(ReferenceCell::contains({2, 0, 0}));
    CHECK_FALSE(ReferenceCell::contains({1, 1, -1e-300}));
    CHECK(ReferenceCell::measure == 8.0);
  }

  TEST_CASE("periodization") {
    const ScalarFn h = [](const Point& y) { return y.x1 * y.x2 + std::cos(y.x3); };
    const auto p = periodize(h);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(0.05, 1.95);
    for (int s = 0; s < 200; ++s) {
      const Point y{U(rng), U(rng), U(rng)};
      const CellIndex k{s % 5 - 2, (s / 5) % 5 - 2, (s / 25) % 5 - 2};
      CHECK(p(group_mul(scale_int(2, k), y)) == doctest::Approx(h(y)).epsilon(1e-12));
    }
    // functions of (y1, y2) alone are classically 2-periodic
    const auto g = periodize([](const Point& y) { return std::sin(3.14159265358979 * y.x1) * y.x2 * (2 - y.x2); });
    const Point x{5.3, -3.4, 11.0};
    const double y2 = x.x2 + 4.0;
    CHECK(g(x) == doctest::Approx(std::sin(3.14159265358979 * (x.x1 - 4.0)) * y2 * (2 - y2)).epsilon(1e-12));
  }
}
