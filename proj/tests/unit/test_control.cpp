#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <random>

#include "hunfold/control.hpp"

using namespace hunfold;

namespace {
ControlProblem small_problem() {
  ControlProblem p;
  p.A = PeriodicCoefficient::laminate(2.0, 1.0);
  p.f = [](const Point& x) { return x.x1; };
  p.rho = 0.5;
  p.eps = 0.5;
  p.grid = {8, 8, 8};
  p.control_n = 4;
  return p;
}
}  // namespace

TEST_SUITE("opt-control") {
  TEST_CASE("zero data gives the zero solution") {
    ControlProblem p;
    p.grid = {8, 8, 8};
    p.control_n = 4;
    const auto s = optimize(p);
    CHECK(s.J == 0.0);
    for (double v : s.theta_bar.values) CHECK(v == 0.0);
    for (double v : s.u_bar.values) CHECK(v == 0.0);
    CHECK(s.iterations == 0);
  }

  TEST_CASE("problem validation") {
    auto p = small_problem();
    p.rho = 0.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = small_problem();
    p.control_n = 0;
    CHECK_THROWS_AS(ControlDiscretization{p}, std::invalid_argument);
  }

  TEST_CASE("optimality system") {
    const ControlDiscretization d(small_problem());
    const auto s = optimize(d, 1e-11, 200);
    CHECK(optimality_residual(s, d, control_battery()) <= 1e-6);
    // reduced gradient vanishes at the optimum and matches central differences elsewhere
    const auto g = d.reduced_gradient(s.theta_bar);
    double gmax = 0.0;
    for (double v : g) gmax = std::max(gmax, std::abs(v));
    CHECK(gmax <= 1e-8);
    auto theta = d.control_from([](const Point& y) { return std::sin(y.x1) - y.x3; });
    const auto gt = d.reduced_gradient(theta);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> N;
    std::vector<double> dir(gt.size());
    for (double& v : dir) v = N(rng);
    double directional = 0.0;
    for (std::size_t j = 0; j < dir.size(); ++j) directional += gt[j] * dir[j];
    const double h = 1e-4;
    auto a = theta, b = theta;
    for (std::size_t j = 0; j < dir.size(); ++j) {
      a.values[j] += h * dir[j];
      b.values[j] -= h * dir[j];
    }
    CHECK((d.reduced_cost(a) - d.reduced_cost(b)) / (2 * h) == doctest::Approx(directional).epsilon(1e-6));
  }

  TEST_CASE("normalizations differ by the covered fraction") {
    const ControlDiscretization d(small_problem());
    const ScalarFn v = [](const Point& x) { return 1.0 + x.x2; };
    const auto a = d.characterize(v, ControlNormalization::CoveredMeasure);
    const auto b = d.characterize(v, ControlNormalization::DomainMeasure);
    const double ratio = d.problem().omega.measure() / d.decomposition().covered_measure();
    for (std::size_t j = 0; j < a.values.size(); ++j) CHECK(a.values[j] == doctest::Approx(ratio * b.values[j]));
    CHECK(ratio == doctest::Approx(4.0));
  }

  TEST_CASE("state equation is linear in the control") {
    const ControlDiscretization d(small_problem());
    const auto t = d.control_from([](const Point& y) { return y.x1 * y.x2; });
    const auto u0 = d.solve_state(d.zero_control());
    const auto u1 = d.solve_state(t);
    const auto du = d.solve_state(t, false);
    for (std::size_t i = 0; i < u0.values.size(); ++i) CHECK(u1.values[i] == doctest::Approx(u0.values[i] + du.values[i]).epsilon(1e-9));
  }
}
