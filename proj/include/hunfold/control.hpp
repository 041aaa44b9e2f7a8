#pragma once

// Interior periodic optimal control on Omega_eps: minimise
//   J(u, theta) = 1/2 int A^eps grad_H u . grad_H u + rho/2 int_{Omega_eps} |theta^eps|^2
// subject to -div_H(A^eps grad_H u) + u = f + chi_{Omega_eps} theta^eps.
//
// theta is nodal on a uniform Y grid; every integral involving theta^eps is
// taken with the cell-mapped nodal trapezoid rule, so the discrete optimality
// system is the exact gradient of the discrete cost.

#include <stdexcept>
#include <string>
#include <vector>

#include "hunfold/homogenize.hpp"

namespace hunfold {

enum class ControlNormalization {
  CoveredMeasure,  // -1/(rho |Omega_eps|) int T^eps(v) dx, the exact discrete first-order condition
  DomainMeasure,   // -1/(rho |Omega|) int T^eps(v) dx
};

struct ControlProblem {
  PeriodicCoefficient A = PeriodicCoefficient::identity();
  ScalarFn f = [](const Point&) { return 0.0; };
  double rho = 1.0;
  double eps = 0.5;
  BoxDomain omega{{0.0, 0.0, 0.0}, {2.0, 2.0, 2.0}};
  Resolution grid{16, 16, 16};
  int control_n = 16;  // Y grid for theta
  CgOptions solver{1e-13, 20000, false};

  void validate() const;
};

struct ControlSolution {
  GridFunction u_bar;
  GridFunction v_bar;
  GridFunction theta_bar;
  double J = 0.0;
  int iterations = 0;
  double relaxation = 1.0;
  std::vector<double> residual_history;  // fixed-point residual per accepted step
};

class ControlNotConverged : public std::runtime_error {
 public:
  ControlNotConverged(std::vector<double> history);
  std::vector<double> history;
};

/// Discrete operators of one control problem (matrices, unfolding samples).
class ControlDiscretization {
 public:
  explicit ControlDiscretization(ControlProblem problem);

  const ControlProblem& problem() const noexcept { return p_; }
  const StructuredGrid& omega_grid() const noexcept { return grid_; }
  const StructuredGrid& y_grid() const noexcept { return ygrid_; }
  const EpsDecomposition& decomposition() const noexcept { return dec_; }
  const std::vector<double>& y_weights() const noexcept { return yw_; }

  GridFunction zero_control() const;
  GridFunction control_from(const ScalarFn& theta) const;

  /// (S + M) u = F + B theta
  GridFunction solve_state(const GridFunction& theta) const;
  GridFunction solve_state(const GridFunction& theta, bool with_source) const;
  /// (S + M) v = S u, the weak form of the adjoint equation.
  GridFunction solve_adjoint(const GridFunction& u) const;
  /// y_j -> -(scale) sum_k v(map_k y_j), scale set by the normalization.
  GridFunction characterize(const ScalarFn& v, ControlNormalization norm) const;
  GridFunction characterize(const GridFunction& v, ControlNormalization norm) const;

  double cost(const GridFunction& u, const GridFunction& theta) const;
  double reduced_cost(const GridFunction& theta) const;
  /// B^t v + rho |E| eps^4 W theta at the state/adjoint of theta.
  std::vector<double> reduced_gradient(const GridFunction& theta) const;

  /// int_{Omega_eps} a^eps b^eps
  double control_inner(const GridFunction& a, const GridFunction& b) const;
  /// int_{Omega_eps} v theta^eps
  double adjoint_pairing(const ScalarFn& v, const GridFunction& theta) const;

  /// Load vector B theta.
  std::vector<double> control_load(const GridFunction& theta) const;

 private:
  struct Sample {
    std::array<std::uint32_t, 8> nodes;
    std::array<double, 8> phi;
    std::uint32_t j;  // Y node
  };

  double normalization(ControlNormalization norm) const;

  ControlProblem p_;
  StructuredGrid grid_;
  StructuredGrid ygrid_;
  EpsDecomposition dec_;
  std::vector<double> yw_;
  CsrMatrix S_;
  CsrMatrix K_;
  std::vector<double> F_;
  std::vector<Sample> samples_;
  std::vector<std::size_t> cell_of_sample_;
};

GridFunction solve_state(const ControlProblem& problem, const GridFunction& theta);
GridFunction solve_adjoint(const ControlProblem& problem, const GridFunction& u_bar);
GridFunction characterize_control(const ControlProblem& problem, const ScalarFn& v_bar,
                                  ControlNormalization norm = ControlNormalization::CoveredMeasure);

/// Relaxed fixed point theta <- characterize(adjoint(state(theta))).
ControlSolution optimize(const ControlProblem& problem, double tol = 1e-11, int maxit = 200);
ControlSolution optimize(const ControlDiscretization& disc, double tol = 1e-11, int maxit = 200);

/// Default test controls on Y.
std::vector<ScalarFn> control_battery();

/// Max over the battery of the relative gap between int_{Omega_eps} theta_bar^eps theta^eps
/// and -(1/rho) int_{Omega_eps} v_bar theta^eps.
double optimality_residual(const ControlSolution& sol, const ControlDiscretization& disc,
                           const std::vector<ScalarFn>& battery);
double optimality_residual(const ControlSolution& sol, const ControlProblem& problem,
                           const std::vector<ScalarFn>& battery);

}  // namespace hunfold
