#pragma once

// The oscillating problem -div_H(A^eps grad_H u) + u = f with the natural
// boundary condition, the two Heisenberg-periodic cell problems, the
// homogenized matrix A0 and the homogenized problem, the corrector, and the
// eps -> 0 study.

#include <string>
#include <vector>

#include "hunfold/fem.hpp"
#include "hunfold/unfolding.hpp"

namespace hunfold {

struct PeriodicCoefficient {
  std::function<Matrix2(const Point& y)> A;  // on Y, symmetric
  double alpha = 1.0;                        // ellipticity
  double beta = 1.0;                         // bound
  std::string name = "custom";

  static PeriodicCoefficient identity();
  static PeriodicCoefficient constant(const Matrix2& M);
  /// (a0 + a1 sin(freq pi y1)) I, freq a positive integer.
  static PeriodicCoefficient laminate(double a0, double a1, int freq = 1);
  /// a_lo on unit squares with floor(y1) + floor(y2) even, a_hi otherwise.
  static PeriodicCoefficient checkerboard(double a_lo, double a_hi);
  /// Trilinear interpolation of nodal samples (a11, a12, a22) on a Y grid.
  static PeriodicCoefficient sampled(const StructuredGrid& ygrid, std::vector<Matrix2> samples);

  /// Checks alpha |v|^2 <= <A v, v> and |A v| <= beta |v| on a sample of Y x S^1.
  /// Throws std::invalid_argument on failure.
  void validate(int samples = 9) const;
};

/// A(frac_part_H(delta_{1/eps} x)).
Matrix2 eval_oscillating(const PeriodicCoefficient& A, double eps, const Point& x);
CoefficientFn oscillating(const PeriodicCoefficient& A, double eps);

FemSystem assemble_eps_problem(const PeriodicCoefficient& A, double eps, const ScalarFn& f, const BoxDomain& omega,
                               const Resolution& n, int order = 3);

struct FemSolution {
  GridFunction u;
  CgReport report;
};

FemSolution solve_fem(const FemSystem& system, const CgOptions& opt = {});

struct CellSolution {
  int n = 0;
  StructuredGrid grid;                // uniform n^3 grid of [0,2]^3
  std::vector<std::size_t> node_dof;  // node -> glued degree of freedom
  std::size_t dofs = 0;
  GridFunction Z1, Z2;                // nodal values, equal on identified nodes
  std::array<CgReport, 2> reports{};
  std::array<double, 2> rhs_sum{};    // compatibility: sum of assembled right-hand side
  std::array<double, 2> residual{};   // ||K z - b|| / ||b|| of the discrete weak form

  /// Z_i at any y (periodically reduced into Y first).
  double Z(int i, const Point& y) const;
  HorizontalVector grad_Z(int i, const Point& y) const;
};

/// Node classes of the uniform n-grid on Y under the Heisenberg-periodic identification.
std::vector<std::size_t> periodic_dof_map(int n, std::size_t& dof_count);

CellSolution solve_cell(const PeriodicCoefficient& A, int n, const CgOptions& opt = {1e-12, 20000, true},
                        int order = 3);

/// int_Y A (I + [grad_Hy Z1, grad_Hy Z2]), row-major.
Matrix2 homogenized_matrix(const PeriodicCoefficient& A, const CellSolution& cell, int order = 3);

/// -div_H(A0 grad_H u) + |Y| u = |Y| f with A0 grad_H u . n_H = 0.
FemSolution solve_homogenized(const Matrix2& A0, const ScalarFn& f, const BoxDomain& omega, const Resolution& n,
                              const CgOptions& opt = {}, int order = 3);

/// u1(x, y) = sum_i Z_i(y) X_i u(x)
TwoScaleFn corrector(const CellSolution& cell, const GridFunction& u);

/// Battery member psi(x, y) = c(x) d(y) e_component.
struct PairingTest {
  std::string name;
  int component = 1;  // 1 or 2
  int c_kind = 0;     // 0: 1, 1: x1, 2: bubble vanishing on the boundary, 3: x1 * bubble
  int d_kind = 0;     // 0: 1, 1: sin(pi y1), 2: bump supported in (0.2, 1.8)^3
};

std::vector<PairingTest> default_pairing_battery();
double pairing_c(int kind, const Point& x, const BoxDomain& omega);
double pairing_d(int kind, const Point& y);

struct StudyRow {
  double eps = 0.0;
  double lambda_measure = 0.0;
  double l2_gap = 0.0;       // ||u_eps - u||_{L^2}
  double energy_eps = 0.0;   // 1/2 int A^eps grad u_eps . grad u_eps + 1/2 int u_eps^2
  double energy_hom = 0.0;   // same with A0 / |Y|
  double energy_gap = 0.0;
  std::vector<double> pairing_gaps;       // over Omega_eps x Y
  std::vector<double> full_pairing_gaps;  // over Omega x Y, boundary layer included
  int iterations = 0;
};

struct ConvergenceStudy {
  Matrix2 A0{};
  std::vector<PairingTest> battery;
  std::vector<StudyRow> rows;
  int homogenized_iterations = 0;
  double f_norm = 0.0;
};

/// Throws std::invalid_argument when eps_list is not strictly decreasing or
/// the grid has fewer than 4 elements per cell per axis at the smallest eps.
ConvergenceStudy convergence_study(const PeriodicCoefficient& A, const ScalarFn& f, const BoxDomain& omega,
                                   const std::vector<double>& eps_list, const Resolution& n, int cell_n,
                                   const CgOptions& opt = {});

/// Minimum grid for `per_cell` elements across a cell at eps.
Resolution resolving_grid(const BoxDomain& omega, double eps, int per_cell = 4);
bool resolves(const BoxDomain& omega, const Resolution& n, double eps, int per_cell = 4);

}  // namespace hunfold
