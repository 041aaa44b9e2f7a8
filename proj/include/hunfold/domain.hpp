#pragma once

// Box domains in H^1, their decomposition into whole eps-cells and the
// boundary layer, and quadrature (Euclidean and cell-mapped).

#include <array>
#include <cstddef>
#include <functional>
#include <unordered_set>
#include <vector>

#include "hunfold/heisenberg.hpp"

namespace hunfold {

struct BoxDomain {
  Point lo;
  Point hi{1.0, 1.0, 1.0};

  /// Throws std::invalid_argument unless lo < hi componentwise.
  void validate() const;
  double measure() const noexcept;
  std::array<double, 3> extent() const noexcept;
  /// Closed-box membership with a relative slack of `tol`.
  bool contains(const Point& x, double tol = 1e-12) const noexcept;

  friend bool operator==(const BoxDomain&, const BoxDomain&) = default;
};

/// Tensor rule on Y = [0,2]^3. Weights are positive and sum to |Y| = 8.
struct QuadratureRule {
  std::vector<Point> nodes;
  std::vector<double> weights;

  std::size_t size() const noexcept { return nodes.size(); }

  /// n-point Gauss-Legendre per axis (1 <= n <= 10).
  static QuadratureRule gauss(int n);
  static QuadratureRule midpoint();
  /// Gauss-n on each of m^3 congruent sub-boxes.
  static QuadratureRule composite_gauss(int n, int m);
  /// Composite midpoint on m^3 sub-boxes.
  static QuadratureRule composite_midpoint(int m);
};

/// One-dimensional Gauss-Legendre nodes/weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

/// E_eps (cells inside the closed box) and the measure of the boundary layer.
struct EpsDecomposition {
  double eps = 1.0;
  BoxDomain omega;
  std::vector<CellIndex> interior;  // sorted lexicographically
  double lambda_measure = 0.0;      // |Omega| - 8 eps^4 |E_eps|

  bool empty() const noexcept { return interior.empty(); }
  double cell_measure() const noexcept;
  double covered_measure() const noexcept;
  bool contains(const CellIndex& k) const;
  /// The cell holding x when that cell belongs to E_eps.
  bool locate(const Point& x, CellIndex& k, Point& y) const;

 private:
  friend EpsDecomposition interior_cells(double eps, const BoxDomain& omega);
  std::unordered_set<CellIndex, CellIndexHash> lookup_;
};

/// Candidate k3 window for a horizontal cell position (before the vertex test).
std::array<std::int64_t, 2> vertical_search_range(double eps, const BoxDomain& omega, std::int64_t k1,
                                                  std::int64_t k2);

EpsDecomposition interior_cells(double eps, const BoxDomain& omega);

/// True when all 8 vertices of the cell lie in the closed box.
bool cell_inside(double eps, const CellIndex& k, const BoxDomain& omega);

struct MappedQuadrature {
  std::vector<Point> nodes;
  std::vector<double> weights;
};

/// Affine images of the rule nodes with weights scaled by eps^4.
MappedQuadrature cell_quadrature(double eps, const CellIndex& k, const QuadratureRule& rule);

struct Resolution {
  int n1 = 8;
  int n2 = 8;
  int n3 = 8;

  friend bool operator==(const Resolution&, const Resolution&) = default;
};

/// Tensor Gauss-`order` quadrature on a uniform Euclidean grid of the box.
/// Order 2*order for smooth integrands; order 1 is the midpoint rule.
double integrate_omega(const ScalarFn& f, const BoxDomain& omega, const Resolution& res, int order = 2);

/// Integral over Omega_eps via cell-mapped quadrature.
double integrate_covered(const ScalarFn& f, const EpsDecomposition& dec, const QuadratureRule& rule);

/// Integral over Omega_eps by Fubini in Euclidean coordinates: Gauss in
/// (x1, x2) on `sub` x `sub` squares per cell footprint, Gauss along each
/// vertical section of the covered cells. Independent of the cell-mapped rule.
double integrate_covered_fubini(const ScalarFn& f, const EpsDecomposition& dec, int sub, int order = 2,
                                int vertical_order = 6);

/// Integral over the boundary layer as whole-domain minus covered part.
double integrate_layer(const ScalarFn& f, const EpsDecomposition& dec, const Resolution& res,
                       const QuadratureRule& rule, int order = 3);

}  // namespace hunfold
