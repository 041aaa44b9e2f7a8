#pragma once

// Trilinear finite elements on uniform box grids, compressed sparse rows and
// a preconditioned conjugate gradient.

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "hunfold/domain.hpp"
#include "hunfold/horizontal.hpp"

namespace hunfold {

/// Row-major 2x2 matrix acting on horizontal vectors.
using Matrix2 = std::array<double, 4>;

class StructuredGrid {
 public:
  StructuredGrid() = default;
  StructuredGrid(const BoxDomain& box, const Resolution& cells);

  const BoxDomain& box() const noexcept { return box_; }
  const Resolution& cells() const noexcept { return cells_; }
  std::array<double, 3> spacing() const noexcept { return h_; }
  std::size_t node_count() const noexcept;
  std::size_t element_count() const noexcept;

  std::size_t node_index(int i, int j, int l) const noexcept {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(cells_.n1 + 1) *
               (static_cast<std::size_t>(j) + static_cast<std::size_t>(cells_.n2 + 1) * static_cast<std::size_t>(l));
  }
  Point node(int i, int j, int l) const noexcept;
  Point node(std::size_t index) const noexcept;

  /// Nodes of element (ie, je, le); local node a has offsets (a&1, a>>1&1, a>>2&1).
  std::array<std::size_t, 8> element_nodes(int ie, int je, int le) const noexcept;

  /// Element holding x (points outside are clamped onto the box) and the
  /// local coordinates t in [0,1]^3.
  void locate(const Point& x, std::array<int, 3>& e, std::array<double, 3>& t) const noexcept;

  friend bool operator==(const StructuredGrid&, const StructuredGrid&) = default;

 private:
  BoxDomain box_;
  Resolution cells_;
  std::array<double, 3> h_{};
};

/// Nodal values on a structured grid with trilinear interpolation.
struct GridFunction {
  StructuredGrid grid;
  std::vector<double> values;

  GridFunction() = default;
  GridFunction(StructuredGrid g, std::vector<double> v);
  static GridFunction interpolate(const StructuredGrid& g, const ScalarFn& f);
  static GridFunction zero(const StructuredGrid& g);

  double operator()(const Point& x) const noexcept;
  EuclideanGradient gradient(const Point& x) const noexcept;
  HorizontalVector horizontal_gradient(const Point& x) const noexcept;
};

/// Components along X1 and X2.
struct HorizontalSection {
  GridFunction c1;
  GridFunction c2;
};

class CsrMatrix {
 public:
  CsrMatrix() = default;

  static CsrMatrix identity(std::size_t n);
  /// Duplicates are summed; columns sorted within each row.
  static CsrMatrix from_triplets(std::size_t n, std::vector<std::uint32_t> rows, std::vector<std::uint32_t> cols,
                                 std::vector<double> vals);
  /// 27-point pattern of the trilinear space on a box grid, zero values.
  static CsrMatrix box_pattern(const StructuredGrid& grid);

  std::size_t rows() const noexcept { return row_ptr_.empty() ? 0 : row_ptr_.size() - 1; }
  std::size_t nonzeros() const noexcept { return val_.size(); }

  /// Reference to an existing entry; throws std::out_of_range outside the pattern.
  double& at(std::size_t r, std::size_t c);
  double get(std::size_t r, std::size_t c) const noexcept;

  void multiply(std::span<const double> x, std::span<double> y) const;
  std::vector<double> multiply(std::span<const double> x) const;
  std::vector<double> diagonal() const;
  /// max |a_ij - a_ji|
  double asymmetry() const;
  /// this += s * other, patterns must coincide.
  void add_scaled(const CsrMatrix& other, double s);
  std::vector<double> to_dense() const;

  std::span<const std::size_t> row_ptr() const noexcept { return row_ptr_; }
  std::span<const std::uint32_t> col() const noexcept { return col_; }
  std::span<const double> values() const noexcept { return val_; }

 private:
  std::vector<std::size_t> row_ptr_;
  std::vector<std::uint32_t> col_;
  std::vector<double> val_;
};

struct CgOptions {
  double tol = 1e-10;
  int maxit = 20000;
  /// Solve a consistent singular system whose kernel is the constant vector.
  bool project_constants = false;
  /// Tridiagonal line blocks: line q holds rows q + s * line_count, s < line_length.
  /// Zero selects point Jacobi.
  std::size_t line_count = 0;
  std::size_t line_length = 0;
  /// Node counts of a box grid; nonzero selects the x1-x2 semi-coarsening
  /// multigrid V-cycle with x3 line smoothing (nonsingular systems only).
  std::array<std::size_t, 3> multigrid_nodes{};
};

/// opt with line blocks along x3 of the grid.
CgOptions vertical_lines(CgOptions opt, const StructuredGrid& grid);
/// opt with the line multigrid on the grid.
CgOptions line_multigrid(CgOptions opt, const StructuredGrid& grid);

struct CgReport {
  int iterations = 0;
  double residual = 0.0;  // ||b - A x|| / ||b||
};

class NotConverged : public std::runtime_error {
 public:
  NotConverged(std::vector<double> best, double residual, int iterations);
  std::vector<double> best;
  double residual;
  int iterations;
};

/// x holds the initial guess on entry. Throws NotConverged after maxit.
CgReport conjugate_gradient(const CsrMatrix& A, std::span<const double> b, std::vector<double>& x,
                            const CgOptions& opt);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

/// Pointwise horizontal coefficient x -> A(x).
using CoefficientFn = std::function<Matrix2(const Point&)>;

struct FemSystem {
  StructuredGrid grid;
  CsrMatrix matrix;
  std::vector<double> rhs;
};

/// int A grad_H phi_b . grad_H phi_a + mass int phi_b phi_a, Gauss-`order` per axis.
CsrMatrix assemble_operator(const StructuredGrid& grid, const CoefficientFn& A, double mass, int order = 3);

/// int f phi_a
std::vector<double> assemble_source(const StructuredGrid& grid, const ScalarFn& f, int order = 3);

/// int G . grad_H phi_a
std::vector<double> assemble_flux(const StructuredGrid& grid,
                                  const std::function<HorizontalVector(const Point&)>& G, int order = 3);

/// int_{boundary} g phi_a dS
std::vector<double> assemble_boundary(const StructuredGrid& grid, const ScalarFn& g, int order = 3);

/// Reference shape functions of the trilinear element.
double shape_value(int a, const std::array<double, 3>& t) noexcept;
std::array<double, 3> shape_gradient(int a, const std::array<double, 3>& t) noexcept;

/// int_Omega (u - v)^2 for grid functions on the same grid, or against a closure.
double l2_distance(const GridFunction& u, const GridFunction& v, int order = 3);
double l2_error(const GridFunction& u, const ScalarFn& exact, int order = 3);
double l2_norm(const GridFunction& u, int order = 3);

}  // namespace hunfold
