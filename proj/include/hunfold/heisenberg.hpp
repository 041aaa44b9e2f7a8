#pragma once

// Arithmetic on the first Heisenberg group H^1 (R^3 with a non-commutative
// product), its anisotropic dilations, the homogeneous norm, and the
// decomposition of a point into a lattice cell and a position inside the
// reference cell Y = [0,2)^3.

#include <array>
#include <cstdint>
#include <functional>

namespace hunfold {

struct Point {
  double x1 = 0.0;
  double x2 = 0.0;
  double x3 = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

/// Integer label of the tile Y_k^eps.
struct CellIndex {
  std::int64_t k1 = 0;
  std::int64_t k2 = 0;
  std::int64_t k3 = 0;

  friend bool operator==(const CellIndex&, const CellIndex&) = default;
  friend auto operator<=>(const CellIndex&, const CellIndex&) = default;
};

struct CellIndexHash {
  std::size_t operator()(const CellIndex& k) const noexcept;
};

/// Reference cell Y = [0,2)^3.
struct ReferenceCell {
  static constexpr double side = 2.0;
  static constexpr double measure = 8.0;

  /// Half-open membership test.
  static bool contains(const Point& y) noexcept;
};

/// x = delta_eps(2 index) . delta_eps(frac)
struct ScaleDecomposition {
  double eps = 1.0;
  CellIndex index;
  Point frac;
};

Point group_mul(const Point& p, const Point& q) noexcept;
Point group_inv(const Point& p) noexcept;

/// tau_p(x) = p . x
inline Point translate(const Point& p, const Point& x) noexcept { return group_mul(p, x); }

/// delta_lambda(x) = (lambda x1, lambda x2, lambda^2 x3). Throws on lambda <= 0.
Point dilate(double lambda, const Point& p);

/// max{ sqrt(x1^2 + x2^2), sqrt|x3| }
double hnorm(const Point& p) noexcept;

/// Left-invariant distance ||p^{-1} . q||.
double hdist(const Point& p, const Point& q) noexcept;

double euclidean_distance(const Point& p, const Point& q) noexcept;

/// Greatest even integer <= r.
std::int64_t even_floor(double r);

/// r - even_floor(r), clamped into [0,2).
double even_frac(double r);

/// The lattice point 2k as an element of H^1 (for k integer, scale = 2).
Point scale_int(std::int64_t scale, const CellIndex& k) noexcept;

/// Heisenberg integer part [x]_H: the k with x in 2k . Y.
CellIndex int_part_H(const Point& x);

/// Heisenberg fractional part {x}_H = (2[x]_H)^{-1} . x, in Y.
Point frac_part_H(const Point& x);

/// Exact lattice product (2k).(2m) = 2k' in integer arithmetic.
CellIndex lattice_mul(const CellIndex& k, const CellIndex& m) noexcept;

ScaleDecomposition eps_decompose(double eps, const Point& x);

/// delta_eps(2k) . delta_eps(y)
Point reconstruct(double eps, const CellIndex& k, const Point& y);

/// Max-norm reconstruction error of eps_decompose relative to max(1, |x|_inf).
double reconstruction_error(double eps, const Point& x);

/// Affine image y -> delta_eps(2k . y) of the reference cell.
struct CellMap {
  double eps;
  CellIndex k;

  Point operator()(const Point& y) const noexcept;
  Point inverse(const Point& x) const noexcept;
  /// Row-major linear part of the affine map.
  std::array<double, 9> linear_part() const noexcept;
  double jacobian() const noexcept;
};

/// Images of the 8 vertices of Y, ordered with y1 fastest.
std::array<Point, 8> cell_vertices(double eps, const CellIndex& k);

using ScalarFn = std::function<double(const Point&)>;

/// x -> h({x}_H); the result is exactly Y-periodic.
ScalarFn periodize(ScalarFn h);

/// x -> h({delta_{1/eps} x}_H), the eps-oscillating version of h.
ScalarFn oscillate(ScalarFn h, double eps);

}  // namespace hunfold
