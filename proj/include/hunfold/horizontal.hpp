#pragma once

// Horizontal calculus on H^1. The left-invariant fields
//   X1 = d1 + 2 x2 d3,   X2 = d2 - 2 x1 d3
// act on scalar closures; grad_H f = C(x) grad f with the 2x3 frame C(x).

#include <array>
#include <functional>
#include <optional>

#include "hunfold/heisenberg.hpp"

namespace hunfold {

using EuclideanGradient = std::array<double, 3>;

/// Rows (1, 0, 2 x2) and (0, 1, -2 x1).
struct FrameMatrix {
  std::array<std::array<double, 3>, 2> rows{};

  int rank() const noexcept;
};

struct HorizontalVector {
  double v1 = 0.0;
  double v2 = 0.0;
};

/// A scalar field with an optional user-supplied Euclidean gradient.
struct SmoothField {
  std::function<double(const Point&)> value;
  std::function<EuclideanGradient(const Point&)> gradient;  // may be empty
};

/// A horizontal section (phi1, phi2) with optional Euclidean Jacobian rows.
struct HorizontalField {
  std::function<HorizontalVector(const Point&)> value;
  std::function<std::array<EuclideanGradient, 2>(const Point&)> jacobian;  // may be empty
};

struct Differentiation {
  enum class Kind { analytic, finite_difference };
  Kind kind = Kind::finite_difference;
  /// Central-difference step; 0 selects cbrt(machine eps) * (1 + |x|).
  double step = 0.0;

  static Differentiation analytic() { return {Kind::analytic, 0.0}; }
  static Differentiation fd(double h = 0.0) { return {Kind::finite_difference, h}; }
};

FrameMatrix frame_at(const Point& x) noexcept;

HorizontalVector apply_frame(const Point& x, const EuclideanGradient& g) noexcept;

/// C(x)^t v, the Euclidean vector carried by a horizontal vector.
EuclideanGradient frame_transpose(const Point& x, const HorizontalVector& v) noexcept;

double default_step(const Point& x) noexcept;

/// Central-difference Euclidean gradient. Throws when the step is below 1e-12.
EuclideanGradient fd_gradient(const std::function<double(const Point&)>& f, const Point& x, double h);

HorizontalVector grad_H(const SmoothField& f, const Point& x, const Differentiation& d);

/// Same fields in the cell variable y: Y1 = d/dy1 + 2 y2 d/dy3, Y2 = d/dy2 - 2 y1 d/dy3.
HorizontalVector grad_Hy(const SmoothField& f, const Point& y, const Differentiation& d);

/// X1 phi1 + X2 phi2.
double div_H(const HorizontalField& phi, const Point& x, const Differentiation& d);

/// Euclidean divergence of C^t phi, computed independently of div_H.
double div_H_euclidean_form(const HorizontalField& phi, const Point& x, double h = 0.0);

/// X_i f (i in {1,2,3}, X3 = d3) as a scalar closure using finite differences.
std::function<double(const Point&)> vector_field_fd(int i, std::function<double(const Point&)> f,
                                                    double h);

}  // namespace hunfold
