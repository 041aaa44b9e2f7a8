#include "hunfold/horizontal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hunfold {

namespace {

constexpr double kMinStep = 1e-12;

double resolve_step(const Point& x, double h) {
  const double step = h > 0.0 ? h : default_step(x);
  if (!(step >= kMinStep)) throw std::invalid_argument("finite-difference step below 1e-12");
  return step;
}

EuclideanGradient euclidean_gradient(const SmoothField& f, const Point& x, const Differentiation& d) {
  if (d.kind == Differentiation::Kind::analytic) {
    if (!f.gradient) throw std::invalid_argument("analytic backend needs a gradient closure");
    return f.gradient(x);
  }
  return fd_gradient(f.value, x, resolve_step(x, d.step));
}

}  // namespace

int FrameMatrix::rank() const noexcept {
  // The leading 2x2 block is the identity, so the rank is always 2; computed
  // from the 2x2 minors all the same.
  const auto& a = rows[0];
  const auto& b = rows[1];
  const double m01 = a[0] * b[1] - a[1] * b[0];
  const double m02 = a[0] * b[2] - a[2] * b[0];
  const double m12 = a[1] * b[2] - a[2] * b[1];
  if (m01 != 0.0 || m02 != 0.0 || m12 != 0.0) return 2;
  const bool nonzero = std::any_of(a.begin(), a.end(), [](double v) { return v != 0.0; }) ||
                       std::any_of(b.begin(), b.end(), [](double v) { return v != 0.0; });
  return nonzero ? 1 : 0;
}

FrameMatrix frame_at(const Point& x) noexcept {
  return {{{{1.0, 0.0, 2.0 * x.x2}, {0.0, 1.0, -2.0 * x.x1}}}};
}

HorizontalVector apply_frame(const Point& x, const EuclideanGradient& g) noexcept {
  return {g[0] + 2.0 * x.x2 * g[2], g[1] - 2.0 * x.x1 * g[2]};
}

EuclideanGradient frame_transpose(const Point& x, const HorizontalVector& v) noexcept {
  return {v.v1, v.v2, 2.0 * x.x2 * v.v1 - 2.0 * x.x1 * v.v2};
}

double default_step(const Point& x) noexcept {
  const double scale = 1.0 + std::max({std::abs(x.x1), std::abs(x.x2), std::abs(x.x3)});
  return std::cbrt(std::numeric_limits<double>::epsilon()) * scale;
}

EuclideanGradient fd_gradient(const std::function<double(const Point&)>& f, const Point& x, double h) {
  if (!(h >= kMinStep)) throw std::invalid_argument("finite-difference step below 1e-12");
  const double inv = 0.5 / h;
  return {(f({x.x1 + h, x.x2, x.x3}) - f({x.x1 - h, x.x2, x.x3})) * inv,
          (f({x.x1, x.x2 + h, x.x3}) - f({x.x1, x.x2 - h, x.x3})) * inv,
          (f({x.x1, x.x2, x.x3 + h}) - f({x.x1, x.x2, x.x3 - h})) * inv};
}

HorizontalVector grad_H(const SmoothField& f, const Point& x, const Differentiation& d) {
  return apply_frame(x, euclidean_gradient(f, x, d));
}

HorizontalVector grad_Hy(const SmoothField& f, const Point& y, const Differentiation& d) {
  return grad_H(f, y, d);
}

double div_H(const HorizontalField& phi, const Point& x, const Differentiation& d) {
  std::array<EuclideanGradient, 2> jac;
  if (d.kind == Differentiation::Kind::analytic) {
    if (!phi.jacobian) throw std::invalid_argument("analytic backend needs a Jacobian closure");
    jac = phi.jacobian(x);
  } else {
    const double h = resolve_step(x, d.step);
    jac[0] = fd_gradient([&](const Point& p) { return phi.value(p).v1; }, x, h);
    jac[1] = fd_gradient([&](const Point& p) { return phi.value(p).v2; }, x, h);
  }
  return apply_frame(x, jac[0]).v1 + apply_frame(x, jac[1]).v2;
}

double div_H_euclidean_form(const HorizontalField& phi, const Point& x, double h) {
  const double step = resolve_step(x, h);
  auto component = [&](int c) {
    return [&, c](const Point& p) { return frame_transpose(p, phi.value(p))[static_cast<std::size_t>(c)]; };
  };
  const double inv = 0.5 / step;
  const auto f0 = component(0), f1 = component(1), f2 = component(2);
  return (f0({x.x1 + step, x.x2, x.x3}) - f0({x.x1 - step, x.x2, x.x3})) * inv +
         (f1({x.x1, x.x2 + step, x.x3}) - f1({x.x1, x.x2 - step, x.x3})) * inv +
         (f2({x.x1, x.x2, x.x3 + step}) - f2({x.x1, x.x2, x.x3 - step})) * inv;
}

std::function<double(const Point&)> vector_field_fd(int i, std::function<double(const Point&)> f,
                                                    double h) {
  if (i < 1 || i > 3) throw std::invalid_argument("vector field index must be 1, 2 or 3");
  if (!(h >= kMinStep)) throw std::invalid_argument("finite-difference step below 1e-12");
  return [i, f = std::move(f), h](const Point& x) {
    const auto g = fd_gradient(f, x, h);
    switch (i) {
      case 1: return g[0] + 2.0 * x.x2 * g[2];
      case 2: return g[1] - 2.0 * x.x1 * g[2];
      default: return g[2];
    }
  };
}

}  // namespace hunfold
