#include "hunfold/heisenberg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace hunfold {

namespace {

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(std::string(what) + " must be positive and finite");
  }
}

// Returns ([r]_e, {r}_e) with the fractional part forced into [0,2). When
// rounding pushes r - [r]_e up to exactly 2 (r a tiny negative number), the
// pair is moved to the next even integer.
std::pair<std::int64_t, double> even_split(double r) {
  if (!std::isfinite(r)) throw std::invalid_argument("even part of a non-finite value");
  const double fl = 2.0 * std::floor(r * 0.5);
  double fr = r - fl;
  auto k = static_cast<std::int64_t>(fl);
  if (fr >= 2.0) {
    fr = 0.0;
    k += 2;
  } else if (fr < 0.0) {
    fr = 0.0;
  }
  return {k, fr};
}

// c = 2([x2]_e {x1}_e - [x1]_e {x2}_e); the shear that converts x3 into the
// vertical coordinate relative to the horizontal lattice point.
struct HorizontalSplit {
  std::int64_t e1, e2;
  double f1, f2;
  double shear;
};

HorizontalSplit split_horizontal(const Point& x) {
  auto [e1, f1] = even_split(x.x1);
  auto [e2, f2] = even_split(x.x2);
  const double shear = 2.0 * (static_cast<double>(e2) * f1 - static_cast<double>(e1) * f2);
  return {e1, e2, f1, f2, shear};
}

}  // namespace

std::size_t CellIndexHash::operator()(const CellIndex& k) const noexcept {
  std::size_t h = std::hash<std::int64_t>{}(k.k1);
  h ^= std::hash<std::int64_t>{}(k.k2) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  h ^= std::hash<std::int64_t>{}(k.k3) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

bool ReferenceCell::contains(const Point& y) noexcept {
  return y.x1 >= 0.0 && y.x1 < side && y.x2 >= 0.0 && y.x2 < side && y.x3 >= 0.0 && y.x3 < side;
}

Point group_mul(const Point& p, const Point& q) noexcept {
  return {p.x1 + q.x1, p.x2 + q.x2, p.x3 + q.x3 + 2.0 * (p.x2 * q.x1 - p.x1 * q.x2)};
}

Point group_inv(const Point& p) noexcept { return {-p.x1, -p.x2, -p.x3}; }

Point dilate(double lambda, const Point& p) {
  require_positive(lambda, "dilation factor");
  return {lambda * p.x1, lambda * p.x2, lambda * lambda * p.x3};
}

double hnorm(const Point& p) noexcept {
  return std::max(std::hypot(p.x1, p.x2), std::sqrt(std::abs(p.x3)));
}

double hdist(const Point& p, const Point& q) noexcept { return hnorm(group_mul(group_inv(p), q)); }

double euclidean_distance(const Point& p, const Point& q) noexcept {
  const double d1 = p.x1 - q.x1, d2 = p.x2 - q.x2, d3 = p.x3 - q.x3;
  return std::sqrt(d1 * d1 + d2 * d2 + d3 * d3);
}

std::int64_t even_floor(double r) { return even_split(r).first; }

double even_frac(double r) { return even_split(r).second; }

Point scale_int(std::int64_t scale, const CellIndex& k) noexcept {
  const auto s = static_cast<double>(scale);
  return {s * static_cast<double>(k.k1), s * static_cast<double>(k.k2), s * static_cast<double>(k.k3)};
}

CellIndex int_part_H(const Point& x) {
  const auto h = split_horizontal(x);
  const auto e3 = even_split(x.x3 - h.shear).first;
  return {h.e1 / 2, h.e2 / 2, e3 / 2};
}

Point frac_part_H(const Point& x) {
  const auto h = split_horizontal(x);
  return {h.f1, h.f2, even_split(x.x3 - h.shear).second};
}

CellIndex lattice_mul(const CellIndex& k, const CellIndex& m) noexcept {
  return {k.k1 + m.k1, k.k2 + m.k2, k.k3 + m.k3 + 4 * (k.k2 * m.k1 - k.k1 * m.k2)};
}

ScaleDecomposition eps_decompose(double eps, const Point& x) {
  require_positive(eps, "eps");
  const Point z = dilate(1.0 / eps, x);
  const auto h = split_horizontal(z);
  const auto [e3, f3] = even_split(z.x3 - h.shear);
  return {eps, {h.e1 / 2, h.e2 / 2, e3 / 2}, {h.f1, h.f2, f3}};
}

Point reconstruct(double eps, const CellIndex& k, const Point& y) {
  return group_mul(dilate(eps, scale_int(2, k)), dilate(eps, y));
}

double reconstruction_error(double eps, const Point& x) {
  const auto d = eps_decompose(eps, x);
  const Point r = reconstruct(eps, d.index, d.frac);
  const double err = std::max({std::abs(r.x1 - x.x1), std::abs(r.x2 - x.x2), std::abs(r.x3 - x.x3)});
  const double scale = std::max({1.0, std::abs(x.x1), std::abs(x.x2), std::abs(x.x3)});
  return err / scale;
}

Point CellMap::operator()(const Point& y) const noexcept {
  const auto k1 = static_cast<double>(k.k1), k2 = static_cast<double>(k.k2),
             k3 = static_cast<double>(k.k3);
  return {eps * (2.0 * k1 + y.x1), eps * (2.0 * k2 + y.x2),
          eps * eps * (2.0 * k3 + y.x3 + 4.0 * (k2 * y.x1 - k1 * y.x2))};
}

Point CellMap::inverse(const Point& x) const noexcept {
  const auto k1 = static_cast<double>(k.k1), k2 = static_cast<double>(k.k2),
             k3 = static_cast<double>(k.k3);
  const double y1 = x.x1 / eps - 2.0 * k1;
  const double y2 = x.x2 / eps - 2.0 * k2;
  const double y3 = x.x3 / (eps * eps) - 2.0 * k3 - 4.0 * (k2 * y1 - k1 * y2);
  return {y1, y2, y3};
}

std::array<double, 9> CellMap::linear_part() const noexcept {
  const auto k1 = static_cast<double>(k.k1), k2 = static_cast<double>(k.k2);
  const double e2 = eps * eps;
  return {eps, 0.0, 0.0,  //
          0.0, eps, 0.0,  //
          4.0 * e2 * k2, -4.0 * e2 * k1, e2};
}

double CellMap::jacobian() const noexcept {
  const auto m = linear_part();
  return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
         m[2] * (m[3] * m[7] - m[4] * m[6]);
}

std::array<Point, 8> cell_vertices(double eps, const CellIndex& k) {
  require_positive(eps, "eps");
  const CellMap map{eps, k};
  std::array<Point, 8> out;
  for (int v = 0; v < 8; ++v) {
    const Point y{(v & 1) ? 2.0 : 0.0, (v & 2) ? 2.0 : 0.0, (v & 4) ? 2.0 : 0.0};
    out[static_cast<std::size_t>(v)] = map(y);
  }
  return out;
}

ScalarFn periodize(ScalarFn h) {
  return [h = std::move(h)](const Point& x) { return h(frac_part_H(x)); };
}

ScalarFn oscillate(ScalarFn h, double eps) {
  require_positive(eps, "eps");
  return [h = std::move(h), eps](const Point& x) { return h(frac_part_H(dilate(1.0 / eps, x))); };
}

}  // namespace hunfold
