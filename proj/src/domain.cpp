#include "hunfold/domain.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/quadrature/gauss.hpp>

#include "hunfold/parallel.hpp"

namespace hunfold {

namespace {

template <unsigned N>
void boost_gauss(std::vector<double>& nodes, std::vector<double>& weights) {
  using rule = boost::math::quadrature::gauss<double, N>;
  const auto& a = rule::abscissa();
  const auto& w = rule::weights();
  nodes.clear();
  weights.clear();
  // Boost stores the non-negative half; mirror it into ascending order.
  for (std::size_t i = a.size(); i-- > 0;) {
    if (a[i] == 0.0) continue;
    nodes.push_back(-a[i]);
    weights.push_back(w[i]);
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    nodes.push_back(a[i]);
    weights.push_back(w[i]);
  }
}

QuadratureRule tensor_on_Y(const std::vector<double>& n1d, const std::vector<double>& w1d, int m) {
  QuadratureRule rule;
  const double sub = ReferenceCell::side / m;
  std::vector<double> xs, ws;
  for (int s = 0; s < m; ++s) {
    for (std::size_t i = 0; i < n1d.size(); ++i) {
      xs.push_back(sub * s + 0.5 * sub * (n1d[i] + 1.0));
      ws.push_back(0.5 * sub * w1d[i]);
    }
  }
  rule.nodes.reserve(xs.size() * xs.size() * xs.size());
  rule.weights.reserve(rule.nodes.capacity());
  for (std::size_t c = 0; c < xs.size(); ++c)
    for (std::size_t b = 0; b < xs.size(); ++b)
      for (std::size_t a = 0; a < xs.size(); ++a) {
        rule.nodes.push_back({xs[a], xs[b], xs[c]});
        rule.weights.push_back(ws[a] * ws[b] * ws[c]);
      }
  return rule;
}

double scaled_tol(double v, double tol) { return tol * std::max(1.0, std::abs(v)); }

}  // namespace

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  switch (n) {
    case 1: nodes = {0.0}; weights = {2.0}; return;
    case 2: boost_gauss<2>(nodes, weights); return;
    case 3: boost_gauss<3>(nodes, weights); return;
    case 4: boost_gauss<4>(nodes, weights); return;
    case 5: boost_gauss<5>(nodes, weights); return;
    case 6: boost_gauss<6>(nodes, weights); return;
    case 7: boost_gauss<7>(nodes, weights); return;
    case 8: boost_gauss<8>(nodes, weights); return;
    case 9: boost_gauss<9>(nodes, weights); return;
    case 10: boost_gauss<10>(nodes, weights); return;
    default: throw std::invalid_argument("Gauss-Legendre order must be in 1..10");
  }
}

void BoxDomain::validate() const {
  const bool finite = std::isfinite(lo.x1) && std::isfinite(lo.x2) && std::isfinite(lo.x3) &&
                      std::isfinite(hi.x1) && std::isfinite(hi.x2) && std::isfinite(hi.x3);
  if (!finite || !(lo.x1 < hi.x1) || !(lo.x2 < hi.x2) || !(lo.x3 < hi.x3)) {
    throw std::invalid_argument("box domain needs finite bounds with lo < hi in every coordinate");
  }
}

double BoxDomain::measure() const noexcept {
  return (hi.x1 - lo.x1) * (hi.x2 - lo.x2) * (hi.x3 - lo.x3);
}

std::array<double, 3> BoxDomain::extent() const noexcept {
  return {hi.x1 - lo.x1, hi.x2 - lo.x2, hi.x3 - lo.x3};
}

bool BoxDomain::contains(const Point& x, double tol) const noexcept {
  return x.x1 >= lo.x1 - scaled_tol(lo.x1, tol) && x.x1 <= hi.x1 + scaled_tol(hi.x1, tol) &&
         x.x2 >= lo.x2 - scaled_tol(lo.x2, tol) && x.x2 <= hi.x2 + scaled_tol(hi.x2, tol) &&
         x.x3 >= lo.x3 - scaled_tol(lo.x3, tol) && x.x3 <= hi.x3 + scaled_tol(hi.x3, tol);
}

QuadratureRule QuadratureRule::gauss(int n) {
  std::vector<double> x, w;
  gauss_legendre(n, x, w);
  return tensor_on_Y(x, w, 1);
}

QuadratureRule QuadratureRule::midpoint() { return composite_midpoint(1); }

QuadratureRule QuadratureRule::composite_gauss(int n, int m) {
  if (m < 1) throw std::invalid_argument("composite rule needs at least one sub-box");
  std::vector<double> x, w;
  gauss_legendre(n, x, w);
  return tensor_on_Y(x, w, m);
}

QuadratureRule QuadratureRule::composite_midpoint(int m) {
  if (m < 1) throw std::invalid_argument("composite rule needs at least one sub-box");
  return tensor_on_Y({0.0}, {2.0}, m);
}

double EpsDecomposition::cell_measure() const noexcept {
  return ReferenceCell::measure * eps * eps * eps * eps;
}

double EpsDecomposition::covered_measure() const noexcept {
  return cell_measure() * static_cast<double>(interior.size());
}

bool EpsDecomposition::contains(const CellIndex& k) const { return lookup_.contains(k); }

bool EpsDecomposition::locate(const Point& x, CellIndex& k, Point& y) const {
  const auto d = eps_decompose(eps, x);
  k = d.index;
  y = d.frac;
  return contains(k);
}

bool cell_inside(double eps, const CellIndex& k, const BoxDomain& omega) {
  const auto verts = cell_vertices(eps, k);
  return std::all_of(verts.begin(), verts.end(), [&](const Point& v) { return omega.contains(v); });
}

std::array<std::int64_t, 2> vertical_search_range(double eps, const BoxDomain& omega, std::int64_t k1,
                                                  std::int64_t k2) {
  // Over y1, y2 in [0,2] the shear 4(k2 y1 - k1 y2) spans [smin, smax].
  const double smin = 8.0 * static_cast<double>(std::min<std::int64_t>(0, k2) - std::max<std::int64_t>(0, k1));
  const double smax = 8.0 * static_cast<double>(std::max<std::int64_t>(0, k2) - std::min<std::int64_t>(0, k1));
  const double e2 = eps * eps;
  const auto lo = static_cast<std::int64_t>(std::ceil((omega.lo.x3 / e2 - smin) / 2.0));
  const auto hi = static_cast<std::int64_t>(std::floor((omega.hi.x3 / e2 - 2.0 - smax) / 2.0));
  return {lo - 1, hi + 1};
}

EpsDecomposition interior_cells(double eps, const BoxDomain& omega) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw std::invalid_argument("eps must be positive");
  omega.validate();

  EpsDecomposition dec;
  dec.eps = eps;
  dec.omega = omega;
  const double w = 2.0 * eps;
  const auto k1lo = static_cast<std::int64_t>(std::ceil(omega.lo.x1 / w)) - 1;
  const auto k1hi = static_cast<std::int64_t>(std::floor(omega.hi.x1 / w)) ;
  const auto k2lo = static_cast<std::int64_t>(std::ceil(omega.lo.x2 / w)) - 1;
  const auto k2hi = static_cast<std::int64_t>(std::floor(omega.hi.x2 / w));
  for (auto k1 = k1lo; k1 <= k1hi; ++k1) {
    for (auto k2 = k2lo; k2 <= k2hi; ++k2) {
      const auto [lo3, hi3] = vertical_search_range(eps, omega, k1, k2);
      for (auto k3 = lo3; k3 <= hi3; ++k3) {
        const CellIndex k{k1, k2, k3};
        if (cell_inside(eps, k, omega)) dec.interior.push_back(k);
      }
    }
  }
  std::sort(dec.interior.begin(), dec.interior.end());
  dec.lookup_.reserve(dec.interior.size());
  dec.lookup_.insert(dec.interior.begin(), dec.interior.end());
  dec.lambda_measure = std::max(0.0, omega.measure() - dec.covered_measure());
  return dec;
}

MappedQuadrature cell_quadrature(double eps, const CellIndex& k, const QuadratureRule& rule) {
  const CellMap map{eps, k};
  const double jac = eps * eps * eps * eps;
  MappedQuadrature out;
  out.nodes.reserve(rule.size());
  out.weights.reserve(rule.size());
  for (std::size_t q = 0; q < rule.size(); ++q) {
    out.nodes.push_back(map(rule.nodes[q]));
    out.weights.push_back(jac * rule.weights[q]);
  }
  return out;
}

double integrate_omega(const ScalarFn& f, const BoxDomain& omega, const Resolution& res, int order) {
  omega.validate();
  if (res.n1 < 1 || res.n2 < 1 || res.n3 < 1) throw std::invalid_argument("resolution must be positive");
  std::vector<double> gx, gw;
  gauss_legendre(order, gx, gw);
  const auto ext = omega.extent();
  const double h1 = ext[0] / res.n1, h2 = ext[1] / res.n2, h3 = ext[2] / res.n3;
  const double scale = h1 * h2 * h3 / 8.0;

  // One partial per x3-slab, summed pairwise afterwards.
  std::vector<double> slabs(static_cast<std::size_t>(res.n3), 0.0);
  parallel_blocks(slabs.size(), slabs.size(), [&](std::size_t, std::size_t lo, std::size_t hi) {
    for (std::size_t l = lo; l < hi; ++l) {
      double acc = 0.0;
      for (int j = 0; j < res.n2; ++j)
        for (int i = 0; i < res.n1; ++i)
          for (std::size_t c = 0; c < gx.size(); ++c)
            for (std::size_t b = 0; b < gx.size(); ++b)
              for (std::size_t a = 0; a < gx.size(); ++a) {
                const Point x{omega.lo.x1 + h1 * (i + 0.5 * (gx[a] + 1.0)),
                              omega.lo.x2 + h2 * (j + 0.5 * (gx[b] + 1.0)),
                              omega.lo.x3 + h3 * (static_cast<double>(l) + 0.5 * (gx[c] + 1.0))};
                acc += gw[a] * gw[b] * gw[c] * f(x);
              }
      slabs[l] = acc * scale;
    }
  });
  return pairwise_sum(slabs);
}

double integrate_covered(const ScalarFn& f, const EpsDecomposition& dec, const QuadratureRule& rule) {
  std::vector<double> per_cell(dec.interior.size(), 0.0);
  const double jac = dec.eps * dec.eps * dec.eps * dec.eps;
  parallel_blocks(per_cell.size(), 256, [&](std::size_t, std::size_t lo, std::size_t hi) {
    for (std::size_t c = lo; c < hi; ++c) {
      const CellMap map{dec.eps, dec.interior[c]};
      double acc = 0.0;
      for (std::size_t q = 0; q < rule.size(); ++q) acc += rule.weights[q] * f(map(rule.nodes[q]));
      per_cell[c] = jac * acc;
    }
  });
  return pairwise_sum(per_cell);
}

double integrate_covered_fubini(const ScalarFn& f, const EpsDecomposition& dec, int sub, int order,
                                int vertical_order) {
  if (sub < 1) throw std::invalid_argument("sub-division count must be positive");
  std::vector<double> gx, gw, vx, vw;
  gauss_legendre(order, gx, gw);
  gauss_legendre(vertical_order, vx, vw);

  // Group covered cells by horizontal footprint (k1, k2); interior is sorted
  // so each footprint is a contiguous run.
  struct Footprint {
    std::int64_t k1, k2;
    std::vector<std::int64_t> k3s;
  };
  std::vector<Footprint> feet;
  for (const auto& k : dec.interior) {
    if (feet.empty() || feet.back().k1 != k.k1 || feet.back().k2 != k.k2) feet.push_back({k.k1, k.k2, {}});
    feet.back().k3s.push_back(k.k3);
  }

  const double eps = dec.eps, e2 = eps * eps;
  const double side = 2.0 * eps, h = side / sub;
  std::vector<double> partial(feet.size(), 0.0);
  parallel_blocks(feet.size(), feet.size(), [&](std::size_t, std::size_t lo, std::size_t hi) {
    for (std::size_t fi = lo; fi < hi; ++fi) {
      const auto& ft = feet[fi];
      const auto k1 = static_cast<double>(ft.k1), k2 = static_cast<double>(ft.k2);
      double acc = 0.0;
      for (int sj = 0; sj < sub; ++sj)
        for (int si = 0; si < sub; ++si)
          for (std::size_t b = 0; b < gx.size(); ++b)
            for (std::size_t a = 0; a < gx.size(); ++a) {
              const double x1 = side * k1 + h * (si + 0.5 * (gx[a] + 1.0));
              const double x2 = side * k2 + h * (sj + 0.5 * (gx[b] + 1.0));
              const double y1 = x1 / eps - 2.0 * k1, y2 = x2 / eps - 2.0 * k2;
              const double shear = 4.0 * (k2 * y1 - k1 * y2);
              double column = 0.0;
              for (auto k3 : ft.k3s) {
                const double z0 = e2 * (2.0 * static_cast<double>(k3) + shear);
                const double len = 2.0 * e2;
                double s = 0.0;
                for (std::size_t c = 0; c < vx.size(); ++c) s += vw[c] * f({x1, x2, z0 + 0.5 * len * (vx[c] + 1.0)});
                column += 0.5 * len * s;
              }
              acc += 0.25 * h * h * gw[a] * gw[b] * column;
            }
      partial[fi] = acc;
    }
  });
  return pairwise_sum(partial);
}

double integrate_layer(const ScalarFn& f, const EpsDecomposition& dec, const Resolution& res,
                       const QuadratureRule& rule, int order) {
  return integrate_omega(f, dec.omega, res, order) - integrate_covered(f, dec, rule);
}

}  // namespace hunfold
