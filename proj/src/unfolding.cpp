#include "hunfold/unfolding.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "hunfold/parallel.hpp"

namespace hunfold {

namespace {

std::shared_ptr<const EpsDecomposition> borrow(const EpsDecomposition& dec) {
  return {&dec, [](const EpsDecomposition*) {}};
}

double eps4(double eps) { return eps * eps * eps * eps; }

// Per-cell partial sums reduced pairwise, independent of the thread count.
template <class CellFn>
double sum_over_cells(const std::vector<CellIndex>& cells, CellFn&& fn) {
  std::vector<double> partial(cells.size(), 0.0);
  parallel_blocks(cells.size(), 256, [&](std::size_t, std::size_t lo, std::size_t hi) {
    for (std::size_t c = lo; c < hi; ++c) partial[c] = fn(cells[c]);
  });
  return pairwise_sum(partial);
}

}  // namespace

UnfoldedField::UnfoldedField(std::shared_ptr<const EpsDecomposition> dec, ScalarFn phi)
    : dec_(std::move(dec)), phi_(std::move(phi)) {
  if (!dec_) throw std::invalid_argument("unfolding needs a decomposition");
}

double UnfoldedField::value(const CellIndex& k, const Point& y) const {
  if (!dec_->contains(k)) throw std::out_of_range("cell is not inside Omega_eps");
  const Point x = group_mul(dilate(dec_->eps, scale_int(2, k)), dilate(dec_->eps, y));
  if (!dec_->omega.contains(x, 1e-9)) throw std::domain_error("unfolding evaluated phi outside Omega");
  return phi_(x);
}

std::function<double(const Point&)> UnfoldedField::cell(const CellIndex& k) const {
  if (!dec_->contains(k)) throw std::out_of_range("cell is not inside Omega_eps");
  return [self = *this, k](const Point& y) { return self.value(k, y); };
}

double UnfoldedField::operator()(const Point& x, const Point& y) const {
  const auto d = eps_decompose(dec_->eps, x);
  return dec_->contains(d.index) ? value(d.index, y) : 0.0;
}

UnfoldedField unfold(std::shared_ptr<const EpsDecomposition> dec, ScalarFn phi) {
  return UnfoldedField(std::move(dec), std::move(phi));
}

UnfoldedField unfold(double eps, ScalarFn phi, const BoxDomain& omega) {
  return unfold(std::make_shared<const EpsDecomposition>(interior_cells(eps, omega)), std::move(phi));
}

double unfolded_integral(const UnfoldedField& field, const QuadratureRule& rule) {
  // |Y_k| / |Y| = eps^4 for every cell.
  const double scale = eps4(field.eps());
  return sum_over_cells(field.cells(), [&](const CellIndex& k) {
    double acc = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) acc += rule.weights[q] * field.value(k, rule.nodes[q]);
    return scale * acc;
  });
}

IdentityCheck integral_identity_residual(const EpsDecomposition& dec, const ScalarFn& phi,
                                         const QuadratureRule& rule) {
  IdentityCheck out;
  out.lhs = integrate_covered(phi, dec, rule);
  out.rhs = unfolded_integral(unfold(borrow(dec), phi), rule);
  out.residual = std::abs(out.lhs - out.rhs) / (1.0 + std::abs(out.lhs));
  return out;
}

NormBound norm_bound_check(const EpsDecomposition& dec, const ScalarFn& phi, double p,
                           const QuadratureRule& rule, const Resolution& res) {
  if (!(p > 1.0) || !std::isfinite(p)) throw std::invalid_argument("p must lie in (1, inf)");
  const auto field = unfold(borrow(dec), phi);
  const double cell_measure = dec.cell_measure();
  const double lhs_p = sum_over_cells(field.cells(), [&](const CellIndex& k) {
    double acc = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q)
      acc += rule.weights[q] * std::pow(std::abs(field.value(k, rule.nodes[q])), p);
    return cell_measure * acc;
  });
  const double phi_p = integrate_omega([&](const Point& x) { return std::pow(std::abs(phi(x)), p); },
                                       dec.omega, res, 3);
  return {std::pow(lhs_p, 1.0 / p), std::pow(ReferenceCell::measure, 1.0 / p) * std::pow(phi_p, 1.0 / p)};
}

ScalarFn average(std::shared_ptr<const EpsDecomposition> dec, TwoScaleFn Phi, QuadratureRule rule) {
  return [dec = std::move(dec), Phi = std::move(Phi), rule = std::move(rule)](const Point& x) {
    CellIndex k;
    Point y;
    if (!dec->locate(x, k, y)) return 0.0;
    const CellMap map{dec->eps, k};
    double acc = 0.0;
    for (std::size_t r = 0; r < rule.size(); ++r) acc += rule.weights[r] * Phi(map(rule.nodes[r]), y);
    return acc / ReferenceCell::measure;
  };
}

DualityCheck adjoint_duality_residual(std::shared_ptr<const EpsDecomposition> dec, const TwoScaleFn& Phi,
                                      const ScalarFn& psi, const QuadratureRule& rule) {
  const auto U = average(dec, Phi, rule);
  const auto T = unfold(dec, psi);
  const double jac = eps4(dec->eps);

  DualityCheck out;
  // Left: U_eps(Phi) is evaluated at physical points and relocates them.
  out.lhs = integrate_covered([&](const Point& x) { return U(x) * psi(x); }, *dec, rule);
  // Right: x = map_k(z) over the cell, y over Y, T^eps(psi) from the unfolded field.
  out.rhs = sum_over_cells(dec->interior, [&](const CellIndex& k) {
    const CellMap map{dec->eps, k};
    double acc = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Point& y = rule.nodes[q];
      double inner = 0.0;
      for (std::size_t r = 0; r < rule.size(); ++r) inner += rule.weights[r] * Phi(map(rule.nodes[r]), y);
      acc += rule.weights[q] * inner * T.value(k, y);
    }
    return jac * acc / ReferenceCell::measure;
  });
  out.residual = std::abs(out.lhs - out.rhs) / (1.0 + std::abs(out.lhs));
  return out;
}

double gradient_relation_residual(const EpsDecomposition& dec, const SmoothField& phi,
                                  const std::vector<Point>& samples, const Differentiation& backend,
                                  std::size_t max_cells) {
  const auto field = unfold(borrow(dec), phi.value);
  const auto& cells = dec.interior;
  const std::size_t count = (max_cells == 0 || max_cells >= cells.size()) ? cells.size() : max_cells;
  const bool analytic = backend.kind == Differentiation::Kind::analytic;
  if (analytic && !phi.gradient) throw std::invalid_argument("analytic backend needs a gradient closure");

  double worst = 0.0;
  for (std::size_t s = 0; s < count; ++s) {
    const std::size_t c = count == cells.size() ? s : s * cells.size() / count;
    const CellIndex& k = cells[c];
    const CellMap map{dec.eps, k};
    const auto L = map.linear_part();
    for (const Point& y : samples) {
      const Point x = map(y);
      HorizontalVector lhs, rhs;
      if (analytic) {
        const auto g = phi.gradient(x);
        const EuclideanGradient gy{g[0] * L[0] + g[1] * L[3] + g[2] * L[6],
                                   g[0] * L[1] + g[1] * L[4] + g[2] * L[7],
                                   g[0] * L[2] + g[1] * L[5] + g[2] * L[8]};
        lhs = apply_frame(y, gy);
        rhs = apply_frame(x, g);
      } else {
        lhs = grad_Hy({[&](const Point& yy) { return field.value(k, yy); }, {}}, y, backend);
        rhs = grad_H({phi.value, {}}, x, backend);
      }
      worst = std::max({worst, std::abs(lhs.v1 - dec.eps * rhs.v1), std::abs(lhs.v2 - dec.eps * rhs.v2)});
    }
  }
  return worst;
}

Resolution cell_resolved(const BoxDomain& omega, double eps, int per_cell, bool resolve_vertical) {
  const auto ext = omega.extent();
  auto count = [](double len, double h) { return std::max(1, static_cast<int>(std::ceil(len / h - 1e-9))); };
  const double hh = 2.0 * eps / per_cell;
  const double hv = resolve_vertical ? 2.0 * eps * eps / per_cell : hh;
  return {count(ext[0], hh), count(ext[1], hh), count(ext[2], hv)};
}

std::vector<ConvergenceRow> fixed_function_convergence(const ScalarFn& phi, const BoxDomain& omega,
                                                       const std::vector<double>& eps_list, int samples,
                                                       int per_cell) {
  if (samples < 2) throw std::invalid_argument("sup sampling needs at least 2 points per axis");
  const auto rule = QuadratureRule::gauss(4);
  std::vector<Point> grid;
  for (int c = 0; c < samples; ++c)
    for (int b = 0; b < samples; ++b)
      for (int a = 0; a < samples; ++a) {
        const double s = 2.0 / (samples - 1);
        grid.push_back({a * s, b * s, c * s});
      }

  std::vector<ConvergenceRow> rows;
  for (double eps : eps_list) {
    const auto dec = interior_cells(eps, omega);
    const double jac = eps4(eps);
    std::vector<double> sup(dec.interior.size(), 0.0), l2(dec.interior.size(), 0.0);
    parallel_blocks(dec.interior.size(), 256, [&](std::size_t, std::size_t lo, std::size_t hi) {
      for (std::size_t c = lo; c < hi; ++c) {
        const CellMap map{eps, dec.interior[c]};
        double mn = INFINITY, mx = -INFINITY;
        for (const auto& y : grid) {
          const double v = phi(map(y));
          mn = std::min(mn, v);
          mx = std::max(mx, v);
        }
        sup[c] = mx - mn;
        // sum_{q,r} w_q w_r (a_q - a_r)^2 = 2 |Y| sum w a^2 - 2 (sum w a)^2
        double s1 = 0.0, s2 = 0.0;
        for (std::size_t q = 0; q < rule.size(); ++q) {
          const double a = phi(map(rule.nodes[q]));
          s1 += rule.weights[q] * a;
          s2 += rule.weights[q] * a * a;
        }
        l2[c] = jac * std::max(0.0, 2.0 * ReferenceCell::measure * s2 - 2.0 * s1 * s1);
      }
    });
    const auto phi2 = [&](const Point& x) { const double v = phi(x); return v * v; };
    const double layer = std::max(
        0.0, integrate_layer(phi2, dec, cell_resolved(omega, eps, per_cell), rule, 3));
    ConvergenceRow row;
    row.eps = eps;
    row.sup_error = sup.empty() ? 0.0 : *std::max_element(sup.begin(), sup.end());
    row.l2_error = std::sqrt(pairwise_sum(l2) + ReferenceCell::measure * layer);
    rows.push_back(row);
  }
  return rows;
}

double loglog_slope(const std::vector<double>& eps, const std::vector<double>& values) {
  if (eps.size() != values.size() || eps.size() < 2) throw std::invalid_argument("slope needs >= 2 pairs");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const auto n = static_cast<double>(eps.size());
  for (std::size_t i = 0; i < eps.size(); ++i) {
    const double x = std::log(eps[i]), y = std::log(values[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::vector<LayerRow> boundary_layer_residual(const std::vector<double>& eps_list, const Family& u_family,
                                              const ScalarFn& v, const BoxDomain& omega, int per_cell) {
  const auto rule = QuadratureRule::composite_gauss(4, 2);
  std::vector<LayerRow> rows;
  for (double eps : eps_list) {
    const auto dec = interior_cells(eps, omega);
    const auto u = u_family(eps);
    const auto uv = [&](const Point& x) { return u(x) * v(x); };
    const double layer = integrate_layer(uv, dec, cell_resolved(omega, eps, per_cell), rule, 3);
    rows.push_back({eps, dec.lambda_measure, std::abs(layer)});
  }
  return rows;
}

std::vector<PairingRow> two_scale_pairing(const std::vector<double>& eps_list, const Family& u_family,
                                          const TwoScaleFn& psi, const BoxDomain& omega,
                                          const QuadratureRule& rule, int per_cell) {
  std::vector<PairingRow> rows;
  for (double eps : eps_list) {
    const auto dec = std::make_shared<const EpsDecomposition>(interior_cells(eps, omega));
    const auto u = u_family(eps);
    PairingRow row;
    row.eps = eps;
    row.direct = integrate_omega(
        [&](const Point& x) { return u(x) * psi(x, frac_part_H(dilate(1.0 / eps, x))); }, omega,
        cell_resolved(omega, eps, per_cell), 3);
    const auto T = unfold(dec, u);
    const double jac = eps4(eps);
    row.unfolded = sum_over_cells(dec->interior, [&](const CellIndex& k) {
      const CellMap map{eps, k};
      double acc = 0.0;
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const Point& y = rule.nodes[q];
        double inner = 0.0;
        for (std::size_t r = 0; r < rule.size(); ++r) inner += rule.weights[r] * psi(map(rule.nodes[r]), y);
        acc += rule.weights[q] * T.value(k, y) * inner;
      }
      return jac * acc / ReferenceCell::measure;
    });
    row.gap = std::abs(row.direct - row.unfolded);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace hunfold
