#pragma once

// The eps-unfolding operator T^eps, the averaging operator U_eps, and the
// numerical checks of their identities.
//
// T^eps(phi)(x, y) = phi(delta_eps(2k) . delta_eps(y)) for x in the cell k of
// Omega_eps and 0 on the boundary layer. Since T^eps(phi) is constant in x on
// each cell, a field is stored as one closure per cell index.

#include <functional>
#include <memory>
#include <vector>

#include "hunfold/domain.hpp"
#include "hunfold/horizontal.hpp"

namespace hunfold {

using TwoScaleFn = std::function<double(const Point& x, const Point& y)>;

class UnfoldedField {
 public:
  UnfoldedField(std::shared_ptr<const EpsDecomposition> dec, ScalarFn phi);

  double eps() const noexcept { return dec_->eps; }
  const EpsDecomposition& decomposition() const noexcept { return *dec_; }
  const std::vector<CellIndex>& cells() const noexcept { return dec_->interior; }

  /// values[k](y). Throws std::out_of_range when k is not in E_eps and
  /// std::domain_error when the image point leaves Omega.
  double value(const CellIndex& k, const Point& y) const;

  /// The y-function stored for cell k.
  std::function<double(const Point&)> cell(const CellIndex& k) const;

  /// T^eps(phi)(x, y); zero when x is in the boundary layer.
  double operator()(const Point& x, const Point& y) const;

 private:
  std::shared_ptr<const EpsDecomposition> dec_;
  ScalarFn phi_;
};

UnfoldedField unfold(std::shared_ptr<const EpsDecomposition> dec, ScalarFn phi);
UnfoldedField unfold(double eps, ScalarFn phi, const BoxDomain& omega);

/// (1/|Y|) int_{Omega x Y} T^eps(phi) using the per-cell representation.
double unfolded_integral(const UnfoldedField& field, const QuadratureRule& rule);

struct IdentityCheck {
  double lhs = 0.0;  // int_{Omega_eps} phi, cell-mapped quadrature
  double rhs = 0.0;  // (1/|Y|) int T^eps(phi), per-cell representation
  double residual = 0.0;
};

/// |lhs - rhs| / (1 + |lhs|) of the L^1 integral identity.
IdentityCheck integral_identity_residual(const EpsDecomposition& dec, const ScalarFn& phi,
                                         const QuadratureRule& rule);

struct NormBound {
  double lhs = 0.0;  // ||T^eps phi||_{L^p(Omega x Y)}
  double rhs = 0.0;  // |Y|^{1/p} ||phi||_{L^p(Omega)}
};

NormBound norm_bound_check(const EpsDecomposition& dec, const ScalarFn& phi, double p,
                           const QuadratureRule& rule, const Resolution& res);

/// U_eps(Phi) as a function on Omega (zero on the boundary layer).
ScalarFn average(std::shared_ptr<const EpsDecomposition> dec, TwoScaleFn Phi, QuadratureRule rule);

struct DualityCheck {
  double lhs = 0.0;  // int_Omega U_eps(Phi) psi
  double rhs = 0.0;  // (1/|Y|) int_{Omega x Y} Phi T^eps(psi)
  double residual = 0.0;
};

DualityCheck adjoint_duality_residual(std::shared_ptr<const EpsDecomposition> dec, const TwoScaleFn& Phi,
                                      const ScalarFn& psi, const QuadratureRule& rule);

/// max over cells and sample points of |grad_{H,y} T^eps(phi) - eps T^eps(grad_H phi)|.
/// The analytic backend differentiates phi o (cell map) by the chain rule.
double gradient_relation_residual(const EpsDecomposition& dec, const SmoothField& phi,
                                  const std::vector<Point>& samples, const Differentiation& backend,
                                  std::size_t max_cells = 0);

struct ConvergenceRow {
  double eps = 0.0;
  double sup_error = 0.0;  // over Omega_eps x Y
  double l2_error = 0.0;   // over Omega x Y, boundary layer included
};

/// ||T^eps(phi) - phi|| along eps_list. `samples` points per axis for the sup.
std::vector<ConvergenceRow> fixed_function_convergence(const ScalarFn& phi, const BoxDomain& omega,
                                                       const std::vector<double>& eps_list,
                                                       int samples = 5, int per_cell = 4);

/// Least-squares slope of log(value) against log(eps).
double loglog_slope(const std::vector<double>& eps, const std::vector<double>& values);

struct LayerRow {
  double eps = 0.0;
  double lambda_measure = 0.0;
  double layer_integral = 0.0;  // |int_{Lambda_eps} u_eps v|
};

using Family = std::function<ScalarFn(double eps)>;

/// Whole-domain Euclidean grids use `per_cell` elements per 2 eps horizontally.
std::vector<LayerRow> boundary_layer_residual(const std::vector<double>& eps_list, const Family& u_family,
                                              const ScalarFn& v, const BoxDomain& omega, int per_cell = 4);

struct PairingRow {
  double eps = 0.0;
  double direct = 0.0;    // int_Omega u_eps(x) psi(x, {delta_{1/eps} x}_H) dx
  double unfolded = 0.0;  // (1/|Y|) int_{Omega x Y} T^eps(u_eps) psi
  double gap = 0.0;
};

std::vector<PairingRow> two_scale_pairing(const std::vector<double>& eps_list, const Family& u_family,
                                          const TwoScaleFn& psi, const BoxDomain& omega,
                                          const QuadratureRule& rule, int per_cell = 4);

/// Elements per axis of a Euclidean grid with `per_cell` elements across each
/// horizontal cell width 2 eps (and across the vertical thickness 2 eps^2 when
/// `resolve_vertical`).
Resolution cell_resolved(const BoxDomain& omega, double eps, int per_cell, bool resolve_vertical = false);

}  // namespace hunfold
