#include "hunfold/homogenize.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "hunfold/parallel.hpp"

namespace hunfold {

namespace {

const BoxDomain kCellBox{{0.0, 0.0, 0.0}, {2.0, 2.0, 2.0}};

Matrix2 scaled_identity(double a) { return {a, 0.0, 0.0, a}; }

// Eigenvalues of a symmetric 2x2 matrix.
std::array<double, 2> sym_eig(const Matrix2& m) {
  const double tr = 0.5 * (m[0] + m[3]);
  const double d = std::hypot(0.5 * (m[0] - m[3]), 0.5 * (m[1] + m[2]));
  return {tr - d, tr + d};
}

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), std::size_t{0}); }
  std::size_t find(std::size_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

int wrap(long v, int n) { return static_cast<int>(((v % n) + n) % n); }

}  // namespace

// ------------------------------------------------------------ coefficients

PeriodicCoefficient PeriodicCoefficient::identity() {
  return {[](const Point&) { return scaled_identity(1.0); }, 1.0, 1.0, "identity"};
}

PeriodicCoefficient PeriodicCoefficient::constant(const Matrix2& M) {
  if (std::abs(M[1] - M[2]) > 1e-14 * (1.0 + std::abs(M[1]))) throw std::invalid_argument("coefficient must be symmetric");
  const auto ev = sym_eig(M);
  if (!(ev[0] > 0.0)) throw std::invalid_argument("coefficient must be positive definite");
  return {[M](const Point&) { return M; }, ev[0], ev[1], "constant"};
}

PeriodicCoefficient PeriodicCoefficient::laminate(double a0, double a1, int freq) {
  if (freq < 1) throw std::invalid_argument("laminate frequency must be a positive integer");
  if (!(a0 - std::abs(a1) > 0.0)) throw std::invalid_argument("laminate needs a0 > |a1|");
  return {[=](const Point& y) { return scaled_identity(a0 + a1 * std::sin(freq * std::numbers::pi * y.x1)); },
          a0 - std::abs(a1), a0 + std::abs(a1), "laminate"};
}

PeriodicCoefficient PeriodicCoefficient::checkerboard(double a_lo, double a_hi) {
  if (!(a_lo > 0.0) || !(a_hi > 0.0)) throw std::invalid_argument("checkerboard values must be positive");
  return {[=](const Point& y) {
            const auto s = static_cast<long>(std::floor(y.x1)) + static_cast<long>(std::floor(y.x2));
            return scaled_identity((s & 1) ? a_hi : a_lo);
          },
          std::min(a_lo, a_hi), std::max(a_lo, a_hi), "checkerboard"};
}

PeriodicCoefficient PeriodicCoefficient::sampled(const StructuredGrid& ygrid, std::vector<Matrix2> samples) {
  if (samples.size() != ygrid.node_count()) throw std::invalid_argument("one sample per grid node required");
  double lo = INFINITY, hi = 0.0;
  for (auto& m : samples) {
    m[2] = m[1];
    const auto ev = sym_eig(m);
    lo = std::min(lo, ev[0]);
    hi = std::max(hi, ev[1]);
  }
  if (!(lo > 0.0)) throw std::invalid_argument("sampled coefficient is not positive definite");
  std::array<GridFunction, 3> parts;
  for (int c = 0; c < 3; ++c) {
    std::vector<double> v(samples.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = samples[i][c == 2 ? 3 : c];
    parts[c] = GridFunction(ygrid, std::move(v));
  }
  // Trilinear interpolation keeps the bounds of the samples.
  return {[parts](const Point& y) {
            const double a12 = parts[1](y);
            return Matrix2{parts[0](y), a12, a12, parts[2](y)};
          },
          lo, hi, "sampled"};
}

void PeriodicCoefficient::validate(int samples) const {
  if (!A) throw std::invalid_argument("coefficient closure is empty");
  if (!(alpha > 0.0) || !(beta >= alpha)) throw std::invalid_argument("need 0 < alpha <= beta");
  for (int c = 0; c < samples; ++c)
    for (int b = 0; b < samples; ++b)
      for (int a = 0; a < samples; ++a) {
        const Point y{2.0 * (a + 0.5) / samples, 2.0 * (b + 0.5) / samples, 2.0 * (c + 0.5) / samples};
        const Matrix2 m = A(y);
        for (int s = 0; s < 16; ++s) {
          const double th = std::numbers::pi * s / 8.0;
          const double v1 = std::cos(th), v2 = std::sin(th);
          const double av1 = m[0] * v1 + m[1] * v2, av2 = m[2] * v1 + m[3] * v2;
          const double tol = 1e-12 * beta;
          if (av1 * v1 + av2 * v2 < alpha - tol || std::hypot(av1, av2) > beta + tol)
            throw std::invalid_argument("coefficient violates its ellipticity bounds");
        }
      }
}

Matrix2 eval_oscillating(const PeriodicCoefficient& A, double eps, const Point& x) {
  return A.A(frac_part_H(dilate(1.0 / eps, x)));
}

CoefficientFn oscillating(const PeriodicCoefficient& A, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  return [f = A.A, inv = 1.0 / eps](const Point& x) { return f(frac_part_H(dilate(inv, x))); };
}

// ---------------------------------------------------------- eps problem

FemSystem assemble_eps_problem(const PeriodicCoefficient& A, double eps, const ScalarFn& f, const BoxDomain& omega,
                               const Resolution& n, int order) {
  if (n.n1 < 2 || n.n2 < 2 || n.n3 < 2) throw std::invalid_argument("need at least 2 elements per axis");
  StructuredGrid grid(omega, n);
  FemSystem sys{grid, assemble_operator(grid, oscillating(A, eps), 1.0, order), assemble_source(grid, f, order)};
  return sys;
}

FemSolution solve_fem(const FemSystem& system, const CgOptions& opt) {
  std::vector<double> x(system.rhs.size(), 0.0);
  const auto report = conjugate_gradient(system.matrix, system.rhs, x, line_multigrid(vertical_lines(opt, system.grid), system.grid));
  return {GridFunction(system.grid, std::move(x)), report};
}

// --------------------------------------------------------- cell problems

std::vector<std::size_t> periodic_dof_map(int n, std::size_t& dof_count) {
  if (n < 2) throw std::invalid_argument("cell grid needs n >= 2");
  const StructuredGrid grid(kCellBox, {n, n, n});
  UnionFind uf(grid.node_count());
  for (int l = 0; l <= n; ++l)
    for (int j = 0; j <= n; ++j)
      for (int i = 0; i <= n; ++i) {
        const auto me = grid.node_index(i, j, l);
        // (2, y2, y3) ~ (0, y2, y3 + 4 y2); h = 2/n so the shift is 4j nodes.
        if (i == n) uf.unite(me, grid.node_index(0, j, wrap(static_cast<long>(l) + 4L * j, n)));
        // (y1, 2, y3) ~ (y1, 0, y3 - 4 y1)
        if (j == n) uf.unite(me, grid.node_index(i, 0, wrap(static_cast<long>(l) - 4L * i, n)));
        if (l == n) uf.unite(me, grid.node_index(i, j, 0));
      }
  std::vector<std::size_t> root_dof(grid.node_count(), SIZE_MAX), out(grid.node_count());
  dof_count = 0;
  for (std::size_t v = 0; v < out.size(); ++v) {
    const auto r = uf.find(v);
    if (root_dof[r] == SIZE_MAX) root_dof[r] = dof_count++;
    out[v] = root_dof[r];
  }
  return out;
}

double CellSolution::Z(int i, const Point& y) const {
  const Point r = ReferenceCell::contains(y) ? y : frac_part_H(y);
  return (i == 1 ? Z1 : Z2)(r);
}

HorizontalVector CellSolution::grad_Z(int i, const Point& y) const {
  const Point r = ReferenceCell::contains(y) ? y : frac_part_H(y);
  return (i == 1 ? Z1 : Z2).horizontal_gradient(r);
}

CellSolution solve_cell(const PeriodicCoefficient& A, int n, const CgOptions& opt, int order) {
  CellSolution cell;
  cell.n = n;
  cell.grid = StructuredGrid(kCellBox, {n, n, n});
  cell.node_dof = periodic_dof_map(n, cell.dofs);
  const auto& grid = cell.grid;
  const auto h = grid.spacing();
  const double vol = h[0] * h[1] * h[2];

  std::vector<double> gt, gw;
  gauss_legendre(order, gt, gw);
  for (std::size_t i = 0; i < gt.size(); ++i) {
    gt[i] = 0.5 * (gt[i] + 1.0);
    gw[i] *= 0.5;
  }

  const std::size_t nel = grid.element_count();
  std::vector<std::uint32_t> rows, cols;
  std::vector<double> vals;
  rows.reserve(nel * 64);
  cols.reserve(nel * 64);
  vals.reserve(nel * 64);
  std::array<std::vector<double>, 2> b{std::vector<double>(cell.dofs, 0.0), std::vector<double>(cell.dofs, 0.0)};
  std::vector<double> basis_mass(cell.dofs, 0.0);

  for (int le = 0; le < n; ++le)
    for (int je = 0; je < n; ++je)
      for (int ie = 0; ie < n; ++ie) {
        double Ke[8][8] = {}, be[2][8] = {}, me[8] = {};
        for (std::size_t c = 0; c < gt.size(); ++c)
          for (std::size_t bq = 0; bq < gt.size(); ++bq)
            for (std::size_t a = 0; a < gt.size(); ++a) {
              const std::array<double, 3> t{gt[a], gt[bq], gt[c]};
              const Point y{(ie + t[0]) * h[0], (je + t[1]) * h[1], (le + t[2]) * h[2]};
              const double w = gw[a] * gw[bq] * gw[c] * vol;
              const Matrix2 m = A.A(y);
              double g1[8], g2[8];
              for (int k = 0; k < 8; ++k) {
                const auto d = shape_gradient(k, t);
                const auto hv = apply_frame(y, {d[0] / h[0], d[1] / h[1], d[2] / h[2]});
                g1[k] = hv.v1;
                g2[k] = hv.v2;
                me[k] += w * shape_value(k, t);
              }
              for (int r = 0; r < 8; ++r) {
                const double ag1 = m[0] * g1[r] + m[2] * g2[r];
                const double ag2 = m[1] * g1[r] + m[3] * g2[r];
                for (int s = 0; s < 8; ++s) Ke[r][s] += w * (ag1 * g1[s] + ag2 * g2[s]);
                // -int A e_i . grad_Hy phi_r
                be[0][r] -= w * (m[0] * g1[r] + m[2] * g2[r]);
                be[1][r] -= w * (m[1] * g1[r] + m[3] * g2[r]);
              }
            }
        const auto nodes = grid.element_nodes(ie, je, le);
        for (int r = 0; r < 8; ++r) {
          const auto dr = cell.node_dof[nodes[r]];
          b[0][dr] += be[0][r];
          b[1][dr] += be[1][r];
          basis_mass[dr] += me[r];
          for (int s = 0; s < 8; ++s) {
            rows.push_back(static_cast<std::uint32_t>(dr));
            cols.push_back(static_cast<std::uint32_t>(cell.node_dof[nodes[s]]));
            vals.push_back(Ke[r][s]);
          }
        }
      }

  const auto K = CsrMatrix::from_triplets(cell.dofs, std::move(rows), std::move(cols), std::move(vals));
  CgOptions o = opt;
  o.project_constants = true;
  for (int i = 0; i < 2; ++i) {
    cell.rhs_sum[i] = pairwise_sum(b[i]);
    std::vector<double> z(cell.dofs, 0.0);
    cell.reports[i] = conjugate_gradient(K, b[i], z, o);
    // Mean zero over Y.
    double mean = 0.0;
    for (std::size_t d = 0; d < z.size(); ++d) mean += basis_mass[d] * z[d];
    mean /= ReferenceCell::measure;
    for (double& v : z) v -= mean;

    auto Kz = K.multiply(z);
    std::vector<double> r(z.size());
    const double bmean = cell.rhs_sum[i] / static_cast<double>(z.size());
    for (std::size_t d = 0; d < z.size(); ++d) r[d] = (b[i][d] - bmean) - Kz[d];
    const double bn = norm2(b[i]);
    cell.residual[i] = bn > 0.0 ? norm2(r) / bn : norm2(r);

    std::vector<double> nodal(grid.node_count());
    for (std::size_t v = 0; v < nodal.size(); ++v) nodal[v] = z[cell.node_dof[v]];
    (i == 0 ? cell.Z1 : cell.Z2) = GridFunction(grid, std::move(nodal));
  }
  return cell;
}

Matrix2 homogenized_matrix(const PeriodicCoefficient& A, const CellSolution& cell, int order) {
  const auto& grid = cell.grid;
  const auto h = grid.spacing();
  const double vol = h[0] * h[1] * h[2];
  std::vector<double> gt, gw;
  gauss_legendre(order, gt, gw);
  const int n = cell.n;
  std::vector<std::array<double, 4>> slab(static_cast<std::size_t>(n));
  for (int le = 0; le < n; ++le) {
    std::array<double, 4> acc{};
    for (int je = 0; je < n; ++je)
      for (int ie = 0; ie < n; ++ie) {
        const auto nodes = grid.element_nodes(ie, je, le);
        for (std::size_t c = 0; c < gt.size(); ++c)
          for (std::size_t b = 0; b < gt.size(); ++b)
            for (std::size_t a = 0; a < gt.size(); ++a) {
              const std::array<double, 3> t{0.5 * (gt[a] + 1), 0.5 * (gt[b] + 1), 0.5 * (gt[c] + 1)};
              const Point y{(ie + t[0]) * h[0], (je + t[1]) * h[1], (le + t[2]) * h[2]};
              const double w = 0.125 * gw[a] * gw[b] * gw[c] * vol;
              EuclideanGradient d1{}, d2{};
              for (int k = 0; k < 8; ++k) {
                const auto d = shape_gradient(k, t);
                for (int q = 0; q < 3; ++q) {
                  d1[q] += cell.Z1.values[nodes[k]] * d[q] / h[q];
                  d2[q] += cell.Z2.values[nodes[k]] * d[q] / h[q];
                }
              }
              const auto z1 = apply_frame(y, d1), z2 = apply_frame(y, d2);
              // columns e_i + grad_Hy Z_i
              const double G[4] = {1.0 + z1.v1, z2.v1, z1.v2, 1.0 + z2.v2};
              const Matrix2 m = A.A(y);
              acc[0] += w * (m[0] * G[0] + m[1] * G[2]);
              acc[1] += w * (m[0] * G[1] + m[1] * G[3]);
              acc[2] += w * (m[2] * G[0] + m[3] * G[2]);
              acc[3] += w * (m[2] * G[1] + m[3] * G[3]);
            }
      }
    slab[static_cast<std::size_t>(le)] = acc;
  }
  Matrix2 A0{};
  for (int c = 0; c < 4; ++c) {
    std::vector<double> v(slab.size());
    for (std::size_t s = 0; s < slab.size(); ++s) v[s] = slab[s][c];
    A0[c] = pairwise_sum(v);
  }
  return A0;
}

FemSolution solve_homogenized(const Matrix2& A0, const ScalarFn& f, const BoxDomain& omega, const Resolution& n,
                              const CgOptions& opt, int order) {
  const auto ev = sym_eig({A0[0], 0.5 * (A0[1] + A0[2]), 0.5 * (A0[1] + A0[2]), A0[3]});
  if (!(ev[0] > 0.0)) throw std::invalid_argument("A0 must be positive definite");
  StructuredGrid grid(omega, n);
  const double Y = ReferenceCell::measure;
  auto rhs = assemble_source(grid, f, order);
  for (double& v : rhs) v *= Y;
  FemSystem sys{grid, assemble_operator(grid, [A0](const Point&) { return A0; }, Y, order), std::move(rhs)};
  return solve_fem(sys, opt);
}

TwoScaleFn corrector(const CellSolution& cell, const GridFunction& u) {
  return [&cell, &u](const Point& x, const Point& y) {
    const auto g = u.horizontal_gradient(x);
    return cell.Z(1, y) * g.v1 + cell.Z(2, y) * g.v2;
  };
}

// ------------------------------------------------------ convergence study

constexpr int kCKinds = 4;

std::vector<PairingTest> default_pairing_battery() {
  static const char* cname[] = {"1", "x1", "bubble", "x1bubble"};
  static const char* dname[] = {"1", "sin", "bump"};
  std::vector<PairingTest> out;
  for (int j = 1; j <= 2; ++j)
    for (int c = 0; c < 4; ++c)
      for (int d = 0; d < 3; ++d)
        out.push_back({std::string("e") + std::to_string(j) + "*" + cname[c] + "*" + dname[d], j, c, d});
  return out;
}

double pairing_c(int kind, const Point& x, const BoxDomain& omega) {
  if (kind == 0) return 1.0;
  if (kind == 1) return x.x1;
  double b = 1.0;
  const double xs[3] = {x.x1, x.x2, x.x3}, lo[3] = {omega.lo.x1, omega.lo.x2, omega.lo.x3},
               hi[3] = {omega.hi.x1, omega.hi.x2, omega.hi.x3};
  for (int a = 0; a < 3; ++a) {
    const double h = 0.5 * (hi[a] - lo[a]);
    b *= (xs[a] - lo[a]) * (hi[a] - xs[a]) / (h * h);
  }
  return kind == 2 ? b : x.x1 * b;
}

double pairing_d(int kind, const Point& y) {
  switch (kind) {
    case 0: return 1.0;
    case 1: return std::sin(std::numbers::pi * y.x1);
    default: {
      const Point r = ReferenceCell::contains(y) ? y : frac_part_H(y);
      double v = 1.0;
      for (double c : {r.x1, r.x2, r.x3}) {
        const double s = (c - 1.0) / 0.8;
        if (std::abs(s) >= 1.0) return 0.0;
        v *= std::exp(1.0 - 1.0 / (1.0 - s * s));
      }
      return v;
    }
  }
}

Resolution resolving_grid(const BoxDomain& omega, double eps, int per_cell) {
  return cell_resolved(omega, eps, per_cell, true);
}

bool resolves(const BoxDomain& omega, const Resolution& n, double eps, int per_cell) {
  const auto need = resolving_grid(omega, eps, per_cell);
  return n.n1 >= need.n1 && n.n2 >= need.n2 && n.n3 >= need.n3;
}

ConvergenceStudy convergence_study(const PeriodicCoefficient& A, const ScalarFn& f, const BoxDomain& omega,
                                   const std::vector<double>& eps_list, const Resolution& n, int cell_n,
                                   const CgOptions& opt) {
  if (eps_list.empty()) throw std::invalid_argument("eps list is empty");
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    if (!(eps_list[i] > 0.0)) throw std::invalid_argument("eps values must be positive");
    if (i > 0 && !(eps_list[i] < eps_list[i - 1])) throw std::invalid_argument("eps list must be strictly decreasing");
  }
  if (!resolves(omega, n, eps_list.back()))
    throw std::invalid_argument("grid under-resolves the smallest eps (need 4 elements per cell per axis)");

  ConvergenceStudy study;
  study.battery = default_pairing_battery();
  const auto cell = solve_cell(A, cell_n);
  study.A0 = homogenized_matrix(A, cell);
  const auto hom = solve_homogenized(study.A0, f, omega, n, opt);
  study.homogenized_iterations = hom.report.iterations;
  const auto& u = hom.u;
  const StructuredGrid& grid = u.grid;
  const double Y = ReferenceCell::measure;

  study.f_norm = std::sqrt(integrate_omega([&](const Point& x) { const double v = f(x); return v * v; }, omega, n, 2));

  // Homogenized energy with the weak form divided by |Y|.
  {
    Matrix2 a = study.A0;
    for (double& v : a) v /= Y;
    const auto K0 = assemble_operator(grid, [a](const Point&) { return a; }, 1.0);
    study.rows.reserve(eps_list.size());
    const auto Ku = K0.multiply(u.values);
    const double e0 = 0.5 * dot(u.values, Ku);
    for (double eps : eps_list) {
      StudyRow row;
      row.eps = eps;
      row.energy_hom = e0;
      study.rows.push_back(row);
    }
  }

  // y-integrals of the battery: int_Y d and int_Y (Y_j Z_i) d.
  double int_d[3] = {}, yz[2][2][3] = {};  // [i][j][d]
  {
    const auto yrule = QuadratureRule::composite_gauss(3, 4);
    for (std::size_t q = 0; q < yrule.size(); ++q) {
      const Point& y = yrule.nodes[q];
      const HorizontalVector gz[2] = {cell.grad_Z(1, y), cell.grad_Z(2, y)};
      for (int d = 0; d < 3; ++d) {
        const double wd = yrule.weights[q] * pairing_d(d, y);
        int_d[d] += wd;
        for (int i = 0; i < 2; ++i) {
          yz[i][0][d] += wd * gz[i].v1;
          yz[i][1][d] += wd * gz[i].v2;
        }
      }
    }
  }
  const std::size_t nb = study.battery.size();
  auto limit_from = [&](const PairingTest& t, const double (&xu)[2][kCKinds]) {  // xu[i][c] = int X_i u c
    const int j = t.component - 1;
    return xu[j][t.c_kind] * int_d[t.d_kind] + xu[0][t.c_kind] * yz[0][j][t.d_kind] +
           xu[1][t.c_kind] * yz[1][j][t.d_kind];
  };
  std::vector<double> limit(nb, 0.0);
  {
    double xu[2][kCKinds];
    for (int i = 0; i < 2; ++i)
      for (int c = 0; c < kCKinds; ++c)
        xu[i][c] = integrate_omega(
            [&](const Point& x) {
              const auto g = u.horizontal_gradient(x);
              return (i == 0 ? g.v1 : g.v2) * pairing_c(c, x, omega);
            },
            omega, n, 2);
    for (std::size_t b = 0; b < nb; ++b) limit[b] = limit_from(study.battery[b], xu);
  }

  const auto urule = QuadratureRule::composite_gauss(2, 8);
  for (auto& row : study.rows) {
    const double eps = row.eps;
    const auto sys = assemble_eps_problem(A, eps, f, omega, n);
    const auto sol = solve_fem(sys, opt);
    row.iterations = sol.report.iterations;
    row.l2_gap = l2_distance(sol.u, u);
    row.energy_eps = 0.5 * dot(sol.u.values, sys.matrix.multiply(sol.u.values));
    row.energy_gap = std::abs(row.energy_eps - row.energy_hom);

    const auto dec = interior_cells(eps, omega);
    row.lambda_measure = dec.lambda_measure;
    const double jac = eps * eps * eps * eps;
    // Per cell: the unfolded pairing int_cell c dx * int_Y X_j u_eps(map y) d(y) dy, and
    // the limit restricted to the cell, int_cell X_i u c dx times the y-integrals.
    const std::size_t ncell = dec.interior.size();
    std::vector<std::vector<double>> unf(nb, std::vector<double>(ncell, 0.0)), lim(nb, std::vector<double>(ncell, 0.0));
    parallel_blocks(ncell, 64, [&](std::size_t, std::size_t lo, std::size_t hi) {
      for (std::size_t c = lo; c < hi; ++c) {
        const CellMap map{eps, dec.interior[c]};
        double cx[kCKinds] = {}, ud[2][3] = {}, xu[2][kCKinds] = {};
        for (std::size_t q = 0; q < urule.size(); ++q) {
          const Point& y = urule.nodes[q];
          const Point x = map(y);
          const auto g = sol.u.horizontal_gradient(x);
          for (int d = 0; d < 3; ++d) {
            const double wd = urule.weights[q] * pairing_d(d, y);
            ud[0][d] += wd * g.v1;
            ud[1][d] += wd * g.v2;
          }
          const auto g0 = u.horizontal_gradient(x);
          const double w = jac * urule.weights[q];
          for (int k = 0; k < kCKinds; ++k) {
            const double cw = w * pairing_c(k, x, omega);
            cx[k] += cw;
            xu[0][k] += cw * g0.v1;
            xu[1][k] += cw * g0.v2;
          }
        }
        for (std::size_t b = 0; b < nb; ++b) {
          const auto& t = study.battery[b];
          unf[b][c] = cx[t.c_kind] * ud[t.component - 1][t.d_kind];
          lim[b][c] = limit_from(t, xu);
        }
      }
    });
    row.pairing_gaps.resize(nb);
    row.full_pairing_gaps.resize(nb);
    for (std::size_t b = 0; b < nb; ++b) {
      const double unfolded = pairwise_sum(unf[b]);
      row.pairing_gaps[b] = std::abs(unfolded - pairwise_sum(lim[b]));
      row.full_pairing_gaps[b] = std::abs(unfolded - limit[b]);
    }
  }
  return study;
}

}  // namespace hunfold
