#include "hunfold/control.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hunfold/parallel.hpp"

namespace hunfold {

namespace {

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

std::vector<double> trapezoid_weights(const StructuredGrid& g) {
  const auto h = g.spacing();
  const auto& n = g.cells();
  std::vector<double> w(g.node_count());
  auto end = [](int i, int m) { return (i == 0 || i == m) ? 0.5 : 1.0; };
  for (int l = 0; l <= n.n3; ++l)
    for (int j = 0; j <= n.n2; ++j)
      for (int i = 0; i <= n.n1; ++i)
        w[g.node_index(i, j, l)] = h[0] * h[1] * h[2] * end(i, n.n1) * end(j, n.n2) * end(l, n.n3);
  return w;
}

}  // namespace

void ControlProblem::validate() const {
  omega.validate();
  if (!(rho > 0.0) || !std::isfinite(rho)) throw std::invalid_argument("rho must be positive");
  if (!(eps > 0.0) || !std::isfinite(eps)) throw std::invalid_argument("eps must be positive");
  if (control_n < 1) throw std::invalid_argument("control grid needs n >= 1");
  if (!f) throw std::invalid_argument("source closure is empty");
  A.validate(5);
}

ControlNotConverged::ControlNotConverged(std::vector<double> h)
    : std::runtime_error("control fixed point did not converge"), history(std::move(h)) {}

ControlDiscretization::ControlDiscretization(ControlProblem problem) : p_(std::move(problem)) {
  p_.validate();
  grid_ = StructuredGrid(p_.omega, p_.grid);
  ygrid_ = StructuredGrid({{0.0, 0.0, 0.0}, {2.0, 2.0, 2.0}}, {p_.control_n, p_.control_n, p_.control_n});
  dec_ = interior_cells(p_.eps, p_.omega);
  yw_ = trapezoid_weights(ygrid_);
  S_ = assemble_operator(grid_, oscillating(p_.A, p_.eps), 0.0);
  K_ = S_;
  K_.add_scaled(assemble_operator(grid_, [](const Point&) { return Matrix2{0.0, 0.0, 0.0, 0.0}; }, 1.0), 1.0);
  F_ = assemble_source(grid_, p_.f);

  samples_.reserve(dec_.interior.size() * ygrid_.node_count());
  for (std::size_t c = 0; c < dec_.interior.size(); ++c) {
    const CellMap map{p_.eps, dec_.interior[c]};
    for (std::size_t j = 0; j < ygrid_.node_count(); ++j) {
      std::array<int, 3> e;
      std::array<double, 3> t;
      grid_.locate(map(ygrid_.node(j)), e, t);
      const auto nodes = grid_.element_nodes(e[0], e[1], e[2]);
      Sample s{};
      for (int a = 0; a < 8; ++a) {
        s.nodes[a] = static_cast<std::uint32_t>(nodes[a]);
        s.phi[a] = shape_value(a, t);
      }
      s.j = static_cast<std::uint32_t>(j);
      samples_.push_back(s);
      cell_of_sample_.push_back(c);
    }
  }
}

GridFunction ControlDiscretization::zero_control() const { return GridFunction::zero(ygrid_); }

GridFunction ControlDiscretization::control_from(const ScalarFn& theta) const {
  return GridFunction::interpolate(ygrid_, theta);
}

std::vector<double> ControlDiscretization::control_load(const GridFunction& theta) const {
  std::vector<double> b(grid_.node_count(), 0.0);
  const double e4 = std::pow(p_.eps, 4);
  for (const auto& s : samples_) {
    const double w = e4 * yw_[s.j] * theta.values[s.j];
    for (int a = 0; a < 8; ++a) b[s.nodes[a]] += w * s.phi[a];
  }
  return b;
}

GridFunction ControlDiscretization::solve_state(const GridFunction& theta, bool with_source) const {
  auto b = control_load(theta);
  if (with_source)
    for (std::size_t i = 0; i < b.size(); ++i) b[i] += F_[i];
  std::vector<double> x(b.size(), 0.0);
  conjugate_gradient(K_, b, x, line_multigrid(p_.solver, grid_));
  return {grid_, std::move(x)};
}

GridFunction ControlDiscretization::solve_state(const GridFunction& theta) const { return solve_state(theta, true); }

GridFunction ControlDiscretization::solve_adjoint(const GridFunction& u) const {
  const auto b = S_.multiply(u.values);
  std::vector<double> x(b.size(), 0.0);
  conjugate_gradient(K_, b, x, line_multigrid(p_.solver, grid_));
  return {grid_, std::move(x)};
}

double ControlDiscretization::normalization(ControlNormalization norm) const {
  if (dec_.empty()) return 0.0;
  const double cell_factor = dec_.cell_measure();  // 8 eps^4
  const double measure = norm == ControlNormalization::CoveredMeasure ? dec_.covered_measure() : p_.omega.measure();
  return cell_factor / (p_.rho * measure);
}

GridFunction ControlDiscretization::characterize(const GridFunction& v, ControlNormalization norm) const {
  std::vector<double> V(ygrid_.node_count(), 0.0);
  for (const auto& s : samples_) {
    double val = 0.0;
    for (int a = 0; a < 8; ++a) val += v.values[s.nodes[a]] * s.phi[a];
    V[s.j] += val;
  }
  const double c = normalization(norm);
  for (double& x : V) x = -c * x;
  return {ygrid_, std::move(V)};
}

GridFunction ControlDiscretization::characterize(const ScalarFn& v, ControlNormalization norm) const {
  std::vector<double> V(ygrid_.node_count(), 0.0);
  for (const auto& k : dec_.interior) {
    const CellMap map{p_.eps, k};
    for (std::size_t j = 0; j < V.size(); ++j) V[j] += v(map(ygrid_.node(j)));
  }
  const double c = normalization(norm);
  for (double& x : V) x = -c * x;
  return {ygrid_, std::move(V)};
}

double ControlDiscretization::control_inner(const GridFunction& a, const GridFunction& b) const {
  double s = 0.0;
  for (std::size_t j = 0; j < yw_.size(); ++j) s += yw_[j] * a.values[j] * b.values[j];
  return static_cast<double>(dec_.interior.size()) * std::pow(p_.eps, 4) * s;
}

double ControlDiscretization::adjoint_pairing(const ScalarFn& v, const GridFunction& theta) const {
  double s = 0.0;
  for (const auto& k : dec_.interior) {
    const CellMap map{p_.eps, k};
    for (std::size_t j = 0; j < yw_.size(); ++j) s += yw_[j] * theta.values[j] * v(map(ygrid_.node(j)));
  }
  return std::pow(p_.eps, 4) * s;
}

double ControlDiscretization::cost(const GridFunction& u, const GridFunction& theta) const {
  return 0.5 * dot(u.values, S_.multiply(u.values)) + 0.5 * p_.rho * control_inner(theta, theta);
}

double ControlDiscretization::reduced_cost(const GridFunction& theta) const { return cost(solve_state(theta), theta); }

std::vector<double> ControlDiscretization::reduced_gradient(const GridFunction& theta) const {
  const auto v = solve_adjoint(solve_state(theta));
  const double e4 = std::pow(p_.eps, 4);
  std::vector<double> g(yw_.size(), 0.0);
  for (const auto& s : samples_) {
    double val = 0.0;
    for (int a = 0; a < 8; ++a) val += v.values[s.nodes[a]] * s.phi[a];
    g[s.j] += e4 * yw_[s.j] * val;
  }
  const double reg = p_.rho * static_cast<double>(dec_.interior.size()) * e4;
  for (std::size_t j = 0; j < g.size(); ++j) g[j] += reg * yw_[j] * theta.values[j];
  return g;
}

GridFunction solve_state(const ControlProblem& problem, const GridFunction& theta) {
  return ControlDiscretization(problem).solve_state(theta);
}

GridFunction solve_adjoint(const ControlProblem& problem, const GridFunction& u_bar) {
  return ControlDiscretization(problem).solve_adjoint(u_bar);
}

GridFunction characterize_control(const ControlProblem& problem, const ScalarFn& v_bar, ControlNormalization norm) {
  return ControlDiscretization(problem).characterize(v_bar, norm);
}

ControlSolution optimize(const ControlProblem& problem, double tol, int maxit) {
  return optimize(ControlDiscretization(problem), tol, maxit);
}

ControlSolution optimize(const ControlDiscretization& disc, double tol, int maxit) {
  struct Iterate {
    GridFunction theta, u, v, image;
    double residual;
  };
  auto evaluate = [&](GridFunction theta) {
    Iterate it{std::move(theta), {}, {}, {}, 0.0};
    it.u = disc.solve_state(it.theta);
    it.v = disc.solve_adjoint(it.u);
    it.image = disc.characterize(it.v, ControlNormalization::CoveredMeasure);
    double diff = 0.0;
    for (std::size_t j = 0; j < it.theta.values.size(); ++j)
      diff = std::max(diff, std::abs(it.image.values[j] - it.theta.values[j]));
    const double scale = max_abs(it.image.values);
    it.residual = scale > 0.0 ? diff / scale : diff;
    return it;
  };

  ControlSolution sol;
  Iterate cur = evaluate(disc.zero_control());
  sol.residual_history.push_back(cur.residual);
  double omega = 1.0;
  int it = 0;
  while (cur.residual > tol) {
    if (++it > maxit) throw ControlNotConverged(sol.residual_history);
    std::vector<double> next(cur.theta.values.size());
    for (std::size_t j = 0; j < next.size(); ++j)
      next[j] = cur.theta.values[j] + omega * (cur.image.values[j] - cur.theta.values[j]);
    Iterate cand = evaluate({disc.y_grid(), std::move(next)});
    if (cand.residual > cur.residual && omega > 1e-6) {
      omega *= 0.5;
      continue;
    }
    cur = std::move(cand);
    sol.residual_history.push_back(cur.residual);
  }
  sol.iterations = it;
  sol.relaxation = omega;
  sol.J = disc.cost(cur.u, cur.theta);
  sol.u_bar = std::move(cur.u);
  sol.v_bar = std::move(cur.v);
  sol.theta_bar = std::move(cur.theta);
  return sol;
}

std::vector<ScalarFn> control_battery() {
  using std::numbers::pi;
  return {
      [](const Point&) { return 1.0; },
      [](const Point& y) { return std::sin(pi * y.x1); },
      [](const Point& y) { return std::cos(pi * y.x2); },
      [](const Point& y) { return y.x3 - 1.0; },
      [](const Point& y) { return std::sin(pi * y.x1) * std::cos(pi * y.x2) + 0.5 * y.x3 * y.x3; },
      [](const Point& y) { return pairing_d(2, y); },
  };
}

double optimality_residual(const ControlSolution& sol, const ControlDiscretization& disc,
                           const std::vector<ScalarFn>& battery) {
  const double rho = disc.problem().rho;
  double worst = 0.0;
  const ScalarFn v = [&](const Point& x) { return sol.v_bar(x); };
  for (const auto& b : battery) {
    const auto theta = disc.control_from(b);
    const double lhs = disc.control_inner(sol.theta_bar, theta);
    const double rhs = -disc.adjoint_pairing(v, theta) / rho;
    const double scale = std::max(std::abs(lhs), std::abs(rhs));
    worst = std::max(worst, scale > 0.0 ? std::abs(lhs - rhs) / scale : 0.0);
  }
  return worst;
}

double optimality_residual(const ControlSolution& sol, const ControlProblem& problem,
                           const std::vector<ScalarFn>& battery) {
  return optimality_residual(sol, ControlDiscretization(problem), battery);
}

}  // namespace hunfold
