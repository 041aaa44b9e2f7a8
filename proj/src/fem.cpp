#include "hunfold/fem.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <stdexcept>

#include "hunfold/parallel.hpp"
#include "multigrid.hpp"

namespace hunfold {

namespace {

constexpr std::size_t kBlocks = 64;

struct Gauss01 {
  std::vector<double> t, w;
  explicit Gauss01(int n) {
    gauss_legendre(n, t, w);
    for (std::size_t i = 0; i < t.size(); ++i) {
      t[i] = 0.5 * (t[i] + 1.0);
      w[i] *= 0.5;
    }
  }
};

// Reference data of the trilinear element at tensor Gauss points.
struct ElementRule {
  std::vector<std::array<double, 3>> t;
  std::vector<double> w;
  std::vector<std::array<double, 8>> phi;
  std::vector<std::array<std::array<double, 3>, 8>> dphi;  // reference derivatives

  explicit ElementRule(int order) {
    const Gauss01 g(order);
    for (std::size_t c = 0; c < g.t.size(); ++c)
      for (std::size_t b = 0; b < g.t.size(); ++b)
        for (std::size_t a = 0; a < g.t.size(); ++a) {
          const std::array<double, 3> p{g.t[a], g.t[b], g.t[c]};
          t.push_back(p);
          w.push_back(g.w[a] * g.w[b] * g.w[c]);
          std::array<double, 8> v{};
          std::array<std::array<double, 3>, 8> d{};
          for (int n = 0; n < 8; ++n) {
            v[n] = shape_value(n, p);
            d[n] = shape_gradient(n, p);
          }
          phi.push_back(v);
          dphi.push_back(d);
        }
  }
};

// Elements grouped by parity so that elements of one group share no node.
std::array<std::vector<std::array<int, 3>>, 8> colour_elements(const StructuredGrid& g) {
  std::array<std::vector<std::array<int, 3>>, 8> out;
  const auto& n = g.cells();
  for (int l = 0; l < n.n3; ++l)
    for (int j = 0; j < n.n2; ++j)
      for (int i = 0; i < n.n1; ++i) out[(i & 1) | ((j & 1) << 1) | ((l & 1) << 2)].push_back({i, j, l});
  return out;
}

template <class ElementFn>
void for_each_coloured(const StructuredGrid& g, ElementFn&& fn) {
  for (const auto& group : colour_elements(g)) {
    parallel_blocks(group.size(), kBlocks, [&](std::size_t, std::size_t lo, std::size_t hi) {
      for (std::size_t e = lo; e < hi; ++e) fn(group[e]);
    });
  }
}

Point element_point(const StructuredGrid& g, const std::array<int, 3>& e, const std::array<double, 3>& t) {
  const auto h = g.spacing();
  const auto& lo = g.box().lo;
  return {lo.x1 + (e[0] + t[0]) * h[0], lo.x2 + (e[1] + t[1]) * h[1], lo.x3 + (e[2] + t[2]) * h[2]};
}

}  // namespace

double shape_value(int a, const std::array<double, 3>& t) noexcept {
  const double f0 = (a & 1) ? t[0] : 1.0 - t[0];
  const double f1 = (a & 2) ? t[1] : 1.0 - t[1];
  const double f2 = (a & 4) ? t[2] : 1.0 - t[2];
  return f0 * f1 * f2;
}

std::array<double, 3> shape_gradient(int a, const std::array<double, 3>& t) noexcept {
  const double f0 = (a & 1) ? t[0] : 1.0 - t[0];
  const double f1 = (a & 2) ? t[1] : 1.0 - t[1];
  const double f2 = (a & 4) ? t[2] : 1.0 - t[2];
  const double d0 = (a & 1) ? 1.0 : -1.0;
  const double d1 = (a & 2) ? 1.0 : -1.0;
  const double d2 = (a & 4) ? 1.0 : -1.0;
  return {d0 * f1 * f2, f0 * d1 * f2, f0 * f1 * d2};
}

// ---------------------------------------------------------------- grid

StructuredGrid::StructuredGrid(const BoxDomain& box, const Resolution& cells) : box_(box), cells_(cells) {
  box_.validate();
  if (cells.n1 < 1 || cells.n2 < 1 || cells.n3 < 1) throw std::invalid_argument("grid needs >= 1 element per axis");
  const auto ext = box_.extent();
  h_ = {ext[0] / cells.n1, ext[1] / cells.n2, ext[2] / cells.n3};
}

std::size_t StructuredGrid::node_count() const noexcept {
  return static_cast<std::size_t>(cells_.n1 + 1) * (cells_.n2 + 1) * (cells_.n3 + 1);
}

std::size_t StructuredGrid::element_count() const noexcept {
  return static_cast<std::size_t>(cells_.n1) * cells_.n2 * cells_.n3;
}

Point StructuredGrid::node(int i, int j, int l) const noexcept {
  // Last node lands exactly on hi.
  auto coord = [](double lo, double hi, int k, int n) { return k == n ? hi : lo + (hi - lo) * k / n; };
  return {coord(box_.lo.x1, box_.hi.x1, i, cells_.n1), coord(box_.lo.x2, box_.hi.x2, j, cells_.n2),
          coord(box_.lo.x3, box_.hi.x3, l, cells_.n3)};
}

Point StructuredGrid::node(std::size_t index) const noexcept {
  const std::size_t m1 = cells_.n1 + 1, m2 = cells_.n2 + 1;
  return node(static_cast<int>(index % m1), static_cast<int>((index / m1) % m2), static_cast<int>(index / (m1 * m2)));
}

std::array<std::size_t, 8> StructuredGrid::element_nodes(int ie, int je, int le) const noexcept {
  std::array<std::size_t, 8> out{};
  for (int a = 0; a < 8; ++a) out[a] = node_index(ie + (a & 1), je + ((a >> 1) & 1), le + ((a >> 2) & 1));
  return out;
}

void StructuredGrid::locate(const Point& x, std::array<int, 3>& e, std::array<double, 3>& t) const noexcept {
  const double c[3] = {x.x1, x.x2, x.x3};
  const double lo[3] = {box_.lo.x1, box_.lo.x2, box_.lo.x3};
  const int n[3] = {cells_.n1, cells_.n2, cells_.n3};
  for (int d = 0; d < 3; ++d) {
    const double s = std::clamp((c[d] - lo[d]) / h_[d], 0.0, static_cast<double>(n[d]));
    const int k = std::min(static_cast<int>(std::floor(s)), n[d] - 1);
    e[d] = k;
    t[d] = std::clamp(s - k, 0.0, 1.0);
  }
}

// ------------------------------------------------------- grid functions

GridFunction::GridFunction(StructuredGrid g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {
  if (values.size() != grid.node_count()) throw std::invalid_argument("value count does not match grid");
}

GridFunction GridFunction::interpolate(const StructuredGrid& g, const ScalarFn& f) {
  std::vector<double> v(g.node_count());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(g.node(i));
  return {g, std::move(v)};
}

GridFunction GridFunction::zero(const StructuredGrid& g) { return {g, std::vector<double>(g.node_count(), 0.0)}; }

double GridFunction::operator()(const Point& x) const noexcept {
  std::array<int, 3> e;
  std::array<double, 3> t;
  grid.locate(x, e, t);
  const auto nodes = grid.element_nodes(e[0], e[1], e[2]);
  double s = 0.0;
  for (int a = 0; a < 8; ++a) s += values[nodes[a]] * shape_value(a, t);
  return s;
}

EuclideanGradient GridFunction::gradient(const Point& x) const noexcept {
  std::array<int, 3> e;
  std::array<double, 3> t;
  grid.locate(x, e, t);
  const auto nodes = grid.element_nodes(e[0], e[1], e[2]);
  const auto h = grid.spacing();
  EuclideanGradient g{};
  for (int a = 0; a < 8; ++a) {
    const auto d = shape_gradient(a, t);
    for (int k = 0; k < 3; ++k) g[k] += values[nodes[a]] * d[k] / h[k];
  }
  return g;
}

HorizontalVector GridFunction::horizontal_gradient(const Point& x) const noexcept {
  return apply_frame(x, gradient(x));
}

// ------------------------------------------------------------------ CSR

CsrMatrix CsrMatrix::identity(std::size_t n) {
  CsrMatrix m;
  m.row_ptr_.resize(n + 1);
  std::iota(m.row_ptr_.begin(), m.row_ptr_.end(), std::size_t{0});
  m.col_.resize(n);
  std::iota(m.col_.begin(), m.col_.end(), 0u);
  m.val_.assign(n, 1.0);
  return m;
}

CsrMatrix CsrMatrix::from_triplets(std::size_t n, std::vector<std::uint32_t> rows, std::vector<std::uint32_t> cols,
                                   std::vector<double> vals) {
  if (rows.size() != cols.size() || rows.size() != vals.size()) throw std::invalid_argument("triplet sizes differ");
  std::vector<std::size_t> order(rows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Stable so that duplicates are summed in insertion order.
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return rows[a] != rows[b] ? rows[a] < rows[b] : cols[a] < cols[b];
  });
  CsrMatrix m;
  m.row_ptr_.assign(n + 1, 0);
  for (std::size_t q = 0; q < order.size(); ++q) {
    const auto i = order[q];
    if (rows[i] >= n || cols[i] >= n) throw std::out_of_range("triplet index outside matrix");
    if (q > 0 && rows[order[q - 1]] == rows[i] && cols[order[q - 1]] == cols[i]) {
      m.val_.back() += vals[i];
      continue;
    }
    m.col_.push_back(cols[i]);
    m.val_.push_back(vals[i]);
    ++m.row_ptr_[rows[i] + 1];
  }
  for (std::size_t r = 0; r < n; ++r) m.row_ptr_[r + 1] += m.row_ptr_[r];
  return m;
}

CsrMatrix CsrMatrix::box_pattern(const StructuredGrid& grid) {
  const auto& n = grid.cells();
  CsrMatrix m;
  m.row_ptr_.reserve(grid.node_count() + 1);
  m.row_ptr_.push_back(0);
  m.col_.reserve(grid.node_count() * 27);
  for (int l = 0; l <= n.n3; ++l)
    for (int j = 0; j <= n.n2; ++j)
      for (int i = 0; i <= n.n1; ++i) {
        for (int dl = -1; dl <= 1; ++dl)
          for (int dj = -1; dj <= 1; ++dj)
            for (int di = -1; di <= 1; ++di) {
              const int a = i + di, b = j + dj, c = l + dl;
              if (a < 0 || b < 0 || c < 0 || a > n.n1 || b > n.n2 || c > n.n3) continue;
              m.col_.push_back(static_cast<std::uint32_t>(grid.node_index(a, b, c)));
            }
        m.row_ptr_.push_back(m.col_.size());
      }
  m.val_.assign(m.col_.size(), 0.0);
  return m;
}

double& CsrMatrix::at(std::size_t r, std::size_t c) {
  const auto first = col_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[r]);
  const auto last = col_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[r + 1]);
  const auto it = std::lower_bound(first, last, static_cast<std::uint32_t>(c));
  if (it == last || *it != c) throw std::out_of_range("entry outside sparsity pattern");
  return val_[static_cast<std::size_t>(it - col_.begin())];
}

double CsrMatrix::get(std::size_t r, std::size_t c) const noexcept {
  const auto first = col_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[r]);
  const auto last = col_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[r + 1]);
  const auto it = std::lower_bound(first, last, static_cast<std::uint32_t>(c));
  return (it == last || *it != c) ? 0.0 : val_[static_cast<std::size_t>(it - col_.begin())];
}

void CsrMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  const std::size_t n = rows();
  if (x.size() != n || y.size() != n) throw std::invalid_argument("dimension mismatch in multiply");
  parallel_blocks(n, kBlocks, [&](std::size_t, std::size_t lo, std::size_t hi) {
    for (std::size_t r = lo; r < hi; ++r) {
      double s = 0.0;
      for (std::size_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) s += val_[p] * x[col_[p]];
      y[r] = s;
    }
  });
}

std::vector<double> CsrMatrix::multiply(std::span<const double> x) const {
  std::vector<double> y(rows());
  multiply(x, y);
  return y;
}

std::vector<double> CsrMatrix::diagonal() const {
  std::vector<double> d(rows());
  for (std::size_t r = 0; r < d.size(); ++r) d[r] = get(r, r);
  return d;
}

double CsrMatrix::asymmetry() const {
  double worst = 0.0;
  for (std::size_t r = 0; r < rows(); ++r)
    for (std::size_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p)
      worst = std::max(worst, std::abs(val_[p] - get(col_[p], r)));
  return worst;
}

void CsrMatrix::add_scaled(const CsrMatrix& other, double s) {
  if (other.row_ptr_ != row_ptr_ || other.col_ != col_) throw std::invalid_argument("sparsity patterns differ");
  for (std::size_t p = 0; p < val_.size(); ++p) val_[p] += s * other.val_[p];
}

std::vector<double> CsrMatrix::to_dense() const {
  const std::size_t n = rows();
  std::vector<double> d(n * n, 0.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) d[r * n + col_[p]] = val_[p];
  return d;
}

// ------------------------------------------------------------------- CG

NotConverged::NotConverged(std::vector<double> b, double res, int it)
    : std::runtime_error("conjugate gradient stopped at maxit with relative residual " + std::to_string(res)),
      best(std::move(b)),
      residual(res),
      iterations(it) {}

double dot(std::span<const double> a, std::span<const double> b) {
  std::vector<double> partial(kBlocks, 0.0);
  parallel_blocks(a.size(), kBlocks, [&](std::size_t blk, std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += a[i] * b[i];
    partial[blk] = s;
  });
  return pairwise_sum(partial);
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

namespace {

void remove_mean(std::vector<double>& v) {
  const double m = pairwise_sum(v) / static_cast<double>(v.size());
  for (double& x : v) x -= m;
}

// Block-diagonal preconditioner, one LDL^t-factored tridiagonal block per line.
class LineBlocks {
 public:
  LineBlocks(const CsrMatrix& A, std::size_t count, std::size_t length) : count_(count), length_(length) {
    if (count * length != A.rows()) throw std::invalid_argument("line layout does not cover the matrix");
    D_.resize(A.rows());
    L_.resize(A.rows());
    for (std::size_t q = 0; q < count; ++q) {
      for (std::size_t s = 0; s < length; ++s) {
        const std::size_t r = q + s * count;
        double d = A.get(r, r);
        if (s > 0) {
          const std::size_t prev = r - count;
          const double e = A.get(r, prev);
          L_[r] = e / D_[prev];
          d -= L_[r] * e;
        }
        if (!(d > 0.0)) throw std::invalid_argument("line block is not positive definite");
        D_[r] = d;
      }
    }
  }

  void apply(std::span<const double> r, std::span<double> z) const {
    parallel_blocks(count_, kBlocks, [&](std::size_t, std::size_t lo, std::size_t hi) {
      for (std::size_t q = lo; q < hi; ++q) {
        double y = 0.0;
        for (std::size_t s = 0; s < length_; ++s) {
          const std::size_t i = q + s * count_;
          y = r[i] - (s > 0 ? L_[i] * y : 0.0);
          z[i] = y;
        }
        for (std::size_t s = length_; s-- > 0;) {
          const std::size_t i = q + s * count_;
          z[i] /= D_[i];
          if (s + 1 < length_) z[i] -= L_[i + count_] * z[i + count_];
        }
      }
    });
  }

 private:
  std::size_t count_, length_;
  std::vector<double> D_, L_;
};

}  // namespace

CgOptions vertical_lines(CgOptions opt, const StructuredGrid& grid) {
  const auto& n = grid.cells();
  opt.line_count = static_cast<std::size_t>(n.n1 + 1) * (n.n2 + 1);
  opt.line_length = static_cast<std::size_t>(n.n3 + 1);
  return opt;
}

CgOptions line_multigrid(CgOptions opt, const StructuredGrid& grid) {
  const auto& n = grid.cells();
  opt.multigrid_nodes = {static_cast<std::size_t>(n.n1 + 1), static_cast<std::size_t>(n.n2 + 1),
                         static_cast<std::size_t>(n.n3 + 1)};
  return opt;
}

CgReport conjugate_gradient(const CsrMatrix& A, std::span<const double> b, std::vector<double>& x,
                            const CgOptions& opt) {
  const std::size_t n = A.rows();
  if (b.size() != n) throw std::invalid_argument("right-hand side size does not match matrix");
  if (x.size() != n) x.assign(n, 0.0);

  std::vector<double> rhs(b.begin(), b.end());
  if (opt.project_constants) remove_mean(rhs);
  const double bnorm = norm2(rhs);
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    return {0, 0.0};
  }

  auto inv_diag = A.diagonal();
  for (double& d : inv_diag) d = d > 0.0 ? 1.0 / d : 1.0;

  std::vector<double> r(n), z(n), p(n), q(n);
  A.multiply(x, q);
  for (std::size_t i = 0; i < n; ++i) r[i] = rhs[i] - q[i];
  if (opt.project_constants) remove_mean(r);

  std::unique_ptr<LineBlocks> lines;
  std::unique_ptr<detail::LineMultigrid> mg;
  if (opt.multigrid_nodes[0] > 0 && !opt.project_constants)
    mg = std::make_unique<detail::LineMultigrid>(A, opt.multigrid_nodes);
  else if (opt.line_count > 0)
    lines = std::make_unique<LineBlocks>(A, opt.line_count, opt.line_length);

  auto precondition = [&] {
    if (mg)
      mg->apply(r, z);
    else if (lines)
      lines->apply(r, z);
    else
      for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    if (opt.project_constants) remove_mean(z);
  };

  double res = norm2(r) / bnorm;
  std::vector<double> best = x;
  double best_res = res;
  if (res <= opt.tol) return {0, res};

  precondition();
  p = z;
  double rz = dot(r, z);
  for (int it = 1; it <= opt.maxit; ++it) {
    A.multiply(p, q);
    const double pq = dot(p, q);
    if (!(pq > 0.0)) throw NotConverged(best, best_res, it);
    const double alpha = rz / pq;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * q[i];
    }
    if (opt.project_constants) remove_mean(r);
    res = norm2(r) / bnorm;
    if (it % 32 == 0 && res < best_res) {
      best_res = res;
      best = x;
    }
    if (res <= opt.tol) {
      // Recompute the true residual to guard against drift.
      A.multiply(x, q);
      for (std::size_t i = 0; i < n; ++i) q[i] = rhs[i] - q[i];
      if (opt.project_constants) remove_mean(q);
      const double true_res = norm2(q) / bnorm;
      if (true_res <= opt.tol * 10.0) return {it, true_res};
      r = q;
    }
    precondition();
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  if (res < best_res) throw NotConverged(std::move(x), res, opt.maxit);
  throw NotConverged(std::move(best), best_res, opt.maxit);
}

// ------------------------------------------------------------- assembly

CsrMatrix assemble_operator(const StructuredGrid& grid, const CoefficientFn& A, double mass, int order) {
  CsrMatrix K = CsrMatrix::box_pattern(grid);
  const ElementRule rule(order);
  const auto h = grid.spacing();
  const double vol = h[0] * h[1] * h[2];

  for_each_coloured(grid, [&](const std::array<int, 3>& e) {
    double Ke[8][8] = {};
    for (std::size_t q = 0; q < rule.w.size(); ++q) {
      const Point x = element_point(grid, e, rule.t[q]);
      const double w = rule.w[q] * vol;
      const Matrix2 a = A(x);
      // Horizontal gradients of the 8 shape functions.
      double g1[8], g2[8];
      for (int n = 0; n < 8; ++n) {
        const auto& d = rule.dphi[q][n];
        const HorizontalVector hv = apply_frame(x, {d[0] / h[0], d[1] / h[1], d[2] / h[2]});
        g1[n] = hv.v1;
        g2[n] = hv.v2;
      }
      for (int r = 0; r < 8; ++r) {
        const double ag1 = a[0] * g1[r] + a[2] * g2[r];
        const double ag2 = a[1] * g1[r] + a[3] * g2[r];
        for (int c = 0; c < 8; ++c)
          Ke[r][c] += w * (ag1 * g1[c] + ag2 * g2[c] + mass * rule.phi[q][r] * rule.phi[q][c]);
      }
    }
    const auto nodes = grid.element_nodes(e[0], e[1], e[2]);
    for (int r = 0; r < 8; ++r)
      for (int c = 0; c < 8; ++c) K.at(nodes[r], nodes[c]) += Ke[r][c];
  });
  return K;
}

std::vector<double> assemble_source(const StructuredGrid& grid, const ScalarFn& f, int order) {
  std::vector<double> b(grid.node_count(), 0.0);
  const ElementRule rule(order);
  const auto h = grid.spacing();
  const double vol = h[0] * h[1] * h[2];
  for_each_coloured(grid, [&](const std::array<int, 3>& e) {
    double be[8] = {};
    for (std::size_t q = 0; q < rule.w.size(); ++q) {
      const double fw = f(element_point(grid, e, rule.t[q])) * rule.w[q] * vol;
      for (int n = 0; n < 8; ++n) be[n] += fw * rule.phi[q][n];
    }
    const auto nodes = grid.element_nodes(e[0], e[1], e[2]);
    for (int n = 0; n < 8; ++n) b[nodes[n]] += be[n];
  });
  return b;
}

std::vector<double> assemble_flux(const StructuredGrid& grid,
                                  const std::function<HorizontalVector(const Point&)>& G, int order) {
  std::vector<double> b(grid.node_count(), 0.0);
  const ElementRule rule(order);
  const auto h = grid.spacing();
  const double vol = h[0] * h[1] * h[2];
  for_each_coloured(grid, [&](const std::array<int, 3>& e) {
    double be[8] = {};
    for (std::size_t q = 0; q < rule.w.size(); ++q) {
      const Point x = element_point(grid, e, rule.t[q]);
      const HorizontalVector g = G(x);
      const double w = rule.w[q] * vol;
      for (int n = 0; n < 8; ++n) {
        const auto& d = rule.dphi[q][n];
        const HorizontalVector hv = apply_frame(x, {d[0] / h[0], d[1] / h[1], d[2] / h[2]});
        be[n] += w * (g.v1 * hv.v1 + g.v2 * hv.v2);
      }
    }
    const auto nodes = grid.element_nodes(e[0], e[1], e[2]);
    for (int n = 0; n < 8; ++n) b[nodes[n]] += be[n];
  });
  return b;
}

std::vector<double> assemble_boundary(const StructuredGrid& grid, const ScalarFn& g, int order) {
  std::vector<double> b(grid.node_count(), 0.0);
  const Gauss01 gq(order);
  const auto h = grid.spacing();
  const auto& n = grid.cells();
  const int counts[3] = {n.n1, n.n2, n.n3};
  for (int axis = 0; axis < 3; ++axis) {
    const int u = (axis + 1) % 3, v = (axis + 2) % 3;
    const double area = h[u] * h[v];
    for (int side = 0; side < 2; ++side)
      for (int ev = 0; ev < counts[v]; ++ev)
        for (int eu = 0; eu < counts[u]; ++eu) {
          std::array<int, 3> e{};
          e[axis] = side ? counts[axis] - 1 : 0;
          e[u] = eu;
          e[v] = ev;
          const auto nodes = grid.element_nodes(e[0], e[1], e[2]);
          for (std::size_t a = 0; a < gq.t.size(); ++a)
            for (std::size_t c = 0; c < gq.t.size(); ++c) {
              std::array<double, 3> t{};
              t[axis] = side ? 1.0 : 0.0;
              t[u] = gq.t[a];
              t[v] = gq.t[c];
              const double w = gq.w[a] * gq.w[c] * area * g(element_point(grid, e, t));
              for (int k = 0; k < 8; ++k) b[nodes[k]] += w * shape_value(k, t);
            }
        }
  }
  return b;
}

namespace {

double element_l2(const StructuredGrid& grid, int order,
                  const std::function<double(const std::array<int, 3>&, const std::array<double, 3>&)>& diff) {
  const ElementRule rule(order);
  const auto h = grid.spacing();
  const double vol = h[0] * h[1] * h[2];
  const auto& n = grid.cells();
  std::vector<double> slab(static_cast<std::size_t>(n.n3), 0.0);
  parallel_blocks(slab.size(), slab.size(), [&](std::size_t, std::size_t lo, std::size_t hi) {
    for (std::size_t l = lo; l < hi; ++l) {
      double s = 0.0;
      for (int j = 0; j < n.n2; ++j)
        for (int i = 0; i < n.n1; ++i)
          for (std::size_t q = 0; q < rule.w.size(); ++q) {
            const double d = diff({i, j, static_cast<int>(l)}, rule.t[q]);
            s += rule.w[q] * d * d;
          }
      slab[l] = s * vol;
    }
  });
  return pairwise_sum(slab);
}

double local_value(const GridFunction& u, const std::array<int, 3>& e, const std::array<double, 3>& t) {
  const auto nodes = u.grid.element_nodes(e[0], e[1], e[2]);
  double s = 0.0;
  for (int a = 0; a < 8; ++a) s += u.values[nodes[a]] * shape_value(a, t);
  return s;
}

}  // namespace

double l2_distance(const GridFunction& u, const GridFunction& v, int order) {
  if (!(u.grid == v.grid)) throw std::invalid_argument("grid functions live on different grids");
  return std::sqrt(element_l2(u.grid, order, [&](const auto& e, const auto& t) {
    return local_value(u, e, t) - local_value(v, e, t);
  }));
}

double l2_error(const GridFunction& u, const ScalarFn& exact, int order) {
  return std::sqrt(element_l2(u.grid, order, [&](const auto& e, const auto& t) {
    return local_value(u, e, t) - exact(element_point(u.grid, e, t));
  }));
}

double l2_norm(const GridFunction& u, int order) {
  return std::sqrt(element_l2(u.grid, order, [&](const auto& e, const auto& t) { return local_value(u, e, t); }));
}

}  // namespace hunfold
