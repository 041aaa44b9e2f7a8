#include "multigrid.hpp"

#include <stdexcept>

namespace hunfold::detail {

namespace {

constexpr int kSweeps = 2;
constexpr int kCoarseSweeps = 16;
constexpr double kDamping = 0.7;

// Prolongation weights along one axis.
int axis_weights(std::size_t i, bool coarsened, std::size_t (&to)[2], double (&w)[2]) {
  if (!coarsened) {
    to[0] = i;
    w[0] = 1.0;
    return 1;
  }
  if (i % 2 == 0) {
    to[0] = i / 2;
    w[0] = 1.0;
    return 1;
  }
  to[0] = i / 2;
  to[1] = i / 2 + 1;
  w[0] = w[1] = 0.5;
  return 2;
}

struct Weights {
  std::size_t idx[4];
  double w[4];
  int count = 0;
};

Weights node_weights(std::size_t r, const std::array<std::size_t, 3>& n, const std::array<std::size_t, 3>& nc,
                     const std::array<bool, 2>& coarsen) {
  const std::size_t i = r % n[0], j = (r / n[0]) % n[1], l = r / (n[0] * n[1]);
  std::size_t ti[2], tj[2];
  double wi[2], wj[2];
  const int ci = axis_weights(i, coarsen[0], ti, wi), cj = axis_weights(j, coarsen[1], tj, wj);
  Weights out;
  for (int b = 0; b < cj; ++b)
    for (int a = 0; a < ci; ++a) {
      out.idx[out.count] = ti[a] + nc[0] * (tj[b] + nc[1] * l);
      out.w[out.count] = wi[a] * wj[b];
      ++out.count;
    }
  return out;
}

void factor_lines(const CsrMatrix& A, std::size_t count, std::size_t length, std::vector<double>& D,
                  std::vector<double>& L) {
  D.assign(A.rows(), 0.0);
  L.assign(A.rows(), 0.0);
  for (std::size_t q = 0; q < count; ++q)
    for (std::size_t s = 0; s < length; ++s) {
      const std::size_t r = q + s * count;
      double d = A.get(r, r);
      if (s > 0) {
        const double e = A.get(r, r - count);
        L[r] = e / D[r - count];
        d -= L[r] * e;
      }
      if (!(d > 0.0)) throw std::invalid_argument("line block is not positive definite");
      D[r] = d;
    }
}

}  // namespace

LineMultigrid::LineMultigrid(const CsrMatrix& A, std::array<std::size_t, 3> nodes) {
  if (nodes[0] * nodes[1] * nodes[2] != A.rows()) throw std::invalid_argument("grid layout does not cover the matrix");
  if (nodes[0] < 2 || nodes[1] < 2) throw std::invalid_argument("multigrid needs two nodes per horizontal axis");
  levels_.emplace_back();
  levels_.back().A = &A;
  levels_.back().n = nodes;

  for (;;) {
    Level& fine = levels_.back();
    auto can = [](std::size_t m) { return (m - 1) % 2 == 0 && m - 1 >= 4; };
    fine.coarsen = {can(fine.n[0]), can(fine.n[1])};
    if (!fine.coarsen[0] && !fine.coarsen[1]) break;
    const std::array<std::size_t, 3> nc{fine.coarsen[0] ? (fine.n[0] - 1) / 2 + 1 : fine.n[0],
                                        fine.coarsen[1] ? (fine.n[1] - 1) / 2 + 1 : fine.n[1], fine.n[2]};
    const StructuredGrid cg({{0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}},
                            {static_cast<int>(nc[0] - 1), static_cast<int>(nc[1] - 1), static_cast<int>(nc[2] - 1)});
    CsrMatrix Ac = CsrMatrix::box_pattern(cg);
    const auto rp = fine.A->row_ptr();
    const auto col = fine.A->col();
    const auto val = fine.A->values();
    for (std::size_t r = 0; r + 1 < rp.size(); ++r) {
      const Weights pr = node_weights(r, fine.n, nc, fine.coarsen);
      for (std::size_t k = rp[r]; k < rp[r + 1]; ++k) {
        const Weights pc = node_weights(col[k], fine.n, nc, fine.coarsen);
        for (int a = 0; a < pr.count; ++a)
          for (int b = 0; b < pc.count; ++b) Ac.at(pr.idx[a], pc.idx[b]) += pr.w[a] * val[k] * pc.w[b];
      }
    }
    Level next;
    next.owned = std::move(Ac);
    next.n = nc;
    levels_.push_back(std::move(next));
    levels_.back().A = &levels_.back().owned;
  }
  // Pointers into owned matrices are stable only after the vector stops growing.
  for (std::size_t l = 1; l < levels_.size(); ++l) levels_[l].A = &levels_[l].owned;

  for (auto& lv : levels_) {
    const std::size_t rows = lv.A->rows();
    factor_lines(*lv.A, lv.n[0] * lv.n[1], lv.n[2], lv.D, lv.L);
    lv.x.assign(rows, 0.0);
    lv.b.assign(rows, 0.0);
    lv.res.assign(rows, 0.0);
  }
}

void LineMultigrid::line_solve(const Level& lv, std::vector<double>& v) const {
  const std::size_t plane = lv.n[0] * lv.n[1], len = lv.n[2];
  for (std::size_t s = 1; s < len; ++s)
    for (std::size_t q = 0; q < plane; ++q) {
      const std::size_t r = q + s * plane;
      v[r] -= lv.L[r] * v[r - plane];
    }
  for (std::size_t r = 0; r < v.size(); ++r) v[r] /= lv.D[r];
  for (std::size_t s = len - 1; s-- > 0;)
    for (std::size_t q = 0; q < plane; ++q) {
      const std::size_t r = q + s * plane;
      v[r] -= lv.L[r + plane] * v[r + plane];
    }
}

// x += omega T^{-1} (b - A x), T the line blocks; x = 0 on entry when `first`.
void LineMultigrid::smooth(Level& lv, bool first) const {
  if (first) {
    lv.res = lv.b;
  } else {
    lv.A->multiply(lv.x, lv.res);
    for (std::size_t i = 0; i < lv.res.size(); ++i) lv.res[i] = lv.b[i] - lv.res[i];
  }
  line_solve(lv, lv.res);
  for (std::size_t i = 0; i < lv.res.size(); ++i) lv.x[i] += kDamping * lv.res[i];
}

void LineMultigrid::prolong_add(const Level& fine, const Level& coarse, std::vector<double>& x) const {
  for (std::size_t r = 0; r < x.size(); ++r) {
    const Weights p = node_weights(r, fine.n, coarse.n, fine.coarsen);
    double v = 0.0;
    for (int a = 0; a < p.count; ++a) v += p.w[a] * coarse.x[p.idx[a]];
    x[r] += v;
  }
}

void LineMultigrid::restrict_to(const Level& fine, const Level& coarse, std::span<const double> r,
                                std::vector<double>& b) const {
  std::fill(b.begin(), b.end(), 0.0);
  for (std::size_t i = 0; i < r.size(); ++i) {
    const Weights p = node_weights(i, fine.n, coarse.n, fine.coarsen);
    for (int a = 0; a < p.count; ++a) b[p.idx[a]] += p.w[a] * r[i];
  }
}

void LineMultigrid::cycle(std::size_t l) {
  Level& lv = levels_[l];
  std::fill(lv.x.begin(), lv.x.end(), 0.0);
  if (l + 1 == levels_.size()) {
    for (int s = 0; s < kCoarseSweeps; ++s) smooth(lv, s == 0);
    return;
  }
  for (int s = 0; s < kSweeps; ++s) smooth(lv, s == 0);
  lv.A->multiply(lv.x, lv.res);
  for (std::size_t i = 0; i < lv.res.size(); ++i) lv.res[i] = lv.b[i] - lv.res[i];
  Level& next = levels_[l + 1];
  restrict_to(lv, next, lv.res, next.b);
  cycle(l + 1);
  prolong_add(lv, next, lv.x);
  for (int s = 0; s < kSweeps; ++s) smooth(lv, false);
}

void LineMultigrid::apply(std::span<const double> r, std::span<double> z) {
  Level& top = levels_.front();
  std::copy(r.begin(), r.end(), top.b.begin());
  cycle(0);
  std::copy(top.x.begin(), top.x.end(), z.begin());
}

}  // namespace hunfold::detail
