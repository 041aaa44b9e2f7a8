#pragma once

// Multigrid for the trilinear box-grid operators: semi-coarsening in x1 and
// x2 only, damped Jacobi over x3 lines, Galerkin coarse operators.
// One V-cycle is a symmetric positive definite preconditioner.

#include <array>
#include <span>
#include <vector>

#include "hunfold/fem.hpp"

namespace hunfold::detail {

class LineMultigrid {
 public:
  /// nodes: node counts per axis, row index i + n0 (j + n1 l).
  LineMultigrid(const CsrMatrix& A, std::array<std::size_t, 3> nodes);

  void apply(std::span<const double> r, std::span<double> z);
  std::size_t levels() const noexcept { return levels_.size(); }

 private:
  struct Level {
    CsrMatrix owned;
    const CsrMatrix* A = nullptr;
    std::array<std::size_t, 3> n{};
    std::array<bool, 2> coarsen{};  // towards the next level
    std::vector<double> D, L;       // line LDL^t factors
    std::vector<double> x, b, res;
  };

  void line_solve(const Level& lv, std::vector<double>& v) const;
  void smooth(Level& lv, bool first) const;
  void cycle(std::size_t l);
  void prolong_add(const Level& fine, const Level& coarse, std::vector<double>& x) const;
  void restrict_to(const Level& fine, const Level& coarse, std::span<const double> r, std::vector<double>& b) const;

  std::vector<Level> levels_;
};

}  // namespace hunfold::detail
