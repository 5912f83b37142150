#pragma once

#include <vector>

#include "schur.hpp"

namespace lfir {

namespace detail {

inline std::vector<Eigen::Index> quasi_block_starts(const MatrixXd& t) {
  std::vector<Eigen::Index> starts;
  const Eigen::Index n = t.rows();
  for (Eigen::Index i = 0; i < n;) {
    starts.push_back(i);
    i += (i + 1 < n && t(i + 1, i) != 0.0) ? 2 : 1;
  }
  starts.push_back(n);
  return starts;
}

inline MatrixXd sylvester_sweep(const MatrixXd& a11, const MatrixXd& a22, const MatrixXd& c,
                                const std::vector<Eigen::Index>& rb,
                                const std::vector<Eigen::Index>& cb) {
  MatrixXd s = MatrixXd::Zero(a11.rows(), a22.rows());
  for (std::size_t jb = 0; jb + 1 < cb.size(); ++jb) {
    const Eigen::Index j0 = cb[jb], jw = cb[jb + 1] - cb[jb];
    for (std::size_t ib = rb.size() - 1; ib-- > 0;) {
      const Eigen::Index i0 = rb[ib], iw = rb[ib + 1] - rb[ib];
      MatrixXd rhs = c.block(i0, j0, iw, jw);
      const Eigen::Index below = a11.rows() - (i0 + iw);
      if (below > 0)
        rhs -= a11.block(i0, i0 + iw, iw, below) * s.block(i0 + iw, j0, below, jw);
      if (j0 > 0) rhs += s.block(i0, 0, iw, j0) * a22.block(0, j0, j0, jw);
      s.block(i0, j0, iw, jw) = solve_sylvester_small(a11.block(i0, i0, iw, iw),
                                                      a22.block(j0, j0, jw, jw), rhs);
    }
  }
  return s;
}

}  // namespace detail

// Solves A11 S - S A22 = C for quasi upper triangular A11, A22 (as produced
// by ordered_real_schur) by block back-substitution, with one iterative
// refinement pass. residual_scale sets the acceptance threshold
// 1e-10 * residual_scale (pass ||A|| of the matrix being decoupled).
inline MatrixXd solve_sylvester_quasi(const MatrixXd& a11, const MatrixXd& a22, const MatrixXd& c,
                                      double residual_scale) {
  if (a11.rows() != a11.cols() || a22.rows() != a22.cols())
    throw DimensionError("solve_sylvester_quasi: blocks must be square");
  if (c.rows() != a11.rows() || c.cols() != a22.rows())
    throw DimensionError("solve_sylvester_quasi: C must be conformable");
  if (a11.size() == 0 || a22.size() == 0) return MatrixXd(a11.rows(), a22.rows());

  const auto rb = detail::quasi_block_starts(a11);
  const auto cb = detail::quasi_block_starts(a22);
  MatrixXd s = detail::sylvester_sweep(a11, a22, c, rb, cb);
  const double tol = 1e-10 * std::max(residual_scale, 1e-300);
  MatrixXd res = c - (a11 * s - s * a22);
  if (res.norm() > tol) {
    s += detail::sylvester_sweep(a11, a22, res, rb, cb);
    res = c - (a11 * s - s * a22);
    if (res.norm() > tol)
      throw NumericError("solve_sylvester_quasi: residual above tolerance after refinement");
  }
  return s;
}

}  // namespace lfir
