#pragma once

#include <sstream>
#include <vector>

#include "linalg.hpp"

namespace lfir {

namespace detail {

// Solves the small Sylvester system a X - X b = c by vectorization; block
// sizes here are at most 2x2.
inline MatrixXd solve_sylvester_small(const MatrixXd& a, const MatrixXd& b, const MatrixXd& c) {
  const Eigen::Index p = a.rows(), q = b.rows();
  MatrixXd k = kron(MatrixXd::Identity(q, q), a) - kron(b.transpose(), MatrixXd::Identity(p, p));
  Eigen::FullPivLU<MatrixXd> lu(k);
  if (!lu.isInvertible())
    throw NumericError("solve_sylvester_small: spectra of the blocks intersect");
  VectorXd vc = Eigen::Map<const VectorXd>(c.data(), p * q);
  VectorXd vx = lu.solve(vc);
  return Eigen::Map<const MatrixXd>(vx.data(), p, q);
}

// Swaps two adjacent diagonal blocks of a real Schur form in place. T and U
// are updated so that U T U^T stays invariant; the leading block after the
// swap carries the spectrum of the former trailing block.
inline void swap_schur_blocks(MatrixXd& t, MatrixXd& u, Eigen::Index i0, Eigen::Index p,
                              Eigen::Index q) {
  const Eigen::Index n = t.rows();
  const MatrixXd a11 = t.block(i0, i0, p, p);
  const MatrixXd a22 = t.block(i0 + p, i0 + p, q, q);
  const MatrixXd a12 = t.block(i0, i0 + p, p, q);
  // Invariant-subspace basis for the a22 spectrum: a11 X - X a22 = -a12.
  const MatrixXd x = solve_sylvester_small(a11, a22, -a12);
  MatrixXd basis(p + q, q);
  basis.topRows(p) = x;
  basis.bottomRows(q) = MatrixXd::Identity(q, q);
  Eigen::HouseholderQR<MatrixXd> qr(basis);
  const MatrixXd qw = qr.householderQ();
  t.block(0, i0, n, p + q) = t.block(0, i0, n, p + q) * qw;
  t.block(i0, 0, p + q, n) = qw.transpose() * t.block(i0, 0, p + q, n);
  u.block(0, i0, n, p + q) = u.block(0, i0, n, p + q) * qw;
  t.block(i0 + q, i0, p, q).setZero();
}

}  // namespace detail

struct SchurBlock {
  int start = 0;
  int size = 1;
  double modulus = 0.0;
};

struct OrderedSchur {
  MatrixXd T;  // quasi upper triangular, stable blocks leading
  MatrixXd U;  // orthogonal, A = U T U^T
  int n_stable = 0;
  std::vector<SchurBlock> blocks;
};

// Real Schur form with eigenvalues reordered so every |lambda| < 1 block
// precedes every |lambda| > 1 block; complex pairs move as 2x2 blocks.
inline OrderedSchur ordered_real_schur(const MatrixXd& a, double unit_circle_tol = 1e-8) {
  if (a.rows() != a.cols()) throw DimensionError("ordered_real_schur: matrix must be square");
  const Eigen::Index n = a.rows();
  OrderedSchur out;
  if (n == 0) {
    out.T = out.U = MatrixXd(0, 0);
    return out;
  }
  if (!a.allFinite()) throw DataError("ordered_real_schur: non-finite entries");
  Eigen::RealSchur<MatrixXd> schur(a, true);
  if (schur.info() != Eigen::Success) throw NumericError("ordered_real_schur: Schur iteration failed");
  out.T = schur.matrixT();
  out.U = schur.matrixU();

  for (Eigen::Index i = 0; i < n;) {
    SchurBlock blk;
    blk.start = static_cast<int>(i);
    if (i + 1 < n && out.T(i + 1, i) != 0.0) {
      blk.size = 2;
      const double det =
          out.T(i, i) * out.T(i + 1, i + 1) - out.T(i, i + 1) * out.T(i + 1, i);
      blk.modulus = std::sqrt(std::abs(det));
    } else {
      blk.size = 1;
      blk.modulus = std::abs(out.T(i, i));
    }
    if (std::abs(blk.modulus - 1.0) < unit_circle_tol) {
      std::ostringstream os;
      os << "ordered_real_schur: eigenvalue modulus " << blk.modulus << " within "
         << unit_circle_tol << " of the unit circle; cannot classify the block";
      throw DomainError(os.str());
    }
    out.blocks.push_back(blk);
    i += blk.size;
  }

  bool moved = true;
  while (moved) {
    moved = false;
    for (std::size_t j = 0; j + 1 < out.blocks.size(); ++j) {
      if (out.blocks[j].modulus > 1.0 && out.blocks[j + 1].modulus < 1.0) {
        detail::swap_schur_blocks(out.T, out.U, out.blocks[j].start, out.blocks[j].size,
                                  out.blocks[j + 1].size);
        std::swap(out.blocks[j].size, out.blocks[j + 1].size);
        std::swap(out.blocks[j].modulus, out.blocks[j + 1].modulus);
        out.blocks[j + 1].start = out.blocks[j].start + out.blocks[j].size;
        moved = true;
      }
    }
  }

  for (const SchurBlock& blk : out.blocks)
    if (blk.modulus < 1.0) out.n_stable += blk.size;

  const double scale = std::max(1.0, a.norm());
  if ((out.U * out.T * out.U.transpose() - a).norm() > 1e-9 * scale ||
      (out.U.transpose() * out.U - MatrixXd::Identity(n, n)).norm() > 1e-11 * static_cast<double>(n))
    throw NumericError("ordered_real_schur: reordering lost orthogonality");
  return out;
}

}  // namespace lfir
