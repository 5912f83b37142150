#pragma once

#include "state_space.hpp"
#include "sylvester.hpp"

namespace lfir {

// Similarity T = V W with orthogonal Schur V and W = [[I, S],[0, I]] brings
// the realization to block-diagonal coordinates x_d = T^{-1} x = [x_s; x_u].
struct DecomposedRealization {
  MatrixXd A_s, A_u;
  MatrixXd B_s, B_u;
  MatrixXd B_sw, B_uw;
  MatrixXd C_s, C_u;
  MatrixXd V, S, T, T_inv;
  double rho_s = 0.0;      // spectral radius of A_s
  double rho_u_inv = 0.0;  // spectral radius of A_u^{-1}
  int n_s = 0, n_u = 0;
};

inline DecomposedRealization decompose(const StateSpaceModel& mod,
                                       double unit_circle_tol = kUnitCircleTol) {
  const int n = mod.n();
  const OrderedSchur schur = ordered_real_schur(mod.A, unit_circle_tol);
  const int ns = schur.n_stable;
  const int nu = n - ns;

  DecomposedRealization dec;
  dec.n_s = ns;
  dec.n_u = nu;
  dec.V = schur.U;
  dec.A_s = schur.T.topLeftCorner(ns, ns);
  dec.A_u = schur.T.bottomRightCorner(nu, nu);
  dec.S = MatrixXd(ns, nu);
  if (ns > 0 && nu > 0) {
    dec.S = solve_sylvester_quasi(dec.A_s, dec.A_u, -schur.T.topRightCorner(ns, nu),
                                  mod.A.norm());
  }

  MatrixXd w = MatrixXd::Identity(n, n);
  w.topRightCorner(ns, nu) = dec.S;
  dec.T = dec.V * w;
  MatrixXd w_inv = MatrixXd::Identity(n, n);
  w_inv.topRightCorner(ns, nu) = -dec.S;
  dec.T_inv = w_inv * dec.V.transpose();

  const MatrixXd bd = dec.T_inv * mod.B;
  const MatrixXd bwd = dec.T_inv * mod.Bw;
  const MatrixXd cd = mod.C * dec.T;
  dec.B_s = bd.topRows(ns);
  dec.B_u = bd.bottomRows(nu);
  dec.B_sw = bwd.topRows(ns);
  dec.B_uw = bwd.bottomRows(nu);
  dec.C_s = cd.leftCols(ns);
  dec.C_u = cd.rightCols(nu);

  dec.rho_s = ns > 0 ? spectral_radius(dec.A_s) : 0.0;
  dec.rho_u_inv = nu > 0 ? 1.0 / min_eigenvalue_modulus(dec.A_u) : 0.0;
  if (dec.rho_s >= 1.0 || dec.rho_u_inv >= 1.0)
    throw NumericError("decompose: block ordering failed to separate the spectrum");
  return dec;
}

// Transfer matrix of one half, G_s(z) = C_s (zI - A_s)^{-1} B_s (analog for
// the unstable half); empty blocks contribute zero.
inline MatrixXcd half_transfer(const MatrixXd& a, const MatrixXd& b, const MatrixXd& c,
                               std::complex<double> z) {
  if (a.size() == 0) return MatrixXcd::Zero(c.rows(), b.cols());
  MatrixXcd zia = -a.cast<std::complex<double>>();
  zia.diagonal().array() += z;
  Eigen::FullPivLU<MatrixXcd> lu(zia);
  if (!lu.isInvertible()) throw NumericError("half_transfer: evaluation point is a pole");
  return c.cast<std::complex<double>>() * lu.solve(b.cast<std::complex<double>>());
}

}  // namespace lfir
