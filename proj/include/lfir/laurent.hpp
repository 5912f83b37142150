#pragma once

#include <vector>

#include "decompose.hpp"

namespace lfir {

// Two-sided Laurent coefficients H_{-d}..H_r stored in ascending lag order.
// Flattening in that order gives theta_{r,d} (m x p*mu) so that block b of
// the regressor, u(k+d-b), multiplies coefficient H_{b-d}.
struct LaurentBlock {
  int r = 0, d = 0;
  std::vector<MatrixXd> coeffs;  // coeffs[j] holds H_{j-d}

  int mu() const { return r + d + 1; }
  int out_dim() const { return coeffs.empty() ? 0 : static_cast<int>(coeffs[0].rows()); }
  int in_dim() const { return coeffs.empty() ? 0 : static_cast<int>(coeffs[0].cols()); }

  const MatrixXd& coeff(int lag) const {
    if (lag < -d || lag > r) throw RangeError("LaurentBlock: lag outside [-d, r]");
    return coeffs[static_cast<std::size_t>(lag + d)];
  }
  MatrixXd& coeff(int lag) {
    if (lag < -d || lag > r) throw RangeError("LaurentBlock: lag outside [-d, r]");
    return coeffs[static_cast<std::size_t>(lag + d)];
  }

  MatrixXd flattened() const {
    const int m = out_dim(), p = in_dim();
    MatrixXd theta(m, static_cast<Eigen::Index>(p) * mu());
    for (int j = 0; j < mu(); ++j) theta.middleCols(static_cast<Eigen::Index>(j) * p, p) = coeffs[j];
    return theta;
  }

  static LaurentBlock from_flattened(const MatrixXd& theta, int r, int d) {
    if (r < 0 || d < 0) throw DomainError("LaurentBlock: horizons must be nonnegative");
    const int mu = r + d + 1;
    if (theta.cols() % mu != 0)
      throw DimensionError("LaurentBlock: flattened width not a multiple of mu");
    const Eigen::Index p = theta.cols() / mu;
    LaurentBlock blk;
    blk.r = r;
    blk.d = d;
    blk.coeffs.reserve(mu);
    for (int j = 0; j < mu; ++j) blk.coeffs.push_back(theta.middleCols(j * p, p));
    return blk;
  }
};

// H_i = C_s A_s^{i-1} B_s (i >= 1), H_0 = D - C_u A_u^{-1} B_u,
// H_{-j} = -C_u A_u^{-j-1} B_u. Negative lags use repeated solves against the
// factored A_u; no growing forward power of A_u is ever formed.
inline LaurentBlock laurent_input_coeffs(const DecomposedRealization& dec, const MatrixXd& d_term,
                                         int r, int d) {
  if (r < 0 || d < 0) throw DomainError("laurent_input_coeffs: horizons must be nonnegative");
  const int m = static_cast<int>(d_term.rows());
  const int p = static_cast<int>(d_term.cols());
  LaurentBlock blk;
  blk.r = r;
  blk.d = d;
  blk.coeffs.assign(static_cast<std::size_t>(blk.mu()), MatrixXd::Zero(m, p));
  blk.coeff(0) = d_term;
  if (dec.n_s > 0) {
    MatrixXd fwd = dec.B_s;  // A_s^{i-1} B_s
    for (int i = 1; i <= r; ++i) {
      blk.coeff(i) = dec.C_s * fwd;
      fwd = dec.A_s * fwd;
    }
  }
  if (dec.n_u > 0) {
    Eigen::PartialPivLU<MatrixXd> lu(dec.A_u);
    MatrixXd bwd = lu.solve(dec.B_u);  // A_u^{-j-1} B_u, starting at j = 0
    blk.coeff(0) -= dec.C_u * bwd;
    for (int j = 1; j <= d; ++j) {
      bwd = lu.solve(bwd);
      blk.coeff(-j) = -dec.C_u * bwd;
    }
  }
  return blk;
}

// Noise analog F_i: B blocks replaced by B_w blocks, no direct term,
// F_0 = -C_u A_u^{-1} B_{u,w}.
inline LaurentBlock laurent_noise_coeffs(const DecomposedRealization& dec, int r, int d) {
  DecomposedRealization shadow = dec;
  shadow.B_s = dec.B_sw;
  shadow.B_u = dec.B_uw;
  return laurent_input_coeffs(shadow, MatrixXd::Zero(dec.C_s.rows(), dec.B_sw.cols()), r, d);
}

// y_F(k) = sum_{i=-d}^{r} H_i u(k-i) for every k with full support,
// k = r .. L-1-d; boundary samples are excluded.
inline MatrixXd truncated_fir_response(const LaurentBlock& blk, const MatrixXd& u) {
  const Eigen::Index len = u.cols();
  if (u.rows() != blk.in_dim()) throw DimensionError("truncated_fir_response: input dimension mismatch");
  if (len < blk.mu()) throw RangeError("truncated_fir_response: sequence shorter than mu samples");
  const Eigen::Index count = len - blk.r - blk.d;
  MatrixXd y = MatrixXd::Zero(blk.out_dim(), count);
  for (Eigen::Index t = 0; t < count; ++t) {
    const Eigen::Index k = blk.r + t;
    for (int i = -blk.d; i <= blk.r; ++i) y.col(t) += blk.coeff(i) * u.col(k - i);
  }
  return y;
}

// Truncation-tail maps and, when latent state sequences are supplied, the
// per-sample tails e_s(k) = C_s A_s^r x_s(k-r) (k >= r) and
// e_u(k) = C_u A_u^{-d-1} x_u(k+d+1) (k <= L-d-2).
struct TruncationTailReport {
  double stable_tail_norm = 0.0;    // ||C_s A_s^r||
  double unstable_tail_norm = 0.0;  // ||C_u A_u^{-d-1}||
  double phi_s = 1.0;               // Phi(A_s)
  double phi_u = 1.0;               // Phi(A_u^{-1})
  MatrixXd stable_map, unstable_map;
  MatrixXd e_s, e_u;       // per-sample tails, empty without states
  int es_first_k = 0;      // e_s column t corresponds to k = es_first_k + t
  int eu_first_k = 0;
};

inline TruncationTailReport truncation_tails(const DecomposedRealization& dec, int r, int d,
                                             const MatrixXd& x_s = MatrixXd(),
                                             const MatrixXd& x_u = MatrixXd()) {
  if (r < 0 || d < 0) throw DomainError("truncation_tails: horizons must be nonnegative");
  TruncationTailReport rep;
  const int m = static_cast<int>(dec.C_s.rows() > 0 ? dec.C_s.rows() : dec.C_u.rows());
  if (dec.n_s > 0) {
    MatrixXd map = dec.C_s;
    for (int i = 0; i < r; ++i) map = map * dec.A_s;
    rep.stable_map = map;
    rep.stable_tail_norm = spectral_norm(map);
    rep.phi_s = transient_amplification(dec.A_s);
  } else {
    rep.stable_map = MatrixXd(m, 0);
  }
  if (dec.n_u > 0) {
    Eigen::PartialPivLU<MatrixXd> lu_t(dec.A_u.transpose());
    MatrixXd map = dec.C_u;
    for (int i = 0; i < d + 1; ++i) map = lu_t.solve(map.transpose()).transpose();
    rep.unstable_map = map;
    rep.unstable_tail_norm = spectral_norm(map);
    rep.phi_u = transient_amplification(dec.A_u.inverse());
  } else {
    rep.unstable_map = MatrixXd(m, 0);
  }

  if (x_s.size() > 0 && dec.n_s > 0) {
    if (x_s.rows() != dec.n_s) throw DimensionError("truncation_tails: x_s row count mismatch");
    const Eigen::Index len = x_s.cols();
    if (len <= r) throw RangeError("truncation_tails: state sequence shorter than r+1");
    rep.es_first_k = r;
    rep.e_s = rep.stable_map * x_s.leftCols(len - r);  // columns x_s(0..L-1-r)
  }
  if (x_u.size() > 0 && dec.n_u > 0) {
    if (x_u.rows() != dec.n_u) throw DimensionError("truncation_tails: x_u row count mismatch");
    const Eigen::Index len = x_u.cols();
    if (len <= d + 1) throw RangeError("truncation_tails: state sequence shorter than d+2");
    rep.eu_first_k = 0;
    rep.e_u = rep.unstable_map * x_u.rightCols(len - d - 1);  // columns x_u(d+1..L-1)
  }
  return rep;
}

}  // namespace lfir
