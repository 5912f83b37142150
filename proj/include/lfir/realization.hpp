#pragma once

#include <sstream>
#include <vector>

#include "laurent.hpp"

namespace lfir {

struct HankelSpec {
  int rows = 0;        // 0: floor(L / 2)
  int cols = 0;        // 0: floor(L / 2)
  int order = -1;      // -1: pick at the largest singular-value gap
  double gap_threshold = 1e3;
};

struct Realization {
  MatrixXd A, B, C;
  VectorXd singular_values;
  int order = 0;
};

namespace detail {

inline std::string sv_list(const VectorXd& sv) {
  std::ostringstream os;
  os << "[";
  for (Eigen::Index i = 0; i < std::min<Eigen::Index>(sv.size(), 12); ++i)
    os << (i ? ", " : "") << sv(i);
  if (sv.size() > 12) os << ", ...";
  os << "]";
  return os.str();
}

}  // namespace detail

// Balanced realization from Markov parameters markov[i] = C A^i B,
// i = 0..L-1. The Hankel block (i, j) holds markov[i + j]; the shifted
// Hankel holds markov[i + j + 1], which needs rows + cols <= L.
inline Realization ho_kalman_causal(const std::vector<MatrixXd>& markov, HankelSpec spec = {}) {
  const int total = static_cast<int>(markov.size());
  if (total < 2) throw RangeError("ho_kalman_causal: need at least two Markov parameters");
  const int m = static_cast<int>(markov[0].rows());
  const int p = static_cast<int>(markov[0].cols());
  for (const MatrixXd& h : markov)
    if (h.rows() != m || h.cols() != p)
      throw DimensionError("ho_kalman_causal: Markov parameters have mixed dimensions");
  int rows = spec.rows > 0 ? spec.rows : total / 2;
  int cols = spec.cols > 0 ? spec.cols : total / 2;
  if (rows < 1 || cols < 1 || rows + cols > total) {
    std::ostringstream os;
    os << "ho_kalman_causal: Hankel shape " << rows << " x " << cols
       << " blocks needs rows + cols <= " << total;
    throw RangeError(os.str());
  }

  MatrixXd hank(rows * m, cols * p);
  MatrixXd shifted(rows * m, cols * p);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) {
      hank.block(i * m, j * p, m, p) = markov[i + j];
      shifted.block(i * m, j * p, m, p) = markov[i + j + 1];
    }

  Eigen::JacobiSVD<MatrixXd> svd(hank, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Realization real;
  real.singular_values = svd.singularValues();
  const VectorXd& sv = real.singular_values;

  if (sv(0) <= 1e-14) {
    real.A.resize(0, 0);
    real.B = MatrixXd::Zero(0, p);
    real.C = MatrixXd::Zero(m, 0);
    return real;
  }

  Eigen::Index nrank = 0;
  while (nrank < sv.size() && sv(nrank) > 1e-12 * sv(0)) ++nrank;

  int order = spec.order;
  if (order < 0) {
    double best = 0.0;
    Eigen::Index best_k = 0;
    const Eigen::Index k_max = std::min<Eigen::Index>(nrank, sv.size() - 1);
    for (Eigen::Index k = 1; k <= k_max; ++k) {
      const double denom = std::max(sv(k), 1e-18 * sv(0));
      const double ratio = sv(k - 1) / denom;
      if (ratio > best) {
        best = ratio;
        best_k = k;
      }
    }
    if (best <= spec.gap_threshold) {
      std::ostringstream os;
      os << "ho_kalman_causal: no singular-value gap above " << spec.gap_threshold
         << "; pass an explicit order (singular values " << detail::sv_list(sv) << ")";
      throw DomainError(os.str());
    }
    order = static_cast<int>(best_k);
  } else {
    if (order == 0) {
      real.A.resize(0, 0);
      real.B = MatrixXd::Zero(0, p);
      real.C = MatrixXd::Zero(m, 0);
      return real;
    }
    if (order > sv.size())
      throw RangeError("ho_kalman_causal: requested order exceeds the Hankel size");
    if (order > nrank) {
      std::ostringstream os;
      os << "ho_kalman_causal: requested order " << order << " exceeds numerical rank " << nrank
         << " (singular values " << detail::sv_list(sv) << ")";
      throw RankError(os.str());
    }
  }
  real.order = order;

  const MatrixXd u1 = svd.matrixU().leftCols(order);
  const MatrixXd v1 = svd.matrixV().leftCols(order);
  const VectorXd s_sqrt = sv.head(order).cwiseSqrt();
  const VectorXd s_isqrt = s_sqrt.cwiseInverse();
  real.A = s_isqrt.asDiagonal() * (u1.transpose() * shifted * v1) * s_isqrt.asDiagonal();
  real.B = (s_sqrt.asDiagonal() * v1.transpose()).leftCols(p);
  real.C = (u1 * s_sqrt.asDiagonal()).topRows(m);
  return real;
}

// Anticausal counterpart. The input sequence is M_j = -H_{-j}, j = 1..d,
// which is the causal Markov sequence of (A_u^{-1}, A_u^{-1} B_u,
// C_u A_u^{-1}); realizing it and inverting the state matrix recovers the
// unstable part, with B and C unwrapped through one factor of A_u each.
inline Realization ho_kalman_noncausal(const std::vector<MatrixXd>& anticausal,
                                       HankelSpec spec = {}) {
  Realization inner = ho_kalman_causal(anticausal, spec);
  if (inner.order == 0) return inner;
  Eigen::JacobiSVD<MatrixXd> svd(inner.A);
  const VectorXd& sv = svd.singularValues();
  if (sv(sv.size() - 1) <= 1e-12 * sv(0))
    throw RealizationError(
        "ho_kalman_noncausal: realized state matrix is singular, cannot invert");
  Realization real;
  real.singular_values = inner.singular_values;
  real.order = inner.order;
  real.A = inner.A.partialPivLu().solve(MatrixXd::Identity(inner.order, inner.order));
  real.B = real.A * inner.B;
  real.C = inner.C * real.A;
  return real;
}

struct ReconstructedModel {
  Realization stable;
  Realization unstable;
  MatrixXd D;
  int r_used = 0;
  int d_used = 0;
  int out_dim() const { return static_cast<int>(D.rows()); }
  int in_dim() const { return static_cast<int>(D.cols()); }
};

// Splits an estimated coefficient block back into a stable realization from
// the causal lags, an unstable one from the anticausal lags, and a direct
// term D = H_0 + C_u A_u^{-1} B_u. Needs r and d each to be 0 or >= 2.
inline ReconstructedModel reconstruct(const LaurentBlock& blk, HankelSpec spec_s = {},
                                      HankelSpec spec_u = {}) {
  const int m = blk.out_dim();
  const int p = blk.in_dim();
  ReconstructedModel rec;
  rec.r_used = blk.r;
  rec.d_used = blk.d;

  if (blk.r > 0) {
    std::vector<MatrixXd> causal;
    causal.reserve(blk.r);
    for (int i = 1; i <= blk.r; ++i) causal.push_back(blk.coeff(i));
    rec.stable = ho_kalman_causal(causal, spec_s);
    if (rec.stable.order > 0 && spectral_radius(rec.stable.A) >= 1.0)
      throw DomainError("reconstruct: causal part realized with an unstable state matrix");
  } else {
    rec.stable.B = MatrixXd::Zero(0, p);
    rec.stable.C = MatrixXd::Zero(m, 0);
  }

  if (blk.d > 0) {
    std::vector<MatrixXd> anticausal;
    anticausal.reserve(blk.d);
    for (int j = 1; j <= blk.d; ++j) anticausal.push_back(-blk.coeff(-j));
    rec.unstable = ho_kalman_noncausal(anticausal, spec_u);
    if (rec.unstable.order > 0 && min_eigenvalue_modulus(rec.unstable.A) <= 1.0)
      throw DomainError("reconstruct: anticausal part realized with a stable state matrix");
  } else {
    rec.unstable.B = MatrixXd::Zero(0, p);
    rec.unstable.C = MatrixXd::Zero(m, 0);
  }

  rec.D = blk.coeff(0);
  if (rec.unstable.order > 0)
    rec.D += rec.unstable.C * rec.unstable.A.partialPivLu().solve(rec.unstable.B);
  return rec;
}

inline MatrixXcd transfer(const ReconstructedModel& rec, std::complex<double> z) {
  MatrixXcd g = rec.D.cast<std::complex<double>>();
  g += half_transfer(rec.stable.A, rec.stable.B, rec.stable.C, z);
  g += half_transfer(rec.unstable.A, rec.unstable.B, rec.unstable.C, z);
  return g;
}

inline std::vector<MatrixXcd> frequency_response(const ReconstructedModel& rec,
                                                 const std::vector<double>& omegas) {
  std::vector<MatrixXcd> out;
  out.reserve(omegas.size());
  for (double w : omegas) out.push_back(transfer(rec, std::polar(1.0, w)));
  return out;
}

inline std::vector<MatrixXcd> frequency_response(const StateSpaceModel& mod,
                                                 const std::vector<double>& omegas) {
  std::vector<MatrixXcd> out;
  out.reserve(omegas.size());
  for (double w : omegas) out.push_back(transfer(mod, std::polar(1.0, w)));
  return out;
}

}  // namespace lfir
