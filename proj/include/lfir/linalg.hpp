#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <complex>
#include <sstream>
#include <vector>

#include "errors.hpp"

namespace lfir {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::RowVectorXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

inline double spectral_norm(const MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  return m.jacobiSvd().singularValues()(0);
}

inline double sigma_min(const MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  const VectorXd sv = m.jacobiSvd().singularValues();
  return sv(sv.size() - 1);
}

inline VectorXcd eigenvalues(const MatrixXd& m) {
  if (m.rows() != m.cols()) throw DimensionError("eigenvalues: matrix must be square");
  if (m.size() == 0) return VectorXcd(0);
  if (!m.allFinite()) throw DataError("eigenvalues: non-finite entries");
  Eigen::EigenSolver<MatrixXd> es(m, false);
  if (es.info() != Eigen::Success) throw NumericError("eigenvalues: eigen solver failed");
  return es.eigenvalues();
}

inline double spectral_radius(const MatrixXd& m) {
  const VectorXcd ev = eigenvalues(m);
  double rho = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) rho = std::max(rho, std::abs(ev(i)));
  return rho;
}

inline double min_eigenvalue_modulus(const MatrixXd& m) {
  const VectorXcd ev = eigenvalues(m);
  if (ev.size() == 0) return 0.0;
  double lo = std::abs(ev(0));
  for (Eigen::Index i = 1; i < ev.size(); ++i) lo = std::min(lo, std::abs(ev(i)));
  return lo;
}

inline MatrixXd kron(const MatrixXd& a, const MatrixXd& b) {
  MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

// Solves X - A X A^T = Q by vectorization; intended for small state
// dimensions (the Kronecker system is n^2 x n^2).
inline MatrixXd solve_discrete_lyapunov(const MatrixXd& a, const MatrixXd& q) {
  if (a.rows() != a.cols()) throw DimensionError("solve_discrete_lyapunov: A must be square");
  if (q.rows() != a.rows() || q.cols() != a.cols())
    throw DimensionError("solve_discrete_lyapunov: Q must match A");
  const Eigen::Index n = a.rows();
  if (n == 0) return MatrixXd(0, 0);
  MatrixXd k = MatrixXd::Identity(n * n, n * n) - kron(a, a);
  Eigen::FullPivLU<MatrixXd> lu(k);
  if (!lu.isInvertible())
    throw NumericError("solve_discrete_lyapunov: I - A (x) A is singular (rho(A) = 1?)");
  VectorXd vq = Eigen::Map<const VectorXd>(q.data(), n * n);
  VectorXd vx = lu.solve(vq);
  MatrixXd x = Eigen::Map<const MatrixXd>(vx.data(), n, n);
  return 0.5 * (x + x.transpose());
}

struct TransientAmplification {
  double value = 1.0;
  bool settled = true;
  int tau_at_max = 0;
};

// Phi(M) = sup_{tau >= 0} ||M^tau|| / rho(M)^{tau/2}. The scan stops once the
// ratio has decreased for 50 consecutive steps (cap 10^4 without settling).
inline TransientAmplification transient_amplification_scan(const MatrixXd& m) {
  if (m.rows() != m.cols()) throw DimensionError("transient_amplification: matrix must be square");
  if (m.size() == 0) return {1.0, true, 0};
  const double rho = spectral_radius(m);
  if (rho >= 1.0) {
    std::ostringstream os;
    os << "transient_amplification: rho(M) = " << rho << " must be < 1";
    throw DomainError(os.str());
  }
  if (rho == 0.0) {
    if (spectral_norm(m) == 0.0) return {1.0, true, 0};
    throw DomainError("transient_amplification: nilpotent matrix, ratio unbounded");
  }
  const double half_log_rho = 0.5 * std::log(rho);
  constexpr int kCap = 10000;
  constexpr int kSettle = 50;
  MatrixXd pw = MatrixXd::Identity(m.rows(), m.cols());
  TransientAmplification out{1.0, false, 0};
  double prev = 1.0;
  int decreasing = 0;
  for (int tau = 1; tau <= kCap; ++tau) {
    pw = pw * m;
    const double nm = spectral_norm(pw);
    const double ratio =
        nm == 0.0 ? 0.0 : std::exp(std::log(nm) - static_cast<double>(tau) * half_log_rho);
    if (ratio > out.value) {
      out.value = ratio;
      out.tau_at_max = tau;
    }
    decreasing = ratio < prev ? decreasing + 1 : 0;
    prev = ratio;
    if (decreasing >= kSettle) {
      out.settled = true;
      return out;
    }
  }
  return out;  // settled stays false: caller may warn, value is the best seen
}

inline double transient_amplification(const MatrixXd& m) {
  return transient_amplification_scan(m).value;
}

// Real monic polynomial from a conjugation-closed root multiset, coefficients
// descending in degree: out(0) z^n + ... + out(n).
inline VectorXd poly_from_roots(const std::vector<std::complex<double>>& roots) {
  std::vector<std::complex<double>> c{1.0};
  for (const auto& r : roots) {
    std::vector<std::complex<double>> next(c.size() + 1, 0.0);
    for (std::size_t i = 0; i < c.size(); ++i) {
      next[i] += c[i];
      next[i + 1] -= c[i] * r;
    }
    c = std::move(next);
  }
  double scale = 0.0;
  for (const auto& v : c) scale = std::max(scale, std::abs(v));
  VectorXd out(static_cast<Eigen::Index>(c.size()));
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (std::abs(c[i].imag()) > 1e-9 * std::max(1.0, scale))
      throw NumericError("poly_from_roots: roots not closed under conjugation");
    out(static_cast<Eigen::Index>(i)) = c[i].real();
  }
  return out;
}

inline std::complex<double> polyval(const VectorXd& coeffs, std::complex<double> z) {
  std::complex<double> acc = 0.0;
  for (Eigen::Index i = 0; i < coeffs.size(); ++i) acc = acc * z + coeffs(i);
  return acc;
}

}  // namespace lfir
