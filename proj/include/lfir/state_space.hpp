#pragma once

#include <complex>
#include <sstream>

#include "linalg.hpp"

namespace lfir {

// x(k+1) = A x(k) + B u(k) + B_w w(k)
// y(k)   = C x(k) + D u(k) + v(k)
// No eigenvalue of A may sit within the unit-circle tolerance of |z| = 1
// (the Laurent annulus collapses otherwise); enforced at construction.
struct StateSpaceModel {
  MatrixXd A, B, Bw, C, D;

  int n() const { return static_cast<int>(A.rows()); }
  int p() const { return static_cast<int>(B.cols()); }
  int l() const { return static_cast<int>(Bw.cols()); }
  int m() const { return static_cast<int>(C.rows()); }
};

inline constexpr double kUnitCircleTol = 1e-8;

inline StateSpaceModel make_state_space(const MatrixXd& a, const MatrixXd& b, const MatrixXd& bw,
                                        const MatrixXd& c, const MatrixXd& d,
                                        double unit_circle_tol = kUnitCircleTol) {
  if (a.rows() != a.cols()) throw DimensionError("make_state_space: A must be square");
  const Eigen::Index n = a.rows();
  if (n < 1) throw DimensionError("make_state_space: state dimension must be positive");
  if (b.rows() != n || b.cols() < 1) throw DimensionError("make_state_space: B must be n x p, p >= 1");
  if (bw.rows() != n && bw.size() != 0) throw DimensionError("make_state_space: B_w must have n rows");
  if (c.cols() != n || c.rows() < 1) throw DimensionError("make_state_space: C must be m x n, m >= 1");
  if (d.rows() != c.rows() || d.cols() != b.cols())
    throw DimensionError("make_state_space: D must be m x p");
  if (!a.allFinite() || !b.allFinite() || !bw.allFinite() || !c.allFinite() || !d.allFinite())
    throw DataError("make_state_space: non-finite entries");
  const VectorXcd ev = eigenvalues(a);
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    const double gap = std::abs(std::abs(ev(i)) - 1.0);
    if (gap < unit_circle_tol) {
      std::ostringstream os;
      os << "make_state_space: eigenvalue modulus " << std::abs(ev(i)) << " within "
         << unit_circle_tol << " of the unit circle; the stable/unstable split is undefined";
      throw DomainError(os.str());
    }
  }
  StateSpaceModel mod;
  mod.A = a;
  mod.B = b;
  mod.Bw = bw.size() == 0 ? MatrixXd(n, 0) : bw;
  mod.C = c;
  mod.D = d;
  return mod;
}

// G(z) = C (zI - A)^{-1} B + D.
inline MatrixXcd transfer(const StateSpaceModel& mod, std::complex<double> z) {
  const Eigen::Index n = mod.A.rows();
  MatrixXcd zia = -mod.A.cast<std::complex<double>>();
  zia.diagonal().array() += z;
  Eigen::FullPivLU<MatrixXcd> lu(zia);
  if (!lu.isInvertible()) throw NumericError("transfer: evaluation point is a pole");
  return mod.C.cast<std::complex<double>>() * lu.solve(mod.B.cast<std::complex<double>>()) +
         mod.D.cast<std::complex<double>>();
}

// Controllable-canonical SISO realization of num(z)/den(z) built from root
// lists; requires strictly proper transfer functions.
inline StateSpaceModel siso_from_roots(const std::vector<std::complex<double>>& zeros,
                                       const std::vector<std::complex<double>>& poles,
                                       double gain = 1.0, double bw_gain = 1.0,
                                       double unit_circle_tol = kUnitCircleTol) {
  if (zeros.size() >= poles.size())
    throw DomainError("siso_from_roots: transfer function must be strictly proper");
  const int n = static_cast<int>(poles.size());
  const VectorXd den = poly_from_roots(poles);   // z^n + a_1 z^{n-1} + ... + a_n
  const VectorXd num = poly_from_roots(zeros);   // monic, degree < n
  MatrixXd a = MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) a(0, j) = -den(j + 1);
  a.block(1, 0, n - 1, n - 1).setIdentity();
  MatrixXd b = MatrixXd::Zero(n, 1);
  b(0, 0) = 1.0;
  MatrixXd c = MatrixXd::Zero(1, n);
  const int deg = static_cast<int>(num.size()) - 1;
  for (int j = 0; j <= deg; ++j) c(0, n - 1 - deg + j) = gain * num(j);
  return make_state_space(a, b, bw_gain * b, c, MatrixXd::Zero(1, 1), unit_circle_tol);
}

}  // namespace lfir
