#pragma once

#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include <lfir/lfir.hpp>

// Independent reference implementations for cross-checking the library. Each
// oracle deliberately avoids the code path it validates.
namespace oracles {

using lfir::MatrixXcd;
using lfir::MatrixXd;
using lfir::StateSpaceModel;
using lfir::VectorXd;

// Laurent coefficient H_i as the contour integral of G(z) z^{i-1} over the
// unit circle, discretized on a uniform grid: averaging G(e^{jw}) e^{jwi}
// recovers the coefficient of z^{-i} because the series converges uniformly
// on the circle. Evaluates G by a dense complex solve per grid point and
// never touches the modal decomposition.
inline MatrixXd contour_coefficient(const StateSpaceModel& mod, int lag, int grid = 16384) {
  const int m = mod.m(), p = mod.p();
  MatrixXcd acc = MatrixXcd::Zero(m, p);
  for (int k = 0; k < grid; ++k) {
    const double w = 2.0 * std::numbers::pi * k / grid;
    const std::complex<double> z = std::polar(1.0, w);
    MatrixXcd zia = -mod.A.cast<std::complex<double>>();
    zia.diagonal().array() += z;
    const MatrixXcd g =
        mod.C.cast<std::complex<double>>() *
            zia.partialPivLu().solve(mod.B.cast<std::complex<double>>()) +
        mod.D.cast<std::complex<double>>();
    acc += g * std::polar(1.0, w * lag);
  }
  return (acc / static_cast<double>(grid)).real();
}

// Same contour integral with B replaced by B_w and no direct term.
inline MatrixXd contour_noise_coefficient(const StateSpaceModel& mod, int lag,
                                          int grid = 16384) {
  const int m = mod.m();
  const int l = mod.l();
  MatrixXcd acc = MatrixXcd::Zero(m, l);
  for (int k = 0; k < grid; ++k) {
    const double w = 2.0 * std::numbers::pi * k / grid;
    const std::complex<double> z = std::polar(1.0, w);
    MatrixXcd zia = -mod.A.cast<std::complex<double>>();
    zia.diagonal().array() += z;
    const MatrixXcd g = mod.C.cast<std::complex<double>>() *
                        zia.partialPivLu().solve(mod.Bw.cast<std::complex<double>>());
    acc += g * std::polar(1.0, w * lag);
  }
  return (acc / static_cast<double>(grid)).real();
}

// Direct series sum for X = sum_k A^k Q (A^T)^k, run to the term floor.
inline MatrixXd lyapunov_series(const MatrixXd& a, const MatrixXd& q, double floor = 1e-15) {
  MatrixXd x = q;
  MatrixXd term = q;
  for (int k = 0; k < 100000; ++k) {
    term = a * term * a.transpose();
    x += term;
    if (term.norm() <= floor * x.norm()) break;
  }
  return x;
}

// Ridge instrumental-variable solution through an explicit inverse, the
// textbook formula without any factorization shortcuts.
inline MatrixXd ridge_iv_explicit(const lfir::DataMatrices& dm, double eta) {
  const Eigen::Index q = dm.Phi.rows();
  const MatrixXd gram =
      dm.Phi * dm.Phi_c.transpose() + eta * MatrixXd::Identity(q, q);
  return dm.Psi_y * dm.Phi_c.transpose() * gram.inverse();
}

// Exhaustive transient-amplification scan without the early-settling exit.
inline double transient_amplification_full(const MatrixXd& m, int cap = 4000) {
  const double rho = lfir::spectral_radius(m);
  MatrixXd pw = MatrixXd::Identity(m.rows(), m.cols());
  double best = 1.0;
  for (int tau = 1; tau <= cap; ++tau) {
    pw = pw * m;
    best = std::max(best, lfir::spectral_norm(pw) / std::pow(rho, 0.5 * tau));
  }
  return best;
}

// Rational transfer function evaluated from factored root lists; independent
// of any state-space realization.
inline std::complex<double> rational_transfer(
    const std::vector<std::complex<double>>& zeros,
    const std::vector<std::complex<double>>& poles, std::complex<double> z, double gain = 1.0) {
  std::complex<double> num = gain;
  for (const auto& q : zeros) num *= z - q;
  std::complex<double> den = 1.0;
  for (const auto& q : poles) den *= z - q;
  return num / den;
}

// Random state-space model with eigenvalue moduli in
// [0.05, 0.95] u [1.05, 2.0]: quasi-diagonal spectrum (real entries and 2x2
// rotation blocks) hidden behind a random orthogonal similarity.
inline StateSpaceModel random_system(std::mt19937_64& eng, int n_s, int n_u, int m, int p) {
  const int n = n_s + n_u;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  MatrixXd a = MatrixXd::Zero(n, n);
  int filled = 0;
  auto place = [&](double lo, double hi, int count) {
    int left = count;
    while (left > 0) {
      const double rho = lo + (hi - lo) * unit(eng);
      if (left >= 2 && unit(eng) < 0.5) {
        const double th = 0.1 + (std::numbers::pi - 0.2) * unit(eng);
        a(filled, filled) = rho * std::cos(th);
        a(filled, filled + 1) = rho * std::sin(th);
        a(filled + 1, filled) = -rho * std::sin(th);
        a(filled + 1, filled + 1) = rho * std::cos(th);
        filled += 2;
        left -= 2;
      } else {
        a(filled, filled) = unit(eng) < 0.5 ? -rho : rho;
        filled += 1;
        left -= 1;
      }
    }
  };
  place(0.05, 0.95, n_s);
  place(1.05, 2.00, n_u);
  MatrixXd raw(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) raw(i, j) = gauss(eng);
  const MatrixXd q = Eigen::HouseholderQR<MatrixXd>(raw).householderQ();
  a = (q.transpose() * a * q).eval();
  MatrixXd b(n, p), c(m, n), d(m, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) b(i, j) = gauss(eng);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) c(i, j) = gauss(eng);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < p; ++j) d(i, j) = gauss(eng);
  return lfir::make_state_space(a, b, b, c, d);
}

}  // namespace oracles
