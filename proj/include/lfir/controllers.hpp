#pragma once

#include <complex>
#include <sstream>
#include <variant>
#include <vector>

#include "state_space.hpp"

namespace lfir {

// Strictly causal feedback variants: f(k) never depends on y(k), c(k), w(k),
// or v(k) at the same instant.
struct ZeroController {};

struct LinearStateFeedback {
  MatrixXd K;  // f(k) = -K x(k)
};

// xc(k+1) = Ac xc(k) + Bc y(k), f(k) = Cc xc(k); depends on y(0..k-1) only.
struct LinearOutputFeedback {
  MatrixXd Ac, Bc, Cc;
};

using Controller = std::variant<ZeroController, LinearStateFeedback, LinearOutputFeedback>;

// Closed-loop state-space form over the joint state (plant state, controller
// state): inputs c, w, v and readout f.
struct ClosedLoopForm {
  MatrixXd A, B_c, B_w, B_v, C_f;
};

inline ClosedLoopForm closed_loop_form(const StateSpaceModel& mod, const Controller& ctrl) {
  const int n = mod.n(), p = mod.p(), m = mod.m();
  ClosedLoopForm cl;
  if (std::holds_alternative<ZeroController>(ctrl)) {
    cl.A = mod.A;
    cl.B_c = mod.B;
    cl.B_w = mod.Bw;
    cl.B_v = MatrixXd::Zero(n, m);
    cl.C_f = MatrixXd::Zero(p, n);
    return cl;
  }
  if (const auto* sf = std::get_if<LinearStateFeedback>(&ctrl)) {
    if (sf->K.rows() != p || sf->K.cols() != n)
      throw DimensionError("closed_loop_form: K must be p x n");
    cl.A = mod.A - mod.B * sf->K;
    cl.B_c = mod.B;
    cl.B_w = mod.Bw;
    cl.B_v = MatrixXd::Zero(n, m);
    cl.C_f = -sf->K;
    return cl;
  }
  const auto& of = std::get<LinearOutputFeedback>(ctrl);
  const Eigen::Index nc = of.Ac.rows();
  if (of.Ac.cols() != nc || of.Bc.rows() != nc || of.Bc.cols() != m || of.Cc.rows() != p ||
      of.Cc.cols() != nc)
    throw DimensionError("closed_loop_form: output-feedback controller dimensions inconsistent");
  const Eigen::Index na = n + nc;
  cl.A = MatrixXd::Zero(na, na);
  cl.A.topLeftCorner(n, n) = mod.A;
  cl.A.topRightCorner(n, nc) = mod.B * of.Cc;
  cl.A.bottomLeftCorner(nc, n) = of.Bc * mod.C;
  cl.A.bottomRightCorner(nc, nc) = of.Ac + of.Bc * mod.D * of.Cc;
  cl.B_c = MatrixXd::Zero(na, p);
  cl.B_c.topRows(n) = mod.B;
  cl.B_c.bottomRows(nc) = of.Bc * mod.D;
  cl.B_w = MatrixXd::Zero(na, mod.l());
  cl.B_w.topRows(n) = mod.Bw;
  cl.B_v = MatrixXd::Zero(na, m);
  cl.B_v.bottomRows(nc) = of.Bc;
  cl.C_f = MatrixXd::Zero(p, na);
  cl.C_f.rightCols(nc) = of.Cc;
  return cl;
}

inline double closed_loop_spectral_radius(const StateSpaceModel& mod, const Controller& ctrl) {
  return spectral_radius(closed_loop_form(mod, ctrl).A);
}

// Fixed-point iteration on the discrete Riccati map; converged when
// successive iterates differ by <= 1e-10 in Frobenius norm (cap 1e5 sweeps).
inline LinearStateFeedback design_lqr(const StateSpaceModel& mod, const MatrixXd& q,
                                      const MatrixXd& r) {
  const int n = mod.n(), p = mod.p();
  if (q.rows() != n || q.cols() != n) throw DimensionError("design_lqr: Q must be n x n");
  if (r.rows() != p || r.cols() != p) throw DimensionError("design_lqr: R must be p x p");
  if ((q - q.transpose()).norm() > 1e-10 * std::max(1.0, q.norm()))
    throw DomainError("design_lqr: Q must be symmetric");
  if ((r - r.transpose()).norm() > 1e-10 * std::max(1.0, r.norm()))
    throw DomainError("design_lqr: R must be symmetric");
  Eigen::SelfAdjointEigenSolver<MatrixXd> qe(q), re(r);
  if (qe.eigenvalues().minCoeff() < -1e-10 * std::max(1.0, q.norm()))
    throw DomainError("design_lqr: Q must be positive semidefinite");
  if (re.eigenvalues().minCoeff() <= 0.0)
    throw DomainError("design_lqr: R must be positive definite");

  MatrixXd pmat = q;
  constexpr int kMaxIter = 100000;
  bool converged = false;
  for (int it = 0; it < kMaxIter; ++it) {
    const MatrixXd btp = mod.B.transpose() * pmat;
    const MatrixXd gain = (r + btp * mod.B).ldlt().solve(btp * mod.A);
    const MatrixXd next =
        q + mod.A.transpose() * (pmat * mod.A - pmat * mod.B * gain);
    const double diff = (next - pmat).norm();
    pmat = 0.5 * (next + next.transpose());
    if (diff <= 1e-10) {
      converged = true;
      break;
    }
    if (!pmat.allFinite()) throw StabilizabilityError("design_lqr: Riccati iteration diverged");
  }
  if (!converged)
    throw StabilizabilityError("design_lqr: Riccati iteration did not converge in 1e5 sweeps");
  const MatrixXd btp = mod.B.transpose() * pmat;
  LinearStateFeedback sf{(r + btp * mod.B).ldlt().solve(btp * mod.A)};
  const double rho = spectral_radius(mod.A - mod.B * sf.K);
  if (rho >= 1.0) {
    std::ostringstream os;
    os << "design_lqr: returned gain does not stabilize (rho = " << rho << ")";
    throw StabilizabilityError(os.str());
  }
  return sf;
}

// Ackermann's formula; single-input only.
inline LinearStateFeedback design_pole_placement(const StateSpaceModel& mod,
                                                 std::vector<std::complex<double>> targets) {
  const int n = mod.n();
  if (mod.p() != 1)
    throw UnsupportedError("design_pole_placement: Ackermann path requires a single input");
  if (static_cast<int>(targets.size()) != n)
    throw DimensionError("design_pole_placement: need exactly n target poles");

  std::vector<bool> matched(targets.size(), false);
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (std::abs(targets[i].imag()) <= 1e-12 || matched[i]) continue;
    bool found = false;
    for (std::size_t j = i + 1; j < targets.size(); ++j) {
      if (matched[j]) continue;
      if (std::abs(targets[j] - std::conj(targets[i])) <= 1e-9) {
        matched[i] = matched[j] = true;
        found = true;
        break;
      }
    }
    if (!found)
      throw DomainError("design_pole_placement: targets not closed under conjugation");
  }

  MatrixXd wc(n, n);
  MatrixXd col = mod.B;
  for (int j = 0; j < n; ++j) {
    wc.col(j) = col;
    col = mod.A * col;
  }
  Eigen::FullPivLU<MatrixXd> lu(wc.transpose());
  if (!lu.isInvertible()) {
    std::ostringstream os;
    os << "design_pole_placement: (A, B) not controllable (sigma_min = " << sigma_min(wc) << ")";
    throw RankError(os.str());
  }

  const VectorXd chi = poly_from_roots(targets);  // monic, descending
  MatrixXd phi = MatrixXd::Identity(n, n);
  for (Eigen::Index i = 1; i < chi.size(); ++i)
    phi = phi * mod.A + chi(i) * MatrixXd::Identity(n, n);
  VectorXd en = VectorXd::Zero(n);
  en(n - 1) = 1.0;
  LinearStateFeedback sf{(lu.solve(en).transpose() * phi)};

  VectorXcd achieved = eigenvalues(mod.A - mod.B * sf.K);
  std::vector<std::complex<double>> got(achieved.data(), achieved.data() + achieved.size());
  auto lex = [](const std::complex<double>& a, const std::complex<double>& b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  };
  std::sort(got.begin(), got.end(), lex);
  std::sort(targets.begin(), targets.end(), lex);
  for (int i = 0; i < n; ++i)
    if (std::abs(got[i] - targets[i]) > 1e-6)
      throw NumericError("design_pole_placement: achieved poles deviate beyond 1e-6");
  return sf;
}

// T_inf = sum_{s >= 1} ||C_f A_cl^{s-1} B_c||: total closed-loop gain from
// the injected excitation to the feedback signal. Terms are summed until one
// drops below 1e-12; tail_bound certifies the remainder via
// ||C_f|| ||B_c|| Phi(A_cl) rho^{s/2} / (1 - rho^{1/2}).
struct TInfinityReport {
  double value = 0.0;
  double tail_bound = 0.0;
  int terms = 0;
};

inline TInfinityReport t_infinity(const StateSpaceModel& mod, const Controller& ctrl) {
  if (std::holds_alternative<ZeroController>(ctrl)) return {};
  const ClosedLoopForm cl = closed_loop_form(mod, ctrl);
  const double rho = spectral_radius(cl.A);
  if (rho >= 1.0) {
    std::ostringstream os;
    os << "t_infinity: closed loop unstable (rho = " << rho << ")";
    throw DomainError(os.str());
  }
  TInfinityReport rep;
  MatrixXd impulse = cl.B_c;  // A_cl^{s-1} B_c
  constexpr int kCap = 1000000;
  int s = 1;
  for (; s <= kCap; ++s) {
    const double term = spectral_norm(cl.C_f * impulse);
    rep.value += term;
    rep.terms = s;
    if (term < 1e-12) break;
    impulse = cl.A * impulse;
  }
  if (s > kCap) throw NumericError("t_infinity: series did not reach the term floor");
  const double phi = transient_amplification(cl.A);
  rep.tail_bound = spectral_norm(cl.C_f) * spectral_norm(cl.B_c) * phi *
                   std::pow(rho, 0.5 * rep.terms) / (1.0 - std::sqrt(rho));
  return rep;
}

}  // namespace lfir
