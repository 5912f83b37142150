#pragma once

#include <sstream>
#include <vector>

#include "controllers.hpp"
#include "decompose.hpp"
#include "rng.hpp"

namespace lfir {

struct NoiseSpec {
  double sigma_c = 1.0;
  double sigma_w = 0.0;
  double sigma_v = 0.0;
  std::uint64_t seed = 1;
};

// Columns are time steps. c, w, v, f, x, x_s, x_u are ground truth kept for
// instrumenting and diagnostics; only u and y are observable to estimators.
struct Trajectory {
  MatrixXd u, y;
  MatrixXd c, f, w, v;
  MatrixXd x, x_s, x_u;
  long length() const { return u.cols(); }
};

// Runs the loop u(k) = f(k) + c(k) with f strictly causal, then splits the
// state trajectory into the modal coordinates of the plant. Each noise
// channel draws from its own stream, so changing sigma_v leaves the c and w
// sample paths untouched.
inline Trajectory simulate_closed_loop(const StateSpaceModel& mod, const Controller& ctrl,
                                       const NoiseSpec& noise, long length,
                                       bool keep_ground_truth = true) {
  if (length < 1) throw RangeError("simulate_closed_loop: length must be positive");
  if (noise.sigma_c < 0 || noise.sigma_w < 0 || noise.sigma_v < 0)
    throw DomainError("simulate_closed_loop: noise levels must be nonnegative");
  const ClosedLoopForm cl = closed_loop_form(mod, ctrl);
  const double rho_cl = spectral_radius(cl.A);
  if (rho_cl >= 1.0) {
    std::ostringstream os;
    os << "simulate_closed_loop: closed loop unstable (rho = " << rho_cl << ")";
    throw DomainError(os.str());
  }
  const int n = mod.n(), p = mod.p(), l = mod.l(), m = mod.m();

  GaussianStream gc(channel_seed(noise.seed, NoiseChannel::excitation));
  GaussianStream gw(channel_seed(noise.seed, NoiseChannel::process));
  GaussianStream gv(channel_seed(noise.seed, NoiseChannel::measurement));

  Trajectory traj;
  traj.u.resize(p, length);
  traj.y.resize(m, length);
  traj.c.resize(p, length);
  traj.f.resize(p, length);
  traj.w.resize(l, length);
  traj.v.resize(m, length);
  traj.x.resize(n, length);

  VectorXd x = VectorXd::Zero(n);
  const LinearOutputFeedback* of = std::get_if<LinearOutputFeedback>(&ctrl);
  VectorXd xc = of ? VectorXd::Zero(of->Ac.rows()) : VectorXd();

  for (long k = 0; k < length; ++k) {
    VectorXd f = VectorXd::Zero(p);
    if (const auto* sf = std::get_if<LinearStateFeedback>(&ctrl))
      f = -(sf->K * x);
    else if (of)
      f = of->Cc * xc;

    VectorXd c(p), w(l), v(m);
    for (int i = 0; i < p; ++i) c(i) = noise.sigma_c * gc.next();
    for (int i = 0; i < l; ++i) w(i) = noise.sigma_w * gw.next();
    for (int i = 0; i < m; ++i) v(i) = noise.sigma_v * gv.next();

    const VectorXd u = f + c;
    const VectorXd y = mod.C * x + mod.D * u + v;

    traj.f.col(k) = f;
    traj.c.col(k) = c;
    traj.w.col(k) = w;
    traj.v.col(k) = v;
    traj.u.col(k) = u;
    traj.y.col(k) = y;
    traj.x.col(k) = x;

    if (x.lpNorm<Eigen::Infinity>() > 1e12) {
      std::ostringstream os;
      os << "simulate_closed_loop: state blew up at step " << k;
      throw InstabilityError(os.str());
    }

    x = mod.A * x + mod.B * u + mod.Bw * w;
    if (of) xc = of->Ac * xc + of->Bc * y;
  }

  if (keep_ground_truth) {
    const DecomposedRealization dec = decompose(mod);
    const MatrixXd xd = dec.T_inv * traj.x;
    traj.x_s = xd.topRows(dec.n_s);
    traj.x_u = xd.bottomRows(dec.n_u);
  }
  return traj;
}

struct ControllerDiagnostics {
  double rho_cl = 0.0;
  TInfinityReport t_inf;
};

inline ControllerDiagnostics controller_diagnostics(const StateSpaceModel& mod,
                                                    const Controller& ctrl) {
  ControllerDiagnostics diag;
  diag.rho_cl = spectral_radius(closed_loop_form(mod, ctrl).A);
  diag.t_inf = t_infinity(mod, ctrl);
  return diag;
}

// Stationary second moments of the modal states under the closed loop,
// from the Lyapunov equation of the joint (plant, controller) chain.
struct ClosedLoopMoments {
  double gamma_cl_s = 0.0;
  double gamma_cl_u = 0.0;
};

inline ClosedLoopMoments closed_loop_moments(const StateSpaceModel& mod, const Controller& ctrl,
                                             const NoiseSpec& noise) {
  const ClosedLoopForm cl = closed_loop_form(mod, ctrl);
  if (spectral_radius(cl.A) >= 1.0)
    throw DomainError("closed_loop_moments: closed loop unstable");
  const double sc2 = noise.sigma_c * noise.sigma_c;
  const double sw2 = noise.sigma_w * noise.sigma_w;
  const double sv2 = noise.sigma_v * noise.sigma_v;
  const MatrixXd q = sc2 * cl.B_c * cl.B_c.transpose() + sw2 * cl.B_w * cl.B_w.transpose() +
                     sv2 * cl.B_v * cl.B_v.transpose();
  const MatrixXd xcov = solve_discrete_lyapunov(cl.A, q);
  const DecomposedRealization dec = decompose(mod);
  const int n = mod.n();
  const MatrixXd plant_cov = xcov.topLeftCorner(n, n);
  const MatrixXd modal = dec.T_inv * plant_cov * dec.T_inv.transpose();
  ClosedLoopMoments mom;
  mom.gamma_cl_s = dec.n_s > 0 ? spectral_norm(modal.topLeftCorner(dec.n_s, dec.n_s)) : 0.0;
  mom.gamma_cl_u =
      dec.n_u > 0 ? spectral_norm(modal.bottomRightCorner(dec.n_u, dec.n_u)) : 0.0;
  return mom;
}

// Empirical counterpart: sup over k of the trial-averaged modal Grams.
inline ClosedLoopMoments empirical_moments(const std::vector<Trajectory>& trials) {
  if (trials.empty()) throw DataError("empirical_moments: no trajectories");
  const long length = trials.front().length();
  const Eigen::Index ns = trials.front().x_s.rows();
  const Eigen::Index nu = trials.front().x_u.rows();
  if (ns + nu == 0)
    throw DataError("empirical_moments: trajectories lack ground-truth modal states");
  ClosedLoopMoments mom;
  for (long k = 0; k < length; ++k) {
    MatrixXd gs = MatrixXd::Zero(ns, ns);
    MatrixXd gu = MatrixXd::Zero(nu, nu);
    for (const Trajectory& t : trials) {
      gs += t.x_s.col(k) * t.x_s.col(k).transpose();
      gu += t.x_u.col(k) * t.x_u.col(k).transpose();
    }
    gs /= static_cast<double>(trials.size());
    gu /= static_cast<double>(trials.size());
    if (ns > 0) mom.gamma_cl_s = std::max(mom.gamma_cl_s, spectral_norm(gs));
    if (nu > 0) mom.gamma_cl_u = std::max(mom.gamma_cl_u, spectral_norm(gu));
  }
  return mom;
}

}  // namespace lfir
