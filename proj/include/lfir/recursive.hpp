#pragma once

#include <functional>

#include "regressor.hpp"

namespace lfir {

struct RecursiveOptions {
  double lambda_f = 1.0;  // forgetting factor in (0, 1]
  double eta = 0.0;       // P(0) = I / eta; <= 0 picks a data-driven default
};

// theta is m x q, P is q x q. For LS, P tracks the inverse of the forgetting
// regressor Gram and stays symmetric. For IV, P tracks the inverse of the
// cross Gram eta I + sum phi z^T, which is not symmetric, so P is never
// symmetrized on that path.
struct RecursiveEstimator {
  MatrixXd theta, P;
  double lambda_f = 1.0;
  double eta = 0.0;
  long updates = 0;
  long skipped = 0;

  RecursiveEstimator(int m, int q, const RecursiveOptions& opts) {
    if (opts.lambda_f <= 0.0 || opts.lambda_f > 1.0)
      throw DomainError("recursive estimator: forgetting factor must lie in (0, 1]");
    if (opts.eta <= 0.0)
      throw DomainError("recursive estimator: eta must be positive at construction");
    lambda_f = opts.lambda_f;
    eta = opts.eta;
    theta = MatrixXd::Zero(m, q);
    P = MatrixXd::Identity(q, q) / eta;
  }
};

inline void rls_step(RecursiveEstimator& est, const VectorXd& phi, const VectorXd& y) {
  if (!phi.allFinite() || !y.allFinite())
    throw DataError("rls_step: non-finite sample");
  const VectorXd pphi = est.P * phi;
  const double denom = est.lambda_f + phi.dot(pphi);
  const VectorXd g = pphi / denom;
  est.theta += (y - est.theta * phi) * g.transpose();
  est.P = (est.P - g * pphi.transpose()) / est.lambda_f;
  est.P = 0.5 * (est.P + est.P.transpose());
  ++est.updates;
}

// Returns false when the gain denominator collapses and the sample is
// skipped to keep P finite.
inline bool riv_step(RecursiveEstimator& est, const VectorXd& phi, const VectorXd& z,
                     const VectorXd& y) {
  if (!phi.allFinite() || !z.allFinite() || !y.allFinite())
    throw DataError("riv_step: non-finite sample");
  const VectorXd pphi = est.P * phi;
  const double denom = est.lambda_f + z.dot(pphi);
  if (std::abs(denom) <= 1e-12) {
    ++est.skipped;
    return false;
  }
  const VectorXd g = pphi / denom;
  const RowVectorXd h = z.transpose() * est.P / denom;
  est.theta += (y - est.theta * phi) * h;
  est.P = (est.P - g * (z.transpose() * est.P)) / est.lambda_f;
  ++est.updates;
  return true;
}

inline VectorXd stack_window(const MatrixXd& src, long k, int r, int d) {
  const int p = static_cast<int>(src.rows());
  VectorXd out(p * (r + d + 1));
  for (int b = 0; b <= r + d; ++b) out.segment(b * p, p) = src.col(k + d - b);
  return out;
}

enum class RecursiveMode { ls, iv };

struct RecursiveSnapshot {
  long updates = 0;
  MatrixXd theta;
};

struct RecursiveRun {
  MatrixXd theta;
  double eta = 0.0;
  long updates = 0;
  long skipped = 0;
  std::vector<RecursiveSnapshot> snapshots;
};

// Streams the trajectory in arrival order. The sample arriving at time t
// completes the window of the regression instant k = t - d, so the first
// update fires at t = r + d and the estimate of theta(k) always lags the
// newest input by d steps. observer(k, t) is invoked on every update.
inline RecursiveRun run_recursive(
    const Trajectory& traj, const RegressorConfig& cfg, RecursiveMode mode,
    const RecursiveOptions& opts = {}, const std::vector<long>& checkpoints = {},
    const std::function<void(long, long)>& observer = nullptr) {
  const long len = traj.length();
  if (len - cfg.r - cfg.d < 1)
    throw RangeError("run_recursive: trajectory too short for the requested horizons");
  if (mode == RecursiveMode::iv && (traj.c.cols() != len || traj.c.rows() != traj.u.rows()))
    throw DataError("run_recursive: trajectory lacks the excitation component");
  const int p = static_cast<int>(traj.u.rows());
  const int m = static_cast<int>(traj.y.rows());
  const int q = p * cfg.mu();

  RecursiveOptions effective = opts;
  if (effective.eta <= 0.0) {
    if (mode == RecursiveMode::ls) {
      const VectorXd phi0 = stack_window(traj.u, cfg.r, cfg.r, cfg.d);
      effective.eta = 1e-8 * (1.0 + phi0.squaredNorm());
    } else {
      const double sc2 = traj.c.squaredNorm() / static_cast<double>(traj.c.size());
      effective.eta = 1e-4 * sc2;
    }
  }

  RecursiveEstimator est(m, q, effective);
  RecursiveRun run;
  run.eta = effective.eta;
  std::size_t next_cp = 0;

  for (long t = cfg.r + cfg.d; t < len; ++t) {
    const long k = t - cfg.d;
    const VectorXd phi = stack_window(traj.u, k, cfg.r, cfg.d);
    const VectorXd y = traj.y.col(k);
    bool applied = true;
    if (mode == RecursiveMode::ls) {
      rls_step(est, phi, y);
    } else {
      const VectorXd z = stack_window(traj.c, k, cfg.r, cfg.d);
      applied = riv_step(est, phi, z, y);
    }
    if (applied && observer) observer(k, t);
    while (next_cp < checkpoints.size() && est.updates >= checkpoints[next_cp]) {
      run.snapshots.push_back({est.updates, est.theta});
      ++next_cp;
    }
  }

  run.theta = est.theta;
  run.updates = est.updates;
  run.skipped = est.skipped;
  return run;
}

}  // namespace lfir
