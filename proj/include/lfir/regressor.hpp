#pragma once

#include "simulate.hpp"

namespace lfir {

// Two-sided FIR window: r past taps, d future taps, mu = r + d + 1 blocks.
struct RegressorConfig {
  int r = 0;
  int d = 0;
  int mu() const { return r + d + 1; }
};

// Psi_y is m x N; Phi, Phi_c, Phi_f are (p mu) x N. Column j corresponds to
// time k = r + j; block b of a column holds the input at k + d - b, so the
// stacked window runs from the most future sample downward and pairs with
// the coefficient blocks in ascending lag order -d..r.
struct DataMatrices {
  MatrixXd Psi_y, Phi, Phi_c, Phi_f;
  int r = 0, d = 0, p = 0, m = 0;
  long N() const { return Psi_y.cols(); }
  bool has_instruments() const { return Phi_c.cols() > 0; }
};

inline DataMatrices build_matrices(const Trajectory& traj, const RegressorConfig& cfg,
                                   bool with_f = false) {
  if (cfg.r < 0 || cfg.d < 0) throw RangeError("build_matrices: horizons must be nonnegative");
  const long len = traj.length();
  const long count = len - cfg.r - cfg.d;
  if (count < 1) {
    std::ostringstream os;
    os << "build_matrices: trajectory of length " << len << " too short for r = " << cfg.r
       << ", d = " << cfg.d;
    throw RangeError(os.str());
  }
  const int p = static_cast<int>(traj.u.rows());
  const int m = static_cast<int>(traj.y.rows());
  const int mu = cfg.mu();

  DataMatrices dm;
  dm.r = cfg.r;
  dm.d = cfg.d;
  dm.p = p;
  dm.m = m;
  dm.Psi_y.resize(m, count);
  dm.Phi.resize(p * mu, count);
  const bool with_c = traj.c.cols() == len;
  if (with_c && traj.c.rows() != p)
    throw DataError("build_matrices: excitation component has the wrong width");
  if (with_c) dm.Phi_c.resize(p * mu, count);
  if (with_f) {
    if (traj.f.cols() != len || traj.f.rows() != p)
      throw DataError("build_matrices: trajectory lacks the feedback component");
    dm.Phi_f.resize(p * mu, count);
  }

  for (long j = 0; j < count; ++j) {
    const long k = cfg.r + j;
    dm.Psi_y.col(j) = traj.y.col(k);
    for (int b = 0; b < mu; ++b) {
      const long t = k + cfg.d - b;
      dm.Phi.block(b * p, j, p, 1) = traj.u.col(t);
      if (with_c) dm.Phi_c.block(b * p, j, p, 1) = traj.c.col(t);
      if (with_f) dm.Phi_f.block(b * p, j, p, 1) = traj.f.col(t);
    }
  }
  return dm;
}

}  // namespace lfir
