#pragma once

#include <sstream>

#include "regressor.hpp"

namespace lfir {

// literal inverts the cross Gram as-is and refuses when it is numerically
// rank deficient; truncated drops singular directions below
// tau = tau_scale * sigma_c^2 * sqrt(q N), the scale at which sample noise
// swamps an exponentially small population direction. Dropping is reported
// in the estimate, never silent.
enum class GramPolicy { literal, truncated };

struct BatchOptions {
  GramPolicy policy = GramPolicy::literal;
  double ridge = 0.0;
  double tau_scale = 2.0;
  double sigma_c = 0.0;  // 0: estimate the excitation power from Phi_c
};

struct BatchEstimate {
  MatrixXd theta;
  double gram_sigma_min = 0.0;
  int dropped_directions = 0;
  double tau = 0.0;
};

inline BatchEstimate batch_ls(const DataMatrices& dm, double ridge = 0.0) {
  const Eigen::Index q = dm.Phi.rows();
  MatrixXd gram = dm.Phi * dm.Phi.transpose();
  if (ridge > 0.0) gram += ridge * MatrixXd::Identity(q, q);
  BatchEstimate est;
  est.gram_sigma_min = sigma_min(gram);
  if (est.gram_sigma_min <= 1e-10 * gram.trace() / static_cast<double>(q)) {
    std::ostringstream os;
    os << "batch_ls: regressor Gram is numerically singular (sigma_min = " << est.gram_sigma_min
       << ")";
    throw ConditioningError(os.str(), est.gram_sigma_min);
  }
  const MatrixXd cross = dm.Psi_y * dm.Phi.transpose();
  est.theta = gram.ldlt().solve(cross.transpose()).transpose();
  return est;
}

inline BatchEstimate batch_iv(const DataMatrices& dm, const BatchOptions& opts = {}) {
  if (!dm.has_instruments())
    throw DataError("batch_iv: data matrices carry no instrument block");
  const Eigen::Index q = dm.Phi.rows();
  const double n = static_cast<double>(dm.N());
  MatrixXd gram = dm.Phi * dm.Phi_c.transpose();
  if (opts.ridge > 0.0) gram += opts.ridge * MatrixXd::Identity(q, q);
  const MatrixXd cross = dm.Psi_y * dm.Phi_c.transpose();

  Eigen::JacobiSVD<MatrixXd> svd(gram, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const VectorXd& sv = svd.singularValues();
  BatchEstimate est;
  est.gram_sigma_min = sv(sv.size() - 1);

  if (opts.policy == GramPolicy::literal) {
    if (est.gram_sigma_min <= 1e-10 * sv(0)) {
      std::ostringstream os;
      os << "batch_iv: cross Gram is numerically singular (sigma_min/N = "
         << est.gram_sigma_min / n << "); the instruments barely excite " << q
         << " directions";
      throw WeakInstrumentError(os.str(), est.gram_sigma_min / n);
    }
    est.theta = gram.transpose().partialPivLu().solve(cross.transpose()).transpose();
    return est;
  }

  double sigma_c2 = opts.sigma_c * opts.sigma_c;
  if (sigma_c2 <= 0.0)
    sigma_c2 = dm.Phi_c.squaredNorm() / static_cast<double>(dm.Phi_c.size());
  est.tau = opts.tau_scale * sigma_c2 * std::sqrt(static_cast<double>(q) * n);

  Eigen::Index kept = 0;
  while (kept < sv.size() && sv(kept) >= est.tau) ++kept;
  est.dropped_directions = static_cast<int>(sv.size() - kept);
  if (kept == 0) {
    std::ostringstream os;
    os << "batch_iv: every singular direction of the cross Gram falls below tau = " << est.tau;
    throw WeakInstrumentError(os.str(), est.gram_sigma_min / n);
  }
  const MatrixXd uk = svd.matrixU().leftCols(kept);
  const MatrixXd vk = svd.matrixV().leftCols(kept);
  const VectorXd inv = sv.head(kept).cwiseInverse();
  est.theta = cross * vk * inv.asDiagonal() * uk.transpose();
  return est;
}

// Sample cross moments between the regressor window and the instruments.
// s_iv is the smallest singular value of R_uc = Phi Phi_c^T / N and
// lambda_iv = s_iv^2 / sigma_c^2. When the feedback component is available,
// S_fc = Phi_f Phi_c^T / N should have vanishing p x p blocks wherever the
// feedback tap is no older than the instrument tap; triangularity_residual
// is the largest such block norm.
struct InstrumentDiagnostics {
  double s_iv = 0.0;
  double lambda_iv = 0.0;
  double triangularity_residual = 0.0;
  bool has_triangularity = false;
  long N = 0;
  int r = 0;
  int d = 0;
};

inline InstrumentDiagnostics instrument_diagnostics(const DataMatrices& dm, double sigma_c) {
  if (!dm.has_instruments())
    throw DataError("instrument_diagnostics: data matrices carry no instrument block");
  if (sigma_c <= 0.0)
    throw DomainError("instrument_diagnostics: sigma_c must be positive, lambda_iv undefined");
  InstrumentDiagnostics diag;
  diag.N = dm.N();
  diag.r = dm.r;
  diag.d = dm.d;
  const MatrixXd r_uc = dm.Phi * dm.Phi_c.transpose() / static_cast<double>(diag.N);
  diag.s_iv = sigma_min(r_uc);
  diag.lambda_iv = diag.s_iv * diag.s_iv / (sigma_c * sigma_c);
  if (dm.Phi_f.cols() == dm.Phi_c.cols() && dm.Phi_f.cols() > 0) {
    diag.has_triangularity = true;
    const MatrixXd s_fc = dm.Phi_f * dm.Phi_c.transpose() / static_cast<double>(diag.N);
    const int mu = dm.r + dm.d + 1;
    for (int i = 0; i < mu; ++i)
      for (int j = 0; j <= i; ++j) {
        const double blk = spectral_norm(s_fc.block(i * dm.p, j * dm.p, dm.p, dm.p));
        diag.triangularity_residual = std::max(diag.triangularity_residual, blk);
      }
  }
  return diag;
}

}  // namespace lfir
