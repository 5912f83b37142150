#pragma once

#include <cmath>
#include <sstream>

#include "errors.hpp"

namespace lfir {

// Every leading constant in the finite-sample bound, kept explicit so a
// calibration can tighten them without touching the formulas.
struct BoundConstants {
  double c0 = 1.0;
  double c_w = 1.0;
  double c_v = 1.0;
  double c_es = 1.0;
  double c_eu = 1.0;
  double kappa_w = 1.0;
};

struct BoundInputs {
  double rho_s = 0.0;
  double rho_u_inv = 0.0;
  double phi_s = 1.0;
  double phi_u = 1.0;
  double stable_tail_norm = 0.0;    // ||C_s A_s^r||
  double unstable_tail_norm = 0.0;  // ||C_u A_u^{-d-1}||
  double gamma_norm = 0.0;          // ||gamma|| of the noise coefficient block
  double gamma_cl_s = 0.0;
  double gamma_cl_u = 0.0;
  double sigma_c = 1.0;
  double sigma_w = 0.0;
  double sigma_v = 0.0;
  int m = 1, p = 1, l = 1;
  int r = 0, d = 0;
  double N = 0.0;
  double delta = 0.1;
  double lambda_iv = 0.0;
  BoundConstants constants;
  int mu() const { return r + d + 1; }
};

struct BoundReport {
  double chi_N = 0.0;
  double N_w = 0.0;
  double M_v = 0.0;
  double D_s = 0.0, M_s = 0.0;
  double D_u = 0.0, M_u = 0.0;
  double sigma_e_s = 0.0, sigma_e_u = 0.0;
  double beta_w = 0.0, beta_v = 0.0, beta_es = 0.0, beta_eu = 0.0;
  double bound_value = 0.0;
  double sample_size_required = 0.0;
  bool sample_size_satisfied = false;
  BoundConstants constants;
};

namespace detail {

inline void validate_bound_inputs(const BoundInputs& in) {
  if (!(in.delta > 0.0 && in.delta < 1.0)) {
    std::ostringstream os;
    os << "bounds: delta = " << in.delta << " outside (0, 1)";
    throw DomainError(os.str());
  }
  if (in.r < 1 || in.d < 1) {
    std::ostringstream os;
    os << "bounds: degenerate horizon r = " << in.r << ", d = " << in.d
       << "; both sides of the window must be nonempty";
    throw DomainError(os.str());
  }
  if (in.N < 1.0) throw DomainError("bounds: N must be at least 1");
  if (!(in.rho_s >= 0.0 && in.rho_s < 1.0))
    throw DomainError("bounds: rho_s must lie in [0, 1)");
  if (!(in.rho_u_inv >= 0.0 && in.rho_u_inv < 1.0))
    throw DomainError("bounds: rho_u_inv must lie in [0, 1)");
  if (in.m < 1 || in.p < 1 || in.l < 1)
    throw DomainError("bounds: signal dimensions must be positive");
}

}  // namespace detail

// Fills the polylogarithmic and effective-dimension helpers only.
inline BoundReport evaluate_helpers(const BoundInputs& in) {
  detail::validate_bound_inputs(in);
  BoundReport rep;
  rep.constants = in.constants;
  const double mu = in.mu();
  const double dl = in.delta;
  const auto sq = [](double x) { return x * x; };

  rep.chi_N = sq(std::log(16.0 * mu * in.p / dl)) * sq(std::log(16.0 * in.N * in.p / dl));
  const double lp = in.l + in.p;
  const double l1 = std::log(16.0 * mu * lp / dl);
  const double l2 = std::log(16.0 * in.N * lp / dl);
  rep.N_w = in.constants.kappa_w * mu * lp * sq(l1) * sq(l2);
  rep.M_v = mu * in.p + in.m + std::log(16.0 / dl);
  rep.D_s = 1.0 + in.m * in.r / (in.N * (1.0 - std::pow(in.rho_s, in.r)));
  rep.M_s = in.r * in.p + in.m + std::log(16.0 * (in.r + 1) / dl);
  rep.D_u = 1.0 + in.m * in.d / (in.N * (1.0 - std::pow(in.rho_u_inv, in.d)));
  rep.M_u = in.d * in.p + in.m + std::log(16.0 * (in.d + 1) / dl);
  return rep;
}

// Standard deviations of the truncation-error processes, driven by the
// closed-loop state power within each modal part.
inline void truncation_scales(const BoundInputs& in, BoundReport& rep) {
  rep.sigma_e_s = in.phi_s * in.stable_tail_norm *
                  std::sqrt(in.r * in.gamma_cl_s / (1.0 - std::pow(in.rho_s, in.r)));
  rep.sigma_e_u = in.phi_u * in.unstable_tail_norm *
                  std::sqrt(in.d * in.gamma_cl_u / (1.0 - std::pow(in.rho_u_inv, in.d)));
}

inline BoundReport theorem_bound(const BoundInputs& in) {
  BoundReport rep = evaluate_helpers(in);
  if (in.lambda_iv <= 0.0) {
    std::ostringstream os;
    os << "theorem_bound: lambda_iv = " << in.lambda_iv << " is not positive";
    throw WeakInstrumentError(os.str(), in.lambda_iv);
  }
  truncation_scales(in, rep);
  const BoundConstants& c = in.constants;
  rep.beta_w = c.c_w * in.sigma_w * in.gamma_norm *
               std::max(std::sqrt(rep.N_w), rep.N_w / std::sqrt(in.N));
  rep.beta_v = c.c_v * in.sigma_v * std::sqrt(rep.M_v);
  rep.beta_es = c.c_es * rep.sigma_e_s * std::sqrt(rep.D_s * rep.M_s);
  rep.beta_eu = c.c_eu * rep.sigma_e_u * std::sqrt(rep.D_u * rep.M_u);
  rep.bound_value =
      (rep.beta_w + rep.beta_es + rep.beta_eu + rep.beta_v) / std::sqrt(in.lambda_iv * in.N);
  rep.sample_size_required = c.c0 * in.mu() * in.p * rep.chi_N *
                             std::max(1.0, in.sigma_c * in.sigma_c / in.lambda_iv);
  rep.sample_size_satisfied = in.N >= rep.sample_size_required;
  return rep;
}

// Smallest h with rho^h <= eps0 / N, found by the closed form and then
// nudged so the post-condition holds exactly in floating point.
inline int corollary_horizon(double rho, double N, double eps0) {
  if (rho >= 1.0 || rho < 0.0) throw DomainError("corollary_horizon: rho must lie in [0, 1)");
  if (N < 1.0 || eps0 <= 0.0)
    throw DomainError("corollary_horizon: need N >= 1 and eps0 > 0");
  if (rho == 0.0) return 1;
  const double target = eps0 / N;
  int h = static_cast<int>(std::ceil(std::log(N / eps0) / std::abs(std::log(rho))));
  if (h < 1) h = 1;
  while (h > 1 && std::pow(rho, h - 1) <= target) --h;
  while (std::pow(rho, h) > target) ++h;
  return h;
}

struct CorollaryHorizons {
  int r = 0;
  int d = 0;
};

inline CorollaryHorizons corollary_horizons(double rho_s, double rho_u_inv, double N,
                                            double eps0) {
  return {corollary_horizon(rho_s, N, eps0), corollary_horizon(rho_u_inv, N, eps0)};
}

}  // namespace lfir
