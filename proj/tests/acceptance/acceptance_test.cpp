#include <gtest/gtest.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <lfir/lfir.hpp>

#include "support/oracles.hpp"

using namespace lfir;

namespace {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  }

 private:
  std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

double wrap_degrees(double deg) {
  while (deg > 180.0) deg -= 360.0;
  while (deg <= -180.0) deg += 360.0;
  return deg;
}

std::vector<double> sorted_moduli(const MatrixXd& a) {
  const VectorXcd eigs = eigenvalues(a);
  std::vector<double> out;
  out.reserve(eigs.size());
  for (Eigen::Index i = 0; i < eigs.size(); ++i) out.push_back(std::abs(eigs(i)));
  std::sort(out.begin(), out.end());
  return out;
}

// Shared pipeline for the realization checks: one noisy identification run at
// SNR = 100, N = 16000, realized with 6 x 6 Hankel blocks and orders (4, 3).
struct RealizationArtifacts {
  bool ok = false;
  std::string message;
  ReconstructedModel rec;
};

const RealizationArtifacts& noisy_realization() {
  static const RealizationArtifacts art = [] {
    RealizationArtifacts a;
    try {
      ExperimentConfig cfg = example1_config();
      cfg.seed = 3;
      const StateSpaceModel mod = make_example1_plant();
      const Controller ctrl = resolve_controller(cfg, mod);
      const double sigma_v = detail::pilot_sigma_v(mod, ctrl, cfg, 100.0);
      NoiseSpec noise{cfg.sigma_c, cfg.sigma_w, sigma_v, cfg.seed};
      const Trajectory traj =
          simulate_closed_loop(mod, ctrl, noise, 16000 + cfg.r + cfg.d, false);
      const DataMatrices dm = build_matrices(traj, {cfg.r, cfg.d});
      BatchOptions opts;
      opts.policy = GramPolicy::truncated;
      opts.sigma_c = cfg.sigma_c;
      const BatchEstimate est = batch_iv(dm, opts);
      const LaurentBlock blk = LaurentBlock::from_flattened(est.theta, cfg.r, cfg.d);
      HankelSpec spec_s, spec_u;
      spec_s.rows = spec_s.cols = 6;
      spec_s.order = 4;
      spec_u.rows = spec_u.cols = 6;
      spec_u.order = 3;
      a.rec = reconstruct(blk, spec_s, spec_u);
      a.ok = true;
    } catch (const Error& e) {
      a.message = e.what();
    }
    return a;
  }();
  return art;
}

ReconstructedModel exact_realization() {
  const StateSpaceModel mod = make_example1_plant();
  const LaurentBlock blk = laurent_input_coeffs(decompose(mod), mod.D, 25, 25);
  HankelSpec spec_s, spec_u;
  spec_s.order = 4;
  spec_u.order = 3;
  return reconstruct(blk, spec_s, spec_u);
}

}  // namespace

TEST(Criterion1, LaurentCoefficientsMatchContourOracle) {
  const Stopwatch timer;
  const StateSpaceModel mod = make_example1_plant();
  const LaurentBlock blk = laurent_input_coeffs(decompose(mod), mod.D, 25, 25);
  double worst = 0.0;
  for (int lag = -25; lag <= 25; ++lag) {
    // 4096 contour points: quadrature aliasing decays like 0.6^M here, so the
    // oracle itself is exact to well below the acceptance tolerance.
    const MatrixXd want = oracles::contour_coefficient(mod, lag, 4096);
    worst = std::max(worst, (blk.coeff(lag) - want).cwiseAbs().maxCoeff());
  }
  const double elapsed = timer.seconds();
  std::cout << "[measured] worst entrywise error " << worst << ", elapsed " << elapsed << " s\n";
  EXPECT_LE(worst, 1e-8);
  EXPECT_LT(elapsed, 1.0);
}

TEST(Criterion2, ModalPartsRebuildTheTransferFunction) {
  const Stopwatch timer;
  std::vector<StateSpaceModel> systems = {make_example1_plant(), make_example4_plant()};
  std::mt19937_64 eng(2024);
  std::uniform_int_distribution<int> pick_ns(0, 4), pick_nu(0, 3), pick_dim(1, 3);
  while (systems.size() < 102) {
    const int n_s = pick_ns(eng);
    const int n_u = pick_nu(eng);
    if (n_s + n_u == 0) continue;
    systems.push_back(oracles::random_system(eng, n_s, n_u, pick_dim(eng), pick_dim(eng)));
  }
  double worst = 0.0;
  for (const StateSpaceModel& mod : systems) {
    const DecomposedRealization dec = decompose(mod);
    for (int k = 0; k < 64; ++k) {
      const std::complex<double> z = std::polar(1.0, 2.0 * std::numbers::pi * k / 64.0);
      const MatrixXcd g = transfer(mod, z);
      const MatrixXcd parts = half_transfer(dec.A_s, dec.B_s, dec.C_s, z) +
                              half_transfer(dec.A_u, dec.B_u, dec.C_u, z) +
                              mod.D.cast<std::complex<double>>();
      worst = std::max(worst, (parts - g).norm() / g.norm());
    }
  }
  const double elapsed = timer.seconds();
  std::cout << "[measured] worst relative error " << worst << " over " << systems.size()
            << " systems, elapsed " << elapsed << " s\n";
  EXPECT_LE(worst, 1e-9);
  EXPECT_LT(elapsed, 10.0);
}

TEST(Criterion3, MedianErrorDecaysAtRootNRate) {
  const Stopwatch timer;
  ExperimentConfig cfg = example1_config();
  cfg.snr = {10.0, 100.0};
  cfg.trials = 20;
  cfg.seed = 23;
  cfg.with_ls = false;
  const ResultTable table = run_error_vs_N(cfg);
  for (double snr : cfg.snr) {
    std::vector<std::pair<double, double>> pairs;
    for (const ResultRow& row : table.rows) {
      if (row.snr != snr) continue;
      ASSERT_TRUE(row.ok) << row.message;
      pairs.push_back({static_cast<double>(row.N), row.error});
    }
    ASSERT_EQ(pairs.size(), 100u);
    const RateFit fit = fit_rate(pairs);
    std::cout << "[measured] snr " << snr << ": slope " << fit.slope << " (bootstrap ["
              << fit.ci_lo << ", " << fit.ci_hi << "])\n";
    EXPECT_GE(fit.slope, -0.65) << "snr " << snr;
    EXPECT_LE(fit.slope, -0.35) << "snr " << snr;
  }
  const double elapsed = timer.seconds();
  std::cout << "[measured] elapsed " << elapsed << " s\n";
  EXPECT_LT(elapsed, 600.0);
}

TEST(Criterion4, InstrumentsBeatLeastSquaresUnderProcessNoise) {
  const Stopwatch timer;
  ExperimentConfig cfg = example4_config();
  cfg.n_grid = {6400};
  cfg.trials = 20;
  ASSERT_GT(cfg.sigma_w, 0.0);
  const ResultTable table = run_error_vs_N(cfg);
  ASSERT_EQ(table.rows.size(), 40u);
  int wins = 0;
  double iv_median = 0.0, ls_median = 0.0;
  std::vector<double> iv_errors, ls_errors;
  for (int trial = 0; trial < 20; ++trial) {
    const ResultRow& iv = table.rows[2 * trial];
    const ResultRow& ls = table.rows[2 * trial + 1];
    ASSERT_TRUE(iv.ok) << iv.message;
    ASSERT_TRUE(ls.ok) << ls.message;
    if (iv.error < ls.error) ++wins;
    iv_errors.push_back(iv.error);
    ls_errors.push_back(ls.error);
  }
  iv_median = median(iv_errors);
  ls_median = median(ls_errors);
  const double elapsed = timer.seconds();
  std::cout << "[measured] iv wins " << wins << "/20, median iv " << iv_median << ", median ls "
            << ls_median << ", elapsed " << elapsed << " s\n";
  EXPECT_GE(wins, 16);
  EXPECT_LT(elapsed, 300.0);
}

TEST(Criterion5, OpenLoopCollapsesToLeastSquares) {
  const StateSpaceModel mod = make_example5_plant();
  const int r = 10, d = 10;
  const double sigma_c = 1.0;
  for (long n : {1024L, 2048L, 4096L}) {
    NoiseSpec noise;
    noise.sigma_c = sigma_c;
    noise.sigma_w = 0.3;
    noise.sigma_v = 0.1;
    noise.seed = 17;
    const Trajectory traj =
        simulate_closed_loop(mod, Controller{ZeroController{}}, noise, n + r + d, false);
    const DataMatrices dm = build_matrices(traj, {r, d});
    ASSERT_EQ(dm.N(), n);
    const MatrixXd theta_iv = batch_iv(dm).theta;
    const MatrixXd theta_ls = batch_ls(dm).theta;
    const double gap = (theta_iv - theta_ls).cwiseAbs().maxCoeff();

    const MatrixXd cross = dm.Phi * dm.Phi_c.transpose() / static_cast<double>(n);
    const int q = static_cast<int>(cross.rows());
    const double dev =
        spectral_norm(cross - sigma_c * sigma_c * MatrixXd::Identity(q, q));
    const double cap = 5.0 * sigma_c * sigma_c *
                       std::sqrt(static_cast<double>(q) / n) * std::sqrt(std::log(double(n)));
    std::cout << "[measured] N " << n << ": max |iv - ls| " << gap << ", gram deviation " << dev
              << " (cap " << cap << ")\n";
    EXPECT_LE(gap, 1e-10);
    EXPECT_LE(dev, cap);
  }
}

TEST(Criterion6, FeedbackCrossGramIsBlockTriangular) {
  const Stopwatch timer;
  const StateSpaceModel mod = make_example4_plant();
  ExperimentConfig cfg = example4_config();
  const Controller ctrl = resolve_controller(cfg, mod);
  const double sigma_v = detail::pilot_sigma_v(mod, ctrl, cfg, cfg.snr.front());
  const std::vector<long> grid = {500, 1000, 2000, 4000};
  std::vector<double> medians;
  for (long n : grid) {
    std::vector<double> residuals;
    for (int trial = 0; trial < 20; ++trial) {
      NoiseSpec noise{cfg.sigma_c, cfg.sigma_w, sigma_v, cfg.seed + trial};
      const Trajectory traj =
          simulate_closed_loop(mod, ctrl, noise, n + cfg.r + cfg.d, false);
      const DataMatrices dm = build_matrices(traj, {cfg.r, cfg.d}, true);
      residuals.push_back(instrument_diagnostics(dm, cfg.sigma_c).triangularity_residual);
    }
    medians.push_back(median(residuals));
  }
  const double c_fit = medians.front() * std::sqrt(static_cast<double>(grid.front()));
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double cap = 1.5 * c_fit / std::sqrt(static_cast<double>(grid[i]));
    std::cout << "[measured] N " << grid[i] << ": median lower-block residual " << medians[i]
              << " (cap " << cap << ")\n";
    EXPECT_LE(medians[i], cap) << "N = " << grid[i];
  }
  std::vector<double> ns(grid.begin(), grid.end());
  const double slope = fit_loglog(ns, medians).slope;
  const double elapsed = timer.seconds();
  std::cout << "[measured] residual decay slope " << slope << ", elapsed " << elapsed << " s\n";
  EXPECT_GE(slope, -0.8);
  EXPECT_LE(slope, -0.2);
}

TEST(Criterion7, RecursiveIvConvergesToBatchIv) {
  const StateSpaceModel mod = make_example4_plant();
  ExperimentConfig cfg = example4_config();
  const Controller ctrl = resolve_controller(cfg, mod);
  const double sigma_v = detail::pilot_sigma_v(mod, ctrl, cfg, cfg.snr.front());
  NoiseSpec noise{cfg.sigma_c, cfg.sigma_w, sigma_v, cfg.seed};
  const long n = 2000;
  const Trajectory traj = simulate_closed_loop(mod, ctrl, noise, n + cfg.r + cfg.d, false);

  std::vector<std::pair<long, long>> order;
  RecursiveOptions opts;
  opts.lambda_f = 1.0;
  opts.eta = 0.0;  // defaults to 1e-4 times the measured excitation power
  const RecursiveRun run = run_recursive(traj, {cfg.r, cfg.d}, RecursiveMode::iv, opts, {},
                                         [&](long k, long t) { order.push_back({k, t}); });
  EXPECT_EQ(run.skipped, 0);
  EXPECT_EQ(run.updates, n);

  // Streaming contract: the estimate for sample k fires once u(k + d) lands.
  ASSERT_EQ(order.size(), static_cast<std::size_t>(n));
  EXPECT_EQ(order.front().first, cfg.r);
  EXPECT_EQ(order.front().second, cfg.r + cfg.d);
  for (std::size_t i = 0; i < order.size(); ++i) {
    ASSERT_EQ(order[i].second, order[i].first + cfg.d);
    if (i > 0) ASSERT_EQ(order[i].second, order[i - 1].second + 1);
  }

  const DataMatrices dm = build_matrices(traj, {cfg.r, cfg.d});
  const MatrixXd batch = oracles::ridge_iv_explicit(dm, run.eta);
  const double rel = (run.theta - batch).norm() / batch.norm();
  std::cout << "[measured] recursive vs batch relative gap " << rel << " at eta " << run.eta
            << "\n";
  EXPECT_LE(rel, 1e-6);
}

TEST(Criterion8, FrequencyResponseWithinOneDbAndFiveDegrees) {
  const Stopwatch timer;
  const StateSpaceModel mod = make_example1_plant();

  // Exact-coefficient round trip first: the pipeline must be lossless before
  // the noisy run means anything.
  {
    const ReconstructedModel rec = exact_realization();
    double worst_db = 0.0;
    for (int k = 0; k < 256; ++k) {
      const std::complex<double> z = std::polar(1.0, std::numbers::pi * k / 255.0);
      const double got = std::abs(transfer(rec, z)(0, 0));
      const double want = std::abs(transfer(mod, z)(0, 0));
      worst_db = std::max(worst_db, std::abs(20.0 * std::log10(got / want)));
    }
    std::cout << "[measured] exact round trip worst magnitude error " << worst_db << " dB\n";
    ASSERT_LE(worst_db, 1e-9);
  }

  const RealizationArtifacts& art = noisy_realization();
  ASSERT_TRUE(art.ok) << art.message;
  int within = 0;
  double worst_db = 0.0, worst_deg = 0.0;
  for (int k = 0; k < 256; ++k) {
    const std::complex<double> z = std::polar(1.0, std::numbers::pi * k / 255.0);
    const std::complex<double> got = transfer(art.rec, z)(0, 0);
    const std::complex<double> want = transfer(mod, z)(0, 0);
    const double db = std::abs(20.0 * std::log10(std::abs(got) / std::abs(want)));
    const double deg =
        std::abs(wrap_degrees((std::arg(got) - std::arg(want)) * 180.0 / std::numbers::pi));
    worst_db = std::max(worst_db, db);
    worst_deg = std::max(worst_deg, deg);
    if (db <= 1.0 && deg <= 5.0) ++within;
  }
  const double elapsed = timer.seconds();
  std::cout << "[measured] " << within << "/256 points within 1 dB and 5 deg (worst " << worst_db
            << " dB, " << worst_deg << " deg), elapsed " << elapsed << " s\n";
  EXPECT_GE(within, 231);  // 90% of 256 grid points
  EXPECT_LT(elapsed, 120.0);
}

TEST(Criterion8, PoleModuliWithinOnePercent) {
  const std::vector<double> want_stable = {0.4, 0.4, 0.5, 0.6};
  const std::vector<double> want_unstable = {1.5, 1.6, 1.7};

  // Exact-coefficient round trip first.
  {
    const ReconstructedModel rec = exact_realization();
    const std::vector<double> mod_s = sorted_moduli(rec.stable.A);
    const std::vector<double> mod_u = sorted_moduli(rec.unstable.A);
    ASSERT_EQ(mod_s.size(), want_stable.size());
    ASSERT_EQ(mod_u.size(), want_unstable.size());
    for (std::size_t i = 0; i < want_stable.size(); ++i)
      ASSERT_NEAR(mod_s[i], want_stable[i], 1e-9);
    for (std::size_t i = 0; i < want_unstable.size(); ++i)
      ASSERT_NEAR(mod_u[i], want_unstable[i], 1e-9);
  }

  const RealizationArtifacts& art = noisy_realization();
  ASSERT_TRUE(art.ok) << art.message;
  const std::vector<double> mod_s = sorted_moduli(art.rec.stable.A);
  const std::vector<double> mod_u = sorted_moduli(art.rec.unstable.A);
  ASSERT_EQ(mod_s.size(), want_stable.size());
  ASSERT_EQ(mod_u.size(), want_unstable.size());
  std::cout << "[measured] stable moduli:";
  for (double m : mod_s) std::cout << " " << m;
  std::cout << " (truth 0.4 0.4 0.5 0.6)\n[measured] unstable moduli:";
  for (double m : mod_u) std::cout << " " << m;
  std::cout << " (truth 1.5 1.6 1.7)\n";
  for (std::size_t i = 0; i < want_stable.size(); ++i)
    EXPECT_NEAR(mod_s[i], want_stable[i], 1e-2) << "stable modulus " << i;
  for (std::size_t i = 0; i < want_unstable.size(); ++i)
    EXPECT_NEAR(mod_u[i], want_unstable[i], 1e-2) << "unstable modulus " << i;
}

TEST(Criterion9, SlowerLoopsIdentifyWorse) {
  const Stopwatch timer;
  ExperimentConfig cfg = example4_config();
  cfg.n_grid = {6400};
  cfg.trials = 20;
  cfg.with_ls = false;
  const ResultTable table = run_controller_sweep(cfg);
  std::map<std::string, std::vector<double>> errors;
  std::map<std::string, double> tinf;
  for (const ResultRow& row : table.rows) {
    ASSERT_TRUE(row.ok) << row.controller << ": " << row.message;
    errors[row.controller].push_back(row.error);
    tinf[row.controller] = row.t_infinity;
  }
  ASSERT_EQ(errors.size(), 8u);
  std::vector<double> tinfs, med_errors;
  for (const auto& [name, errs] : errors) {
    tinfs.push_back(tinf[name]);
    med_errors.push_back(median(errs));
    std::cout << "[measured] " << name << ": t_inf " << tinf[name] << ", median error "
              << med_errors.back() << "\n";
  }
  const double rho = spearman(tinfs, med_errors);
  const double elapsed = timer.seconds();
  std::cout << "[measured] spearman " << rho << ", elapsed " << elapsed << " s\n";
  EXPECT_GT(rho, 0.0);
  EXPECT_GE(tinf["lqr"], 4.0);
  EXPECT_LE(tinf["lqr"], 10.0);
  EXPECT_GE(tinf["pp_0.96"], 500.0);
  EXPECT_LE(tinf["pp_0.96"], 5000.0);
  EXPECT_LT(elapsed, 900.0);
}

TEST(Criterion10, BoundMachineryIsGoldenAndMonotone) {
  BoundInputs in;
  in.rho_s = 0.5;
  in.rho_u_inv = 0.5;
  in.m = in.p = in.l = 1;
  in.r = 1;
  in.d = 1;
  in.N = 1.0;
  in.delta = 0.5;
  in.lambda_iv = 1.0;

  EXPECT_NEAR(evaluate_helpers(in).chi_N, 250.23523703723794, 1e-10);
  EXPECT_NEAR(evaluate_helpers(in).N_w, 2868.5503114802673, 1e-9);
  {
    BoundInputs mv = in;
    mv.delta = 16.0 * std::exp(-3.0);
    EXPECT_NEAR(evaluate_helpers(mv).M_v, 7.0, 1e-12);
    mv.sigma_v = 2.0;
    EXPECT_NEAR(theorem_bound(mv).beta_v, 5.291502622129181, 1e-12);
  }
  {
    BoundInputs ds = in;
    ds.r = 10;
    ds.N = 100.0;
    const BoundReport rep = evaluate_helpers(ds);
    EXPECT_NEAR(rep.D_s, 1.100097751710655, 1e-12);
    EXPECT_NEAR(rep.M_s, 16.863631175598098, 1e-12);
  }
  {
    BoundInputs es = in;
    es.phi_s = 2.0;
    es.stable_tail_norm = 0.25;
    es.r = 4;
    es.gamma_cl_s = 3.0;
    BoundReport rep = evaluate_helpers(es);
    truncation_scales(es, rep);
    EXPECT_NEAR(rep.sigma_e_s, 1.7888543819998317, 1e-12);
  }

  BoundInputs sweep = in;
  sweep.rho_s = 0.6;
  sweep.rho_u_inv = 0.7;
  sweep.phi_s = 2.0;
  sweep.stable_tail_norm = 0.2;
  sweep.unstable_tail_norm = 0.1;
  sweep.gamma_norm = 2.0;
  sweep.gamma_cl_s = 2.0;
  sweep.gamma_cl_u = 1.5;
  sweep.sigma_w = 0.5;
  sweep.sigma_v = 0.3;
  sweep.r = 5;
  sweep.d = 5;
  sweep.N = 100.0;
  sweep.lambda_iv = 0.5;
  double prev = theorem_bound(sweep).bound_value;
  for (int k = 0; k < 8; ++k) {
    sweep.N *= 2.0;
    const double next = theorem_bound(sweep).bound_value;
    EXPECT_LE(next, prev);
    prev = next;
  }
  sweep.N = 100.0;
  prev = theorem_bound(sweep).bound_value;
  for (int k = 0; k < 6; ++k) {
    sweep.lambda_iv *= 0.5;
    const double next = theorem_bound(sweep).bound_value;
    EXPECT_GE(next, prev);
    prev = next;
  }
  sweep.lambda_iv = 0.5;
  prev = theorem_bound(sweep).bound_value;
  for (int k = 0; k < 5; ++k) {
    sweep.sigma_w += 0.25;
    EXPECT_GE(theorem_bound(sweep).bound_value, prev);
    prev = theorem_bound(sweep).bound_value;
  }
  sweep.sigma_w = 0.5;
  prev = theorem_bound(sweep).bound_value;
  for (int k = 0; k < 5; ++k) {
    sweep.sigma_v += 0.25;
    EXPECT_GE(theorem_bound(sweep).bound_value, prev);
    prev = theorem_bound(sweep).bound_value;
  }

  BoundInputs pure = sweep;
  pure.sigma_w = 0.0;
  pure.gamma_norm = 0.0;
  pure.stable_tail_norm = 0.0;
  pure.unstable_tail_norm = 0.0;
  pure.sigma_v = 0.3;
  pure.N = 400.0;
  const double base = theorem_bound(pure).bound_value;
  pure.N = 1600.0;
  EXPECT_DOUBLE_EQ(theorem_bound(pure).bound_value, base / 2.0);

  EXPECT_EQ(corollary_horizon(0.5, 1024.0, 1.0), 10);
  for (double rho : {0.3, 0.77, 0.999})
    for (double n : {10.0, 1024.0, 1e6}) {
      const int h = corollary_horizon(rho, n, 1.0);
      EXPECT_LE(std::pow(rho, h), 1.0 / n);
      if (h > 1) EXPECT_GT(std::pow(rho, h - 1), 1.0 / n);
    }
  std::cout << "[measured] golden values, monotone sweeps, and horizon post-conditions hold\n";
}

TEST(Criterion11, TruncationTailsDecayAtModalRates) {
  const StateSpaceModel mod = make_example4_plant();
  const Controller ctrl = design_lqr(mod, MatrixXd::Identity(3, 3), MatrixXd::Identity(1, 1));
  NoiseSpec noise;
  noise.sigma_c = 1.0;
  noise.sigma_w = 0.5;
  noise.sigma_v = 0.0;
  noise.seed = 1;
  const Trajectory traj = simulate_closed_loop(mod, ctrl, noise, 4000, true);
  const DecomposedRealization dec = decompose(mod);

  std::vector<double> horizons, log_rms_s, log_rms_u;
  for (int h = 4; h <= 12; ++h) {
    const TruncationTailReport rep = truncation_tails(dec, h, h, traj.x_s, traj.x_u);
    horizons.push_back(h);
    log_rms_s.push_back(std::log(std::sqrt(rep.e_s.squaredNorm() / rep.e_s.size())));
    log_rms_u.push_back(std::log(std::sqrt(rep.e_u.squaredNorm() / rep.e_u.size())));
  }
  const double slope_s = fit_line(horizons, log_rms_s).slope;
  const double slope_u = fit_line(horizons, log_rms_u).slope;
  const double ratio_s = slope_s / std::log(dec.rho_s);
  const double ratio_u = slope_u / std::log(dec.rho_u_inv);
  std::cout << "[measured] stable slope " << slope_s << " vs log rho_s " << std::log(dec.rho_s)
            << " (ratio " << ratio_s << ")\n"
            << "[measured] unstable slope " << slope_u << " vs log rho_u_inv "
            << std::log(dec.rho_u_inv) << " (ratio " << ratio_u << ")\n";
  EXPECT_GE(ratio_s, 0.8);
  EXPECT_LE(ratio_s, 1.2);
  EXPECT_GE(ratio_u, 0.8);
  EXPECT_LE(ratio_u, 1.2);
}
