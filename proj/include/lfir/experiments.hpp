#pragma once

#include <atomic>
#include <chrono>
#include <exception>
#include <filesystem>
#include <map>
#include <mutex>
#include <thread>

#include "io.hpp"
#include "recursive.hpp"
#include "stats.hpp"
#include "version.hpp"

namespace lfir {

struct ExperimentConfig {
  std::string preset;
  std::string kind = "error_vs_n";
  std::string model_path;
  std::string controller = "lqr";
  std::vector<double> snr = {10.0};
  std::vector<long> n_grid = {500, 1000, 2000, 4000, 8000};
  int r = 25;
  int d = 25;
  int trials = 20;
  double sigma_c = 1.0;
  double sigma_w = 0.0;
  std::uint64_t seed = 1;
  std::string outdir = "out";
  std::string iv_policy = "truncated";
  bool with_ls = true;
};

inline StateSpaceModel make_example1_plant() {
  const std::complex<double> i(0.0, 1.0);
  return siso_from_roots({0.3 * i, -0.3 * i, -0.2, 0.2},
                         {-0.6, -0.5, 0.4 * i, -0.4 * i, 1.7, 1.6, 1.5});
}

inline StateSpaceModel make_example4_plant() {
  MatrixXd a = MatrixXd::Zero(3, 3);
  a.diagonal() << 0.3, 1.5, 2.0;
  MatrixXd b = MatrixXd::Ones(3, 1);
  MatrixXd c = MatrixXd::Ones(1, 3);
  return make_state_space(a, b, b, c, MatrixXd::Zero(1, 1));
}

inline StateSpaceModel make_example5_plant() {
  return siso_from_roots({0.1}, {0.4, -0.2, -0.5});
}

inline ExperimentConfig example1_config() {
  ExperimentConfig cfg;
  cfg.preset = "example1";
  cfg.kind = "error_vs_n";
  cfg.controller = "lqr";
  cfg.snr = {1.0, 10.0, 50.0, 100.0};
  cfg.n_grid = {500, 1000, 2000, 4000, 8000};
  cfg.r = 25;
  cfg.d = 25;
  cfg.sigma_w = 0.0;
  return cfg;
}

inline ExperimentConfig example4_config() {
  ExperimentConfig cfg;
  cfg.preset = "example4";
  cfg.kind = "controller_sweep";
  cfg.controller = "lqr";
  cfg.snr = {20.0};
  cfg.n_grid = {50, 100, 200, 400, 800, 1600, 3200, 6400};
  cfg.r = 20;
  cfg.d = 20;
  cfg.sigma_w = 0.5;
  return cfg;
}

inline json config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["preset"] = cfg.preset;
  j["kind"] = cfg.kind;
  j["model"] = cfg.model_path;
  j["controller"] = cfg.controller;
  j["snr"] = cfg.snr;
  j["n_grid"] = cfg.n_grid;
  j["r"] = cfg.r;
  j["d"] = cfg.d;
  j["trials"] = cfg.trials;
  j["sigma_c"] = cfg.sigma_c;
  j["sigma_w"] = cfg.sigma_w;
  j["seed"] = cfg.seed;
  j["outdir"] = cfg.outdir;
  j["iv_policy"] = cfg.iv_policy;
  j["with_ls"] = cfg.with_ls;
  return j;
}

// A "preset" key seeds the whole configuration; any other key present then
// overrides that field.
inline ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig cfg;
  if (j.contains("preset")) {
    const std::string preset = j["preset"].get<std::string>();
    if (preset == "example1")
      cfg = example1_config();
    else if (preset == "example4")
      cfg = example4_config();
    else if (!preset.empty())
      throw ParseError("config: unknown preset \"" + preset + "\"");
  }
  try {
    if (j.contains("kind")) cfg.kind = j["kind"].get<std::string>();
    if (j.contains("model")) cfg.model_path = j["model"].get<std::string>();
    if (j.contains("controller")) cfg.controller = j["controller"].get<std::string>();
    if (j.contains("snr")) cfg.snr = j["snr"].get<std::vector<double>>();
    if (j.contains("n_grid")) cfg.n_grid = j["n_grid"].get<std::vector<long>>();
    if (j.contains("r")) cfg.r = j["r"].get<int>();
    if (j.contains("d")) cfg.d = j["d"].get<int>();
    if (j.contains("trials")) cfg.trials = j["trials"].get<int>();
    if (j.contains("sigma_c")) cfg.sigma_c = j["sigma_c"].get<double>();
    if (j.contains("sigma_w")) cfg.sigma_w = j["sigma_w"].get<double>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("outdir")) cfg.outdir = j["outdir"].get<std::string>();
    if (j.contains("iv_policy")) cfg.iv_policy = j["iv_policy"].get<std::string>();
    if (j.contains("with_ls")) cfg.with_ls = j["with_ls"].get<bool>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  if (cfg.iv_policy != "literal" && cfg.iv_policy != "truncated")
    throw ParseError("config: iv_policy must be \"literal\" or \"truncated\"");
  return cfg;
}

inline StateSpaceModel resolve_model(const ExperimentConfig& cfg) {
  if (!cfg.model_path.empty()) return load_model_json(cfg.model_path);
  if (cfg.preset == "example1") return make_example1_plant();
  if (cfg.preset == "example4") return make_example4_plant();
  if (cfg.preset == "example5") return make_example5_plant();
  throw DomainError("resolve_model: need a model path or a known preset");
}

inline Controller resolve_controller(const ExperimentConfig& cfg, const StateSpaceModel& mod) {
  if (cfg.controller == "zero") return ZeroController{};
  if (cfg.controller == "lqr" || cfg.controller.empty())
    return design_lqr(mod, MatrixXd::Identity(mod.n(), mod.n()),
                      MatrixXd::Identity(mod.p(), mod.p()));
  return load_controller_json(cfg.controller);
}

struct ResultRow {
  std::string controller;
  std::string estimator;
  double snr = 0.0;
  long N = 0;
  int trial = 0;
  std::uint64_t seed = 0;
  double error = 0.0;
  double lambda_iv = 0.0;
  double t_infinity = 0.0;
  double elapsed_ms = 0.0;
  bool ok = false;
  std::string message;
};

struct ResultTable {
  std::vector<ResultRow> rows;
};

inline std::vector<double> linspace(double a, double b, int count) {
  if (count < 2) throw DomainError("linspace: need at least two points");
  std::vector<double> out(count);
  for (int i = 0; i < count; ++i) out[i] = a + (b - a) * i / (count - 1);
  return out;
}

namespace detail {

inline void parallel_for(long count, const std::function<void(long)>& fn) {
  const unsigned hw = std::thread::hardware_concurrency();
  if (hw <= 1 || count <= 1) {
    for (long i = 0; i < count; ++i) fn(i);
    return;
  }
  const unsigned workers = static_cast<unsigned>(std::min<long>(hw, count));
  std::atomic<long> next(0);
  std::mutex err_mutex;
  std::exception_ptr first_error;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned t = 0; t < workers; ++t)
    pool.emplace_back([&]() {
      for (;;) {
        const long i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lk(err_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  for (std::thread& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

// Signal power is measured on a measurement-noise-free pilot run at the
// trial-0 seed, so sigma_v = sqrt(power / snr) is deterministic in the
// configuration.
inline double pilot_sigma_v(const StateSpaceModel& mod, const Controller& ctrl,
                            const ExperimentConfig& cfg, double snr) {
  if (snr <= 0.0) throw DomainError("pilot_sigma_v: snr must be positive");
  NoiseSpec pilot_noise{cfg.sigma_c, cfg.sigma_w, 0.0, cfg.seed};
  const Trajectory pilot = simulate_closed_loop(mod, ctrl, pilot_noise, 8192, false);
  std::vector<double> samples(pilot.y.data(), pilot.y.data() + pilot.y.size());
  const double power = variance(samples);
  return std::sqrt(power / snr);
}

struct CellSpec {
  double snr = 0.0;
  double sigma_v = 0.0;
  long n = 0;
  int trial = 0;
  const Controller* ctrl = nullptr;
  std::string ctrl_name;
  double t_inf = 0.0;
  const MatrixXd* theta_true = nullptr;
};

inline void run_cell(const StateSpaceModel& mod, const ExperimentConfig& cfg,
                     const CellSpec& cell, ResultRow* iv_row, ResultRow* ls_row) {
  const std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(cell.trial);
  auto fill_common = [&](ResultRow& row, const char* estimator) {
    row.controller = cell.ctrl_name;
    row.estimator = estimator;
    row.snr = cell.snr;
    row.N = cell.n;
    row.trial = cell.trial;
    row.seed = seed;
    row.t_infinity = cell.t_inf;
  };
  fill_common(*iv_row, "iv");
  if (ls_row) fill_common(*ls_row, "ls");

  const auto t0 = std::chrono::steady_clock::now();
  Trajectory traj;
  DataMatrices dm;
  try {
    NoiseSpec noise{cfg.sigma_c, cfg.sigma_w, cell.sigma_v, seed};
    traj = simulate_closed_loop(mod, *cell.ctrl, noise, cell.n + cfg.r + cfg.d, false);
    dm = build_matrices(traj, {cfg.r, cfg.d});
  } catch (const Error& e) {
    iv_row->message = e.what();
    if (ls_row) ls_row->message = e.what();
    return;
  }

  double lambda_iv = 0.0;
  try {
    lambda_iv = instrument_diagnostics(dm, cfg.sigma_c).lambda_iv;
  } catch (const Error&) {
  }

  try {
    BatchOptions opts;
    opts.policy =
        cfg.iv_policy == "literal" ? GramPolicy::literal : GramPolicy::truncated;
    opts.sigma_c = cfg.sigma_c;
    const BatchEstimate est = batch_iv(dm, opts);
    iv_row->error = spectral_norm(est.theta - *cell.theta_true);
    iv_row->lambda_iv = lambda_iv;
    iv_row->ok = true;
  } catch (const Error& e) {
    iv_row->lambda_iv = lambda_iv;
    iv_row->message = e.what();
  }
  iv_row->elapsed_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

  if (!ls_row) return;
  const auto t1 = std::chrono::steady_clock::now();
  try {
    const BatchEstimate est = batch_ls(dm);
    ls_row->error = spectral_norm(est.theta - *cell.theta_true);
    ls_row->lambda_iv = lambda_iv;
    ls_row->ok = true;
  } catch (const Error& e) {
    ls_row->lambda_iv = lambda_iv;
    ls_row->message = e.what();
  }
  ls_row->elapsed_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t1).count();
}

}  // namespace detail

inline ResultTable run_error_vs_N(const ExperimentConfig& cfg) {
  if (cfg.trials < 1) throw DomainError("run_error_vs_N: trials must be positive");
  if (cfg.snr.empty() || cfg.n_grid.empty())
    throw DomainError("run_error_vs_N: snr and n_grid must be nonempty");
  const StateSpaceModel mod = resolve_model(cfg);
  const Controller ctrl = resolve_controller(cfg, mod);
  const double t_inf = t_infinity(mod, ctrl).value;
  const DecomposedRealization dec = decompose(mod);
  const MatrixXd theta_true = laurent_input_coeffs(dec, mod.D, cfg.r, cfg.d).flattened();

  std::vector<double> sigma_v(cfg.snr.size());
  for (std::size_t s = 0; s < cfg.snr.size(); ++s)
    sigma_v[s] = detail::pilot_sigma_v(mod, ctrl, cfg, cfg.snr[s]);

  const long cells =
      static_cast<long>(cfg.snr.size()) * static_cast<long>(cfg.n_grid.size()) * cfg.trials;
  const int rows_per_cell = cfg.with_ls ? 2 : 1;
  ResultTable table;
  table.rows.resize(cells * rows_per_cell);

  detail::parallel_for(cells, [&](long idx) {
    const int trial = static_cast<int>(idx % cfg.trials);
    const long rest = idx / cfg.trials;
    const std::size_t ni = static_cast<std::size_t>(rest % cfg.n_grid.size());
    const std::size_t si = static_cast<std::size_t>(rest / cfg.n_grid.size());
    detail::CellSpec cell;
    cell.snr = cfg.snr[si];
    cell.sigma_v = sigma_v[si];
    cell.n = cfg.n_grid[ni];
    cell.trial = trial;
    cell.ctrl = &ctrl;
    cell.ctrl_name = cfg.controller.empty() ? "lqr" : cfg.controller;
    cell.t_inf = t_inf;
    cell.theta_true = &theta_true;
    ResultRow* iv_row = &table.rows[idx * rows_per_cell];
    ResultRow* ls_row = cfg.with_ls ? &table.rows[idx * rows_per_cell + 1] : nullptr;
    detail::run_cell(mod, cfg, cell, iv_row, ls_row);
  });
  return table;
}

// LQR plus a ladder of pole-placement controllers of rising aggressiveness;
// the dominant target pole sweeps linspace(0.50, 0.96, 7) with companions at
// 0.97 and 0.94 of it.
inline ResultTable run_controller_sweep(const ExperimentConfig& cfg) {
  if (cfg.trials < 1) throw DomainError("run_controller_sweep: trials must be positive");
  if (cfg.snr.empty() || cfg.n_grid.empty())
    throw DomainError("run_controller_sweep: snr and n_grid must be nonempty");
  const double snr = cfg.snr.front();
  const StateSpaceModel mod = resolve_model(cfg);
  const DecomposedRealization dec = decompose(mod);
  const MatrixXd theta_true = laurent_input_coeffs(dec, mod.D, cfg.r, cfg.d).flattened();

  std::vector<std::pair<std::string, Controller>> bank;
  bank.emplace_back("lqr", design_lqr(mod, MatrixXd::Identity(mod.n(), mod.n()),
                                      MatrixXd::Identity(mod.p(), mod.p())));
  for (double rho : linspace(0.50, 0.96, 7)) {
    std::ostringstream name;
    name << "pp_" << std::fixed << std::setprecision(2) << rho;
    bank.emplace_back(name.str(),
                      design_pole_placement(mod, {rho, 0.97 * rho, 0.94 * rho}));
  }

  std::vector<double> t_inf(bank.size());
  std::vector<double> sigma_v(bank.size());
  for (std::size_t c = 0; c < bank.size(); ++c) {
    t_inf[c] = t_infinity(mod, bank[c].second).value;
    sigma_v[c] = detail::pilot_sigma_v(mod, bank[c].second, cfg, snr);
  }

  const long cells =
      static_cast<long>(bank.size()) * static_cast<long>(cfg.n_grid.size()) * cfg.trials;
  const int rows_per_cell = cfg.with_ls ? 2 : 1;
  ResultTable table;
  table.rows.resize(cells * rows_per_cell);

  detail::parallel_for(cells, [&](long idx) {
    const int trial = static_cast<int>(idx % cfg.trials);
    const long rest = idx / cfg.trials;
    const std::size_t ni = static_cast<std::size_t>(rest % cfg.n_grid.size());
    const std::size_t ci = static_cast<std::size_t>(rest / cfg.n_grid.size());
    detail::CellSpec cell;
    cell.snr = snr;
    cell.sigma_v = sigma_v[ci];
    cell.n = cfg.n_grid[ni];
    cell.trial = trial;
    cell.ctrl = &bank[ci].second;
    cell.ctrl_name = bank[ci].first;
    cell.t_inf = t_inf[ci];
    cell.theta_true = &theta_true;
    ResultRow* iv_row = &table.rows[idx * rows_per_cell];
    ResultRow* ls_row = cfg.with_ls ? &table.rows[idx * rows_per_cell + 1] : nullptr;
    detail::run_cell(mod, cfg, cell, iv_row, ls_row);
  });
  return table;
}

inline ResultTable run_experiment(const ExperimentConfig& cfg) {
  if (cfg.kind == "error_vs_n") return run_error_vs_N(cfg);
  if (cfg.kind == "controller_sweep") return run_controller_sweep(cfg);
  throw DomainError("run_experiment: unknown kind \"" + cfg.kind + "\"");
}

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
};

// Log-log rate through per-N medians, with a bootstrap confidence interval
// over resampled trials within each N group.
inline RateFit fit_rate(const std::vector<std::pair<double, double>>& n_error_pairs,
                        int nboot = 1000, std::uint64_t seed = 12345) {
  std::map<double, std::vector<double>> groups;
  for (const auto& [n, err] : n_error_pairs) {
    if (!(n > 0.0) || !(err > 0.0))
      throw DataError("fit_rate: sample sizes and errors must be positive");
    groups[n].push_back(err);
  }
  if (groups.size() < 4) throw DataError("fit_rate: need at least 4 distinct sample sizes");
  std::vector<double> ns, meds;
  for (auto& [n, errs] : groups) {
    ns.push_back(n);
    meds.push_back(median(errs));
  }
  const LineFit base = fit_loglog(ns, meds);

  std::mt19937_64 engine(seed);
  std::vector<double> slopes;
  slopes.reserve(nboot);
  std::vector<double> boot_meds(ns.size());
  for (int b = 0; b < nboot; ++b) {
    std::size_t gi = 0;
    for (auto& [n, errs] : groups) {
      std::vector<double> sample(errs.size());
      std::uniform_int_distribution<std::size_t> pick(0, errs.size() - 1);
      for (double& s : sample) s = errs[pick(engine)];
      boot_meds[gi++] = median(sample);
    }
    slopes.push_back(fit_loglog(ns, boot_meds).slope);
  }
  RateFit fit;
  fit.slope = base.slope;
  fit.intercept = base.intercept;
  fit.ci_lo = quantile(slopes, 0.025);
  fit.ci_hi = quantile(slopes, 0.975);
  return fit;
}

inline Trajectory import_trajectory(const std::string& path) {
  return load_trajectory_csv(path);
}

namespace detail {

inline std::string sanitize_token(std::string s) {
  for (char& c : s) {
    if (c == ',' || c == '\n' || c == '\r') c = ';';
    if (c == '.') c = 'p';
    if (c == ' ' || c == '/') c = '_';
  }
  return s;
}

inline std::string sanitize_message(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return s;
}

inline std::string snr_token(double snr) {
  std::ostringstream os;
  os << snr;
  return sanitize_token(os.str());
}

}  // namespace detail

// Writes results.csv, a diagnostics.json summary, and quartile curves under
// plotdata/ grouped the way each experiment kind is plotted.
inline void export_results(const ResultTable& table, const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(fs::path(cfg.outdir) / "plotdata", ec);
  if (ec) throw IoError("cannot create output directory " + cfg.outdir);

  const std::string results_path = (fs::path(cfg.outdir) / "results.csv").string();
  std::ofstream f(results_path);
  if (!f) throw IoError("cannot open " + results_path + " for writing");
  f << "controller,estimator,snr,N,trial,seed,error,lambda_iv,t_infinity,elapsed_ms,ok,"
       "message\n";
  for (const ResultRow& row : table.rows) {
    f << row.controller << "," << row.estimator << "," << format_double(row.snr) << "," << row.N
      << "," << row.trial << "," << row.seed << "," << format_double(row.error) << ","
      << format_double(row.lambda_iv) << "," << format_double(row.t_infinity) << ","
      << format_double(row.elapsed_ms) << "," << (row.ok ? 1 : 0) << ","
      << detail::sanitize_message(row.message) << "\n";
  }
  if (!f.good()) throw IoError("write to " + results_path + " failed");
  f.close();

  const bool sweep = cfg.kind == "controller_sweep";
  std::map<std::string, std::map<long, std::vector<double>>> curves;
  std::map<std::string, std::vector<std::pair<double, double>>> fit_input;
  long failures = 0;
  for (const ResultRow& row : table.rows) {
    if (!row.ok) {
      ++failures;
      continue;
    }
    std::string key = sweep ? row.controller + "_" + row.estimator
                            : std::string("error_") + row.estimator + "_snr" +
                                  detail::snr_token(row.snr);
    curves[detail::sanitize_token(key)][row.N].push_back(row.error);
    if (!sweep)
      fit_input[row.estimator + "_snr" + detail::snr_token(row.snr)].push_back(
          {static_cast<double>(row.N), row.error});
  }

  for (const auto& [key, by_n] : curves) {
    const std::string path =
        (fs::path(cfg.outdir) / "plotdata" / (key + ".csv")).string();
    std::ofstream pf(path);
    if (!pf) throw IoError("cannot open " + path + " for writing");
    pf << "N,median_error,q25,q75\n";
    for (const auto& [n, errs] : by_n) {
      std::vector<double> copy = errs;
      pf << n << "," << format_double(median(copy)) << "," << format_double(quantile(copy, 0.25))
         << "," << format_double(quantile(copy, 0.75)) << "\n";
    }
    if (!pf.good()) throw IoError("write to " + path + " failed");
  }

  json diag;
  diag["library_version"] = kLibraryVersion;
  diag["schema_version"] = kSchemaVersion;
  diag["config"] = config_to_json(cfg);
  diag["rows"] = table.rows.size();
  diag["failures"] = failures;
  if (!sweep) {
    json fits = json::array();
    for (const auto& [key, pairs] : fit_input) {
      try {
        const RateFit fit = fit_rate(pairs);
        fits.push_back({{"series", key},
                        {"slope", fit.slope},
                        {"intercept", fit.intercept},
                        {"ci_lo", fit.ci_lo},
                        {"ci_hi", fit.ci_hi}});
      } catch (const Error&) {
      }
    }
    diag["fits"] = fits;
  } else {
    // Spearman correlation between controller aggressiveness and the IV
    // error at the largest sample size with full coverage.
    std::map<long, std::map<std::string, std::pair<double, std::vector<double>>>> sweep_rows;
    for (const ResultRow& row : table.rows)
      if (row.ok && row.estimator == "iv") {
        auto& slot = sweep_rows[row.N][row.controller];
        slot.first = row.t_infinity;
        slot.second.push_back(row.error);
      }
    std::size_t n_controllers = 0;
    for (auto it = sweep_rows.rbegin(); it != sweep_rows.rend(); ++it)
      n_controllers = std::max(n_controllers, it->second.size());
    for (auto it = sweep_rows.rbegin(); it != sweep_rows.rend(); ++it) {
      if (it->second.size() < n_controllers) continue;
      std::vector<double> tinfs, errs;
      for (auto& [name, slot] : it->second) {
        tinfs.push_back(slot.first);
        errs.push_back(median(slot.second));
      }
      diag["spearman_tinf_error"] = spearman(tinfs, errs);
      diag["spearman_at_N"] = it->first;
      break;
    }
  }
  detail::save_json_file((fs::path(cfg.outdir) / "diagnostics.json").string(), diag);
}

}  // namespace lfir
