#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <lfir/lfir.hpp>

namespace {

constexpr double kPi = 3.14159265358979323846;

lfir::Controller controller_from_arg(const std::string& arg, const lfir::StateSpaceModel& mod) {
  lfir::ExperimentConfig cfg;
  cfg.controller = arg;
  return lfir::resolve_controller(cfg, mod);
}

std::vector<double> omega_grid(int points) {
  if (points < 2) throw lfir::DomainError("frequency grid needs at least two points");
  std::vector<double> omegas(points);
  for (int k = 0; k < points; ++k) omegas[k] = kPi * k / (points - 1);
  return omegas;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Non-causal FIR identification of linear systems from closed-loop data"};
  app.set_version_flag("--version", std::string("lfir ") + lfir::kLibraryVersion + " (schema " +
                                        lfir::kSchemaVersion + ")");
  app.require_subcommand(0, 1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Simulate a closed loop and write a trajectory CSV");
  std::string sim_model, sim_controller = "zero", sim_out;
  long sim_length = 0;
  double sim_sigma_c = 1.0, sim_sigma_w = 0.0, sim_sigma_v = 0.0;
  std::uint64_t sim_seed = 1;
  bool sim_observables_only = false;
  sim->add_option("--model", sim_model, "Plant model JSON")->required();
  sim->add_option("--controller", sim_controller, "\"zero\", \"lqr\", or a controller JSON path");
  sim->add_option("--length", sim_length, "Number of steps")->required();
  sim->add_option("--sigma-c", sim_sigma_c, "Excitation level");
  sim->add_option("--sigma-w", sim_sigma_w, "Process noise level");
  sim->add_option("--sigma-v", sim_sigma_v, "Measurement noise level");
  sim->add_option("--seed", sim_seed, "Base RNG seed");
  sim->add_flag("--observables-only", sim_observables_only,
                "Write only the k, u, y columns");
  sim->add_option("--out", sim_out, "Output trajectory CSV")->required();

  // identify
  auto* ident = app.add_subcommand("identify", "Estimate the two-sided FIR coefficient block");
  std::string id_data, id_mode = "iv", id_policy = "truncated", id_estimates, id_diag;
  int id_r = 0, id_d = 0;
  double id_lambda_f = 1.0, id_eta = 0.0, id_tau_scale = 2.0, id_sigma_c = 0.0, id_ridge = 0.0;
  ident->add_option("--data", id_data, "Trajectory CSV")->required();
  ident->add_option("--r", id_r, "Past horizon")->required();
  ident->add_option("--d", id_d, "Future horizon")->required();
  ident->add_option("--mode", id_mode, "ls, iv, rls, or riv")
      ->check(CLI::IsMember({"ls", "iv", "rls", "riv"}));
  ident->add_option("--lambda-f", id_lambda_f, "Forgetting factor for recursive modes");
  ident->add_option("--eta", id_eta, "Initial inverse-Gram scale (<= 0 for the default)");
  ident->add_option("--iv-policy", id_policy, "literal or truncated")
      ->check(CLI::IsMember({"literal", "truncated"}));
  ident->add_option("--tau-scale", id_tau_scale, "Multiplier on the truncation threshold");
  ident->add_option("--ridge", id_ridge, "Ridge added to the batch Gram");
  ident->add_option("--sigma-c", id_sigma_c,
                    "Excitation level (0 estimates it from the c columns)");
  ident->add_option("--estimates", id_estimates, "Output coefficient CSV");
  ident->add_option("--diagnostics", id_diag, "Output instrument diagnostics JSON");

  // realize
  auto* real = app.add_subcommand("realize", "Reconstruct state-space parts from coefficients");
  std::string re_estimates, re_out, re_freq;
  int re_order_s = -1, re_order_u = -1, re_points = 256;
  real->add_option("--estimates", re_estimates, "Coefficient CSV")->required();
  real->add_option("--order-s", re_order_s, "Stable order (-1 picks the gap)");
  real->add_option("--order-u", re_order_u, "Unstable order (-1 picks the gap)");
  real->add_option("--out", re_out, "Output reconstruction JSON")->required();
  real->add_option("--frequency", re_freq, "Optional frequency response CSV");
  real->add_option("--points", re_points, "Frequency grid size over [0, pi]");

  // bound
  auto* bnd = app.add_subcommand("bound", "Evaluate the finite-sample error bound");
  std::string bd_config, bd_out;
  bnd->add_option("--config", bd_config, "Bound inputs JSON")->required();
  bnd->add_option("--out", bd_out, "Output report JSON")->required();

  // experiment
  auto* exp = app.add_subcommand("experiment", "Run a preset or configured experiment");
  std::string ex_config, ex_preset, ex_outdir;
  std::uint64_t ex_seed = 0;
  int ex_trials = 0;
  bool ex_seed_set = false, ex_trials_set = false;
  exp->add_option("config", ex_config, "Experiment configuration JSON");
  exp->add_option("--preset", ex_preset, "example1 or example4");
  exp->add_option("--outdir", ex_outdir, "Output directory override");
  exp->add_option("--seed", ex_seed, "Base seed override")->each([&](const std::string&) {
    ex_seed_set = true;
  });
  exp->add_option("--trials", ex_trials, "Trial count override")->each([&](const std::string&) {
    ex_trials_set = true;
  });

  // diagnose
  auto* diag = app.add_subcommand("diagnose", "Instrument and controller diagnostics");
  std::string dg_data, dg_model, dg_controller = "lqr", dg_out;
  int dg_r = 0, dg_d = 0;
  double dg_sigma_c = 1.0;
  auto* dg_data_opt = diag->add_option("--data", dg_data, "Trajectory CSV");
  auto* dg_r_opt = diag->add_option("--r", dg_r, "Past horizon");
  auto* dg_d_opt = diag->add_option("--d", dg_d, "Future horizon");
  dg_data_opt->needs(dg_r_opt);
  dg_data_opt->needs(dg_d_opt);
  diag->add_option("--sigma-c", dg_sigma_c, "Excitation level");
  diag->add_option("--model", dg_model, "Plant model JSON for closed-loop diagnostics");
  diag->add_option("--controller", dg_controller,
                   "\"zero\", \"lqr\", or a controller JSON path");
  diag->add_option("--out", dg_out, "Output diagnostics JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return 2;
  }

  std::string sub_name = "lfir";
  const auto parsed = app.get_subcommands();
  if (!parsed.empty()) sub_name = parsed.front()->get_name();

  try {
    if (sim->parsed()) {
      const lfir::StateSpaceModel mod = lfir::load_model_json(sim_model);
      const lfir::Controller ctrl = controller_from_arg(sim_controller, mod);
      lfir::NoiseSpec noise{sim_sigma_c, sim_sigma_w, sim_sigma_v, sim_seed};
      lfir::Trajectory traj =
          lfir::simulate_closed_loop(mod, ctrl, noise, sim_length, !sim_observables_only);
      if (sim_observables_only) {
        traj.c = lfir::MatrixXd();
        traj.f = lfir::MatrixXd();
        traj.w = lfir::MatrixXd();
        traj.v = lfir::MatrixXd();
        traj.x = lfir::MatrixXd();
      }
      lfir::save_trajectory_csv(sim_out, traj);
      std::cout << "wrote " << sim_out << "\n";
    } else if (ident->parsed()) {
      const lfir::Trajectory traj = lfir::load_trajectory_csv(id_data);
      const lfir::RegressorConfig cfg{id_r, id_d};
      lfir::MatrixXd theta;
      if (id_mode == "ls" || id_mode == "iv") {
        const lfir::DataMatrices dm = lfir::build_matrices(traj, cfg);
        if (id_mode == "ls") {
          theta = lfir::batch_ls(dm, id_ridge).theta;
        } else {
          lfir::BatchOptions opts;
          opts.policy = id_policy == "literal" ? lfir::GramPolicy::literal
                                               : lfir::GramPolicy::truncated;
          opts.ridge = id_ridge;
          opts.tau_scale = id_tau_scale;
          opts.sigma_c = id_sigma_c;
          theta = lfir::batch_iv(dm, opts).theta;
        }
        if (!id_diag.empty()) {
          const double sc = id_sigma_c > 0.0 ? id_sigma_c : 1.0;
          lfir::save_diagnostics_json(id_diag, lfir::instrument_diagnostics(dm, sc));
          std::cout << "wrote " << id_diag << "\n";
        }
      } else {
        const lfir::RecursiveMode mode =
            id_mode == "rls" ? lfir::RecursiveMode::ls : lfir::RecursiveMode::iv;
        lfir::RecursiveOptions opts;
        opts.lambda_f = id_lambda_f;
        opts.eta = id_eta;
        theta = lfir::run_recursive(traj, cfg, mode, opts).theta;
        if (!id_diag.empty()) {
          const lfir::DataMatrices dm = lfir::build_matrices(traj, cfg);
          const double sc = id_sigma_c > 0.0 ? id_sigma_c : 1.0;
          lfir::save_diagnostics_json(id_diag, lfir::instrument_diagnostics(dm, sc));
          std::cout << "wrote " << id_diag << "\n";
        }
      }
      if (!id_estimates.empty()) {
        lfir::save_estimates_csv(id_estimates,
                                 lfir::LaurentBlock::from_flattened(theta, id_r, id_d));
        std::cout << "wrote " << id_estimates << "\n";
      }
    } else if (real->parsed()) {
      const lfir::LaurentBlock blk = lfir::load_estimates_csv(re_estimates);
      lfir::HankelSpec spec_s, spec_u;
      spec_s.order = re_order_s;
      spec_u.order = re_order_u;
      const lfir::ReconstructedModel rec = lfir::reconstruct(blk, spec_s, spec_u);
      lfir::save_reconstructed_json(re_out, rec);
      std::cout << "wrote " << re_out << "\n";
      if (!re_freq.empty()) {
        const std::vector<double> omegas = omega_grid(re_points);
        lfir::save_frequency_csv(re_freq, omegas, lfir::frequency_response(rec, omegas));
        std::cout << "wrote " << re_freq << "\n";
      }
    } else if (bnd->parsed()) {
      const lfir::BoundInputs inputs = lfir::load_bound_inputs_json(bd_config);
      const lfir::BoundReport report = lfir::theorem_bound(inputs);
      lfir::save_bound_report_json(bd_out, report, inputs);
      std::cout << "wrote " << bd_out << "\n";
    } else if (exp->parsed()) {
      lfir::ExperimentConfig cfg;
      if (!ex_config.empty()) {
        cfg = lfir::config_from_json(lfir::detail::load_json_file(ex_config));
      } else if (ex_preset == "example1") {
        cfg = lfir::example1_config();
      } else if (ex_preset == "example4") {
        cfg = lfir::example4_config();
      } else {
        throw lfir::ParseError("experiment: pass a config JSON or --preset");
      }
      if (!ex_outdir.empty()) cfg.outdir = ex_outdir;
      if (ex_seed_set) cfg.seed = ex_seed;
      if (ex_trials_set) cfg.trials = ex_trials;
      const lfir::ResultTable table = lfir::run_experiment(cfg);
      lfir::export_results(table, cfg);
      std::cout << "wrote " << cfg.outdir << "/results.csv\n";
    } else if (diag->parsed()) {
      lfir::json out;
      if (!dg_data.empty()) {
        const lfir::Trajectory traj = lfir::load_trajectory_csv(dg_data);
        const bool with_f = traj.f.cols() == traj.length();
        const lfir::DataMatrices dm = lfir::build_matrices(traj, {dg_r, dg_d}, with_f);
        const lfir::InstrumentDiagnostics idg = lfir::instrument_diagnostics(dm, dg_sigma_c);
        out["s_iv"] = idg.s_iv;
        out["lambda_iv"] = idg.lambda_iv;
        if (idg.has_triangularity)
          out["triangularity_residual"] = idg.triangularity_residual;
        else
          out["triangularity_residual"] = nullptr;
        out["N"] = idg.N;
        out["r"] = idg.r;
        out["d"] = idg.d;
      }
      if (!dg_model.empty()) {
        const lfir::StateSpaceModel mod = lfir::load_model_json(dg_model);
        const lfir::Controller ctrl = controller_from_arg(dg_controller, mod);
        const lfir::ControllerDiagnostics cd = lfir::controller_diagnostics(mod, ctrl);
        out["rho_cl"] = cd.rho_cl;
        out["t_infinity"] = cd.t_inf.value;
        out["t_infinity_tail_bound"] = cd.t_inf.tail_bound;
        out["t_infinity_terms"] = cd.t_inf.terms;
      }
      if (out.empty()) throw lfir::DomainError("diagnose: pass --data and/or --model");
      if (dg_out.empty())
        std::cout << out.dump(2) << "\n";
      else {
        lfir::detail::save_json_file(dg_out, out);
        std::cout << "wrote " << dg_out << "\n";
      }
    } else {
      std::cout << app.help() << "\n";
    }
  } catch (const lfir::ParseError& e) {
    std::cerr << "lfir " << sub_name << ": " << e.what() << "\n";
    return 2;
  } catch (const lfir::IoError& e) {
    std::cerr << "lfir " << sub_name << ": " << e.what() << "\n";
    return 2;
  } catch (const lfir::Error& e) {
    std::cerr << "lfir " << sub_name << ": " << e.what() << "\n";
    return 1;
  }
  return 0;
}
