#include "madelung/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <iostream>
#include <memory>
#include <sstream>

#include "madelung/error.hpp"
#include "madelung/io.hpp"
#include "madelung/limits.hpp"
#include "madelung/observables.hpp"
#include "madelung/solver.hpp"
#include "madelung/sweep.hpp"

namespace madelung::cli {

namespace {

struct RunConfig {
  std::string command;
  Params params;
  SolverOptions solver;
  QuadratureOptions quadrature;
  std::vector<double> T_values;
  std::vector<double> X_values;
  std::vector<double> T_range;
  std::vector<double> X_range;
  unsigned threads = 0;
  double step = 1e-3;
  std::string mode = "T";
  std::vector<double> window{10, 100};
  std::vector<double> small{0.01, 0.1};
  std::vector<double> large{10, 100};
  std::string table_in;
  std::string profile_out;
  std::string table_out;
  std::string figure;
  std::string plot_out;
  std::string output_dir;
  std::string format = "text";
  std::string config;
};

void require_finite_positive(double v, const std::string& name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw Error(ErrorCode::InvalidArgument, "option " + name + " must be positive and finite, got " + format_double(v));
  }
}

FitWindow window_of(const std::vector<double>& v, const std::string& name) {
  if (v.size() != 2) throw Error(ErrorCode::InvalidArgument, "option " + name + " needs two values lo,hi");
  require_finite_positive(v[0], name);
  require_finite_positive(v[1], name);
  if (v[1] < v[0]) throw Error(ErrorCode::InvalidArgument, "option " + name + " needs lo <= hi");
  return {v[0], v[1]};
}

std::vector<double> grid_of(const std::vector<double>& values, const std::vector<double>& range, const std::string& name,
                            double fallback) {
  if (!values.empty() && !range.empty()) {
    throw Error(ErrorCode::InvalidArgument, "give either --" + name + "-values or --" + name + "-range, not both");
  }
  if (!range.empty()) {
    if (range.size() != 3 || range[2] < 1 || range[2] != std::floor(range[2])) {
      throw Error(ErrorCode::InvalidArgument, "option --" + name + "-range needs lo,hi,count");
    }
    require_finite_positive(range[0], "--" + name + "-range");
    require_finite_positive(range[1], "--" + name + "-range");
    return log_grid(range[0], range[1], static_cast<std::size_t>(range[2]));
  }
  if (values.empty()) return {fallback};
  for (double v : values) require_finite_positive(v, "--" + name + "-values");
  return values;
}

void validate(const RunConfig& c) {
  c.params.validate();
  c.solver.validate();
  c.quadrature.validate();
  if (!(c.step > 0.0 && c.step < 0.5)) throw Error(ErrorCode::InvalidArgument, "option --step must lie in (0, 0.5)");
  if (c.format != "text" && c.format != "csv") {
    throw Error(ErrorCode::InvalidArgument, "option --format must be text or csv, got " + c.format);
  }
  if (!c.figure.empty()) check_figure_tag(c.figure);
  if (!c.figure.empty() && c.plot_out.empty()) throw Error(ErrorCode::InvalidArgument, "--figure needs --plot-out");
}

std::filesystem::path output_path(const RunConfig& c, const std::string& p) {
  const std::filesystem::path path(p);
  if (!c.output_dir.empty() && path.is_relative()) return std::filesystem::path(c.output_dir) / path;
  return resolve_output(path);
}

std::unique_ptr<CLI::App> build_app(RunConfig& c) {
  auto app = std::make_unique<CLI::App>("Self-trapped spinning Madelung fluid states", "madelung");
  app->require_subcommand(1);

  auto physics = [&](CLI::App* s) {
    s->add_option("--T", c.params.T, "analog temperature");
    s->add_option("--X", c.params.X, "central potential U(0)");
    s->add_option("--hbar", c.params.hbar, "reduced Planck constant");
    s->add_option("--m", c.params.m, "mass");
  };
  auto numerics = [&](CLI::App* s) {
    s->add_option("--rtol", c.solver.rtol, "integrator relative tolerance");
    s->add_option("--atol", c.solver.atol, "integrator absolute tolerance");
    s->add_option("--residual-tol", c.solver.residual_tol, "ODE residual tolerance");
    s->add_option("--u-cut", c.solver.u_cut, "potential at which integration stops (0: 1e4 max(X, T))");
    s->add_option("--max-steps", c.solver.max_steps, "integrator step budget");
    s->add_option("--tail-points", c.solver.tail_points, "samples for the blow-up estimate");
    s->add_option("--quad-tol", c.quadrature.rel_tol, "quadrature relative tolerance");
    s->add_option("--quad-max-level", c.quadrature.max_level, "maximum panel refinement level");
    s->add_option("--gauss-points", c.quadrature.gauss_points, "Gauss-Legendre nodes per panel");
  };
  auto grid = [&](CLI::App* s) {
    s->add_option("--T-values", c.T_values, "comma-separated T grid")->delimiter(',');
    s->add_option("--X-values", c.X_values, "comma-separated X grid")->delimiter(',');
    s->add_option("--T-range", c.T_range, "log-spaced T grid lo,hi,count")->delimiter(',');
    s->add_option("--X-range", c.X_range, "log-spaced X grid lo,hi,count")->delimiter(',');
    s->add_option("--threads", c.threads, "worker threads (0: hardware)");
  };
  auto outputs = [&](CLI::App* s) {
    s->add_option("--output-dir", c.output_dir, "directory for relative output paths (default $MADELUNG_OUTPUT_DIR)");
    s->add_option("--config", c.config, "key = value config file");
  };

  auto* solve = app->add_subcommand("solve", "solve one state and report its observables");
  physics(solve);
  numerics(solve);
  outputs(solve);
  solve->add_option("--profile-out", c.profile_out, "profile CSV path");
  solve->add_option("--table-out", c.table_out, "one-row state table CSV path");
  solve->add_option("--format", c.format, "stdout format: text or csv");

  auto* sweep = app->add_subcommand("sweep", "solve a (T, X) grid and write the state table");
  physics(sweep);
  numerics(sweep);
  grid(sweep);
  outputs(sweep);
  sweep->add_option("--table-out", c.table_out, "state table CSV path (stdout when absent)");
  sweep->add_option("--figure", c.figure, "plot script tag: fig2 fig3 fig5 fig7");
  sweep->add_option("--plot-out", c.plot_out, "plot script path");

  auto* verify = app->add_subcommand("verify", "check the invariants of one state");
  physics(verify);
  numerics(verify);
  outputs(verify);

  auto* limits = app->add_subcommand("limits", "compare small-T states with the Bessel ground state");
  physics(limits);
  numerics(limits);
  grid(limits);
  outputs(limits);
  limits->add_option("--figure", c.figure, "plot script tag: fig1");
  limits->add_option("--plot-out", c.plot_out, "plot script path");

  auto* fit = app->add_subcommand("fit", "log-log scaling fits of Ubar");
  physics(fit);
  numerics(fit);
  grid(fit);
  outputs(fit);
  fit->add_option("--table", c.table_in, "state table CSV to fit (solved from the grid when absent)");
  fit->add_option("--mode", c.mode, "T: Ubar vs T at fixed X; X: Ubar vs X at fixed T");
  fit->add_option("--window", c.window, "T window lo,hi")->delimiter(',');
  fit->add_option("--small", c.small, "small-X window lo,hi")->delimiter(',');
  fit->add_option("--large", c.large, "large-X window lo,hi")->delimiter(',');

  auto* tensions = app->add_subcommand("tensions", "first law, boundary tensions and free-energy differential");
  physics(tensions);
  numerics(tensions);
  outputs(tensions);
  tensions->add_option("--step", c.step, "relative finite-difference step");

  for (auto* s : {solve, sweep, verify, limits, fit, tensions}) {
    s->callback([&c, s] { c.command = s->get_name(); });
  }
  return app;
}

void parse(CLI::App& app, const std::vector<std::string>& args) {
  std::vector<const char*> argv{"madelung"};
  for (const auto& a : args) argv.push_back(a.c_str());
  app.parse(static_cast<int>(argv.size()), argv.data());
}

CLI::App* active(CLI::App& app) {
  const auto subs = app.get_subcommands();
  return subs.empty() ? nullptr : subs.front();
}

/// Flags from the command line, then config entries the command line did not set.
std::vector<std::string> merge_config(CLI::App& app, const std::vector<std::string>& args) {
  CLI::App* sub = active(app);
  if (sub == nullptr) return args;
  const CLI::Option* opt = sub->get_option_no_throw("--config");
  if (opt == nullptr || opt->count() == 0) return args;
  const auto kv = read_config(std::filesystem::path(opt->as<std::string>()));
  std::vector<std::string> merged = args;
  for (const auto& [key, value] : kv) {
    std::string name = key;
    std::replace(name.begin(), name.end(), '_', '-');
    const CLI::Option* o = sub->get_option_no_throw("--" + name);
    if (o == nullptr || name == "config") {
      throw Error(ErrorCode::InvalidArgument, "unknown config key '" + key + "' for command " + sub->get_name());
    }
    if (o->count() == 0) {
      merged.push_back("--" + name);
      merged.push_back(value);
    }
  }
  return merged;
}

std::string fmt(double v) { return format_double(v); }

void print_state(std::ostream& out, const ThermoState& s) {
  out << "T = " << fmt(s.params.T) << "\n"
      << "X = " << fmt(s.params.X) << "\n"
      << "Z = " << fmt(s.Z) << "\n"
      << "log_Z = " << fmt(s.log_Z) << "\n"
      << "Ubar = " << fmt(s.Ubar) << "\n"
      << "Kbar = " << fmt(s.Kbar) << "\n"
      << "Ebar = " << fmt(s.Ebar) << "\n"
      << "H = " << fmt(s.H) << "\n"
      << "F = " << fmt(s.F) << "\n"
      << "Ybar = " << fmt(s.Ybar) << "\n"
      << "r_m = " << fmt(s.r_m) << "\n"
      << "r_m_err = " << fmt(s.r_m_err) << "\n"
      << "L_s = " << fmt(s.L_s) << "\n"
      << "quadrature_level = " << s.level << "\n";
}

StateTable single_row(const ThermoState& s, const RunConfig& c, const RadialSolution& sol) {
  StateTable t;
  StateRow row;
  row.state = s;
  row.solver_rtol = c.solver.rtol;
  row.quadrature_tol = c.quadrature.rel_tol;
  if (!sol.monotone) row.status = "non_monotone";
  else if (!sol.positive_sensitivity) row.status = "nonpositive_sensitivity";
  t.rows.push_back(row);
  return t;
}

SweepOptions sweep_options(const RunConfig& c) { return {c.solver, c.quadrature, c.threads}; }

int cmd_solve(const RunConfig& c, std::ostream& out) {
  const RadialSolution sol = integrate_radial(c.params, c.solver);
  const PartitionFunction Z = partition_function(sol, c.quadrature);
  const ThermoState st = compute_state(sol, c.quadrature);
  if (c.format == "csv") {
    write_state_table_csv(out, single_row(st, c, sol));
  } else {
    print_state(out, st);
    out << "grid_points = " << sol.size() << "\n"
        << "steps = " << sol.steps << "\n";
  }
  if (!c.profile_out.empty()) write_profile_csv(output_path(c, c.profile_out), profile_rows(sol, Z));
  if (!c.table_out.empty()) write_state_table_csv(output_path(c, c.table_out), single_row(st, c, sol));
  return exit_ok;
}

StateTable run_grid(const RunConfig& c) {
  const auto T = grid_of(c.T_values, c.T_range, "T", c.params.T);
  const auto X = grid_of(c.X_values, c.X_range, "X", c.params.X);
  return sweep(T, X, sweep_options(c), c.params);
}

int cmd_sweep(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const StateTable table = run_grid(c);
  const auto failed = std::count_if(table.rows.begin(), table.rows.end(), [](const StateRow& r) { return !r.ok(); });
  if (failed > 0) err << "warning: " << failed << " of " << table.rows.size() << " rows did not complete\n";
  if (c.table_out.empty()) {
    write_state_table_csv(out, table);
  } else {
    write_state_table_csv(output_path(c, c.table_out), table);
  }
  if (!c.figure.empty()) {
    if (c.figure == "fig1") throw Error(ErrorCode::InvalidArgument, "fig1 is produced by the limits command");
    PlotData data;
    data.table = &table;
    emit_plot_script(c.figure, data, output_path(c, c.plot_out));
  }
  return exit_ok;
}

struct Check {
  std::string name;
  double value;
  double tol;
  bool pass;
};

int cmd_verify(const RunConfig& c, std::ostream& out) {
  const RadialSolution sol = integrate_radial(c.params, c.solver);
  const ThermoState st = compute_state(sol, c.quadrature);
  const ResidualReport res = check_residual(sol, c.solver.residual_tol);
  const double T = c.params.T;

  // Sensitivity against a central difference in X.
  const double dX = 1e-3 * c.params.X;
  Params plus = c.params, minus = c.params;
  plus.X += dX;
  minus.X -= dX;
  const RadialSolution sp = integrate_radial(plus, c.solver);
  const RadialSolution sm = integrate_radial(minus, c.solver);
  const double r_top = 0.9 * std::min({sol.r_m, sp.r_m, sm.r_m});
  double fd_err = 0.0;
  for (int i = 0; i <= 50; ++i) {
    const double r = r_top * i / 50.0;
    const double fd = (evaluate(sp, r).U - evaluate(sm, r).U) / (2 * dX);
    const double y = evaluate(sol, r).Y;
    fd_err = std::max(fd_err, std::abs(fd - y) / std::abs(y));
  }

  const std::vector<Check> checks{
      {"kinetic_identity", std::abs(st.Kbar - T) / T, 1e-4, std::abs(st.Kbar - T) / T <= 1e-4},
      {"entropy_identity", std::abs(st.entropy_identity()), 1e-6, std::abs(st.entropy_identity()) <= 1e-6},
      {"free_energy", std::abs(st.F - st.F_entropy), 1e-6 * std::abs(st.F),
       std::abs(st.F - st.F_entropy) <= 1e-6 * std::max(std::abs(st.F), 1e-300)},
      {"normalization", std::abs(st.normalization - 1), 1e-8, std::abs(st.normalization - 1) <= 1e-8},
      {"ode_residual", res.max_scaled_residual, res.residual_tol, res.max_scaled_residual <= res.residual_tol},
      {"sensitivity_residual", res.max_sensitivity_residual, res.residual_tol,
       res.max_sensitivity_residual <= res.residual_tol},
      {"madelung_closure", res.max_closure_error, res.closure_tol, res.max_closure_error <= res.closure_tol},
      {"sensitivity_fd", fd_err, 1e-5, fd_err <= 1e-5},
      {"monotone_U", sol.monotone ? 0.0 : 1.0, 0, sol.monotone},
      {"positive_Y", sol.positive_sensitivity ? 0.0 : 1.0, 0, sol.positive_sensitivity},
      {"positive_Ybar", st.Ybar, 0, st.Ybar > 0.0},
      {"Ubar_at_least_X", st.Ubar - c.params.X, 0, st.Ubar >= c.params.X},
      {"blowup_consistent", sol.blowup_consistent ? 0.0 : 1.0, 0, sol.blowup_consistent},
  };
  print_state(out, st);
  bool all = true;
  for (const auto& ch : checks) {
    out << (ch.pass ? "PASS " : "FAIL ") << ch.name << " value=" << fmt(ch.value) << " tol=" << fmt(ch.tol) << "\n";
    all = all && ch.pass;
  }
  return all ? exit_ok : exit_numerical;
}

int cmd_limits(const RunConfig& c, std::ostream& out) {
  const std::vector<double> T = c.T_values.empty() && c.T_range.empty() ? std::vector<double>{0.2, 0.1, 0.05, 0.02}
                                                                         : grid_of(c.T_values, c.T_range, "T", c.params.T);
  const GroundState g = ground_state(c.params.X, c.params);
  out << "B_0 = " << fmt(bessel_first_zero()) << "\n"
      << "X = " << fmt(g.X) << "\n"
      << "k = " << fmt(g.k) << "\n"
      << "r_0 = " << fmt(g.r_0) << "\n"
      << "A = " << fmt(g.A) << "\n"
      << "T,r_m,r_m_gap,sup_norm,Ubar\n";
  PlotData data;
  data.ground = g;
  for (double t : T) {
    Params p = c.params;
    p.T = t;
    const RadialSolution sol = integrate_radial(p, c.solver);
    const PartitionFunction Z = partition_function(sol, c.quadrature);
    const SmallTDeviation d = small_T_deviation(sol, Z);
    const Moment U = internal_energy(sol, Z, c.quadrature);
    out << fmt(t) << ',' << fmt(sol.r_m) << ',' << fmt(d.r_m_gap) << ',' << fmt(d.sup_norm) << ',' << fmt(U.value) << "\n";
    if (!c.figure.empty()) data.profiles.push_back({t, p.X, profile_rows(sol, Z)});
  }
  if (!c.figure.empty()) {
    if (c.figure != "fig1") throw Error(ErrorCode::InvalidArgument, c.figure + " is produced by the sweep command");
    emit_plot_script(c.figure, data, output_path(c, c.plot_out));
  }
  return exit_ok;
}

void print_fit(std::ostream& out, const std::string& name, const FitResult& f) {
  out << name << ".model = " << to_string(f.model) << "\n"
      << name << ".exponent = " << fmt(f.exponent) << "\n"
      << name << ".coefficient = " << fmt(f.coefficient) << "\n"
      << name << ".window = " << fmt(f.window.lo) << "," << fmt(f.window.hi) << "\n"
      << name << ".points = " << f.points << "\n"
      << name << ".residual_norm = " << fmt(f.residual_norm) << "\n";
}

int cmd_fit(const RunConfig& c, std::ostream& out) {
  if (c.mode != "T" && c.mode != "X") throw Error(ErrorCode::InvalidArgument, "option --mode must be T or X");
  const StateTable table =
      c.table_in.empty() ? run_grid(c) : read_state_table_csv(std::filesystem::path(c.table_in));
  if (c.mode == "T") {
    print_fit(out, "fit", fit_scaling_T(table, c.params.X, window_of(c.window, "--window")));
  } else {
    const ScalingXFit f = fit_scaling_X(table, c.params.T, window_of(c.small, "--small"), window_of(c.large, "--large"));
    print_fit(out, "small", f.small);
    print_fit(out, "large", f.large);
  }
  return exit_ok;
}

int cmd_tensions(const RunConfig& c, std::ostream& out) {
  const StateProvider provider = solving_provider(sweep_options(c));
  const FirstLawStudy fl = first_law_study(c.params, c.step, provider);
  const TensionReport t = boundary_tensions(c.params, relative_deltas(c.params, c.step), provider);
  const FreeEnergyReport f = free_energy_differential_check(c.params, relative_deltas(c.params, c.step), provider);
  out << "step = " << fmt(c.step) << "\n"
      << "first_law.residual_X = " << fmt(fl.coarse.residual_X) << "\n"
      << "first_law.residual_X_half = " << fmt(fl.fine.residual_X) << "\n"
      << "first_law.order_X = " << fmt(fl.order_X) << "\n"
      << "first_law.residual_T = " << fmt(fl.coarse.residual_T) << "\n"
      << "first_law.residual_T_half = " << fmt(fl.fine.residual_T) << "\n"
      << "first_law.order_T = " << fmt(fl.order_T) << "\n"
      << "first_law.residual_T_corrected = " << fmt(fl.coarse.residual_T_corrected) << "\n"
      << "first_law.order_T_corrected = " << fmt(fl.order_T_corrected) << "\n"
      << "first_law.mean_dU_dT = " << fmt(fl.coarse.mean_dU_dT) << "\n"
      << "Ybar = " << fmt(fl.coarse.Ybar) << "\n"
      << "dUbar_dX = " << fmt(fl.coarse.dUbar_dX) << "\n"
      << "dUbar_dX_minus_Ybar = " << fmt(fl.coarse.dUbar_dX - fl.coarse.Ybar) << "\n"
      << "drm_dX = " << fmt(t.drm_dX) << "\n"
      << "drm_dT = " << fmt(t.drm_dT) << "\n"
      << "dLs_dT = " << fmt(t.dLs_dT) << "\n"
      << "sigma_X = " << fmt(t.sigma_X) << "\n"
      << "sigma_T = " << fmt(t.sigma_T) << "\n"
      << "sigma = " << fmt(t.sigma) << "\n"
      << "degenerate_X = " << (t.degenerate_X ? "true" : "false") << "\n"
      << "degenerate_T = " << (t.degenerate_T ? "true" : "false") << "\n"
      << "free_energy.residual_X = " << fmt(f.residual_X) << "\n"
      << "free_energy.residual_T = " << fmt(f.residual_T) << "\n"
      << "free_energy.residual_sigma = " << fmt(f.residual_sigma) << "\n";
  return exit_ok;
}

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::UnknownFigureTag:
    case ErrorCode::InsufficientData:
    case ErrorCode::Io:
      return exit_validation;
    default:
      return exit_numerical;
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    RunConfig first;
    auto app = build_app(first);
    try {
      parse(*app, args);
    } catch (const CLI::ParseError& e) {
      if (e.get_exit_code() == 0) {
        out << app->help();
        return exit_ok;
      }
      err << "error: invalid_argument: " << e.what() << "\n";
      return exit_validation;
    }
    const std::vector<std::string> merged = merge_config(*app, args);

    RunConfig c;
    auto final_app = build_app(c);
    try {
      parse(*final_app, merged);
    } catch (const CLI::ParseError& e) {
      err << "error: invalid_argument: " << e.what() << "\n";
      return exit_validation;
    }
    validate(c);
    if (c.command == "solve") return cmd_solve(c, out);
    if (c.command == "sweep") return cmd_sweep(c, out, err);
    if (c.command == "verify") return cmd_verify(c, out);
    if (c.command == "limits") return cmd_limits(c, out);
    if (c.command == "fit") return cmd_fit(c, out);
    if (c.command == "tensions") return cmd_tensions(c, out);
    err << "error: invalid_argument: no command given\n";
    return exit_validation;
  } catch (const Error& e) {
    err << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const std::exception& e) {
    err << "error: internal: " << e.what() << "\n";
    return exit_numerical;
  }
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace madelung::cli
