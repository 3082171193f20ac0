#include "runner.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <ostream>
#include <random>
#include <sstream>

#include "manifest.hpp"
#include "tbnls/csv.hpp"

namespace tbnls::cli {

namespace {

/// Error raised by a named pipeline stage.
struct StageError : std::runtime_error {
  StageError(std::string s, const std::string& what, int code)
      : std::runtime_error(what), stage(std::move(s)), exit_code(code) {}
  std::string stage;
  int exit_code;
};

struct Context {
  const ExperimentConfig& config;
  ArtifactWriter writer;
  std::ostream& log;
  std::string stage = "setup";
  std::vector<std::string> notes;
  bool acceptance_failed = false;

  void write(const std::string& name, const CsvTable& t) { writer.write(name, t.str()); }
};

LatticeModel build_model(Context& ctx) {
  ctx.stage = "lattice";
  const LatticeModel m = LatticeModel::build(ctx.config.lattice);
  for (const auto& issue : m.check_hypotheses()) ctx.notes.push_back("lattice: " + issue);
  return m;
}

ReductionSetup build_setup(Context& ctx, const LatticeModel& m, double hbar) {
  ctx.stage = "localized-basis";
  ReductionSetup s = prepare_reduction(m, hbar);
  for (const auto& w : s.well.warnings) ctx.notes.push_back("single well: " + w);
  return s;
}

SemiclassicalParams resolve_params(const ExperimentConfig& c, const ReductionSetup& s) {
  switch (c.model) {
    case Regime::model1: return model1_params(s.hbar, c.k_F, c.k_eta);
    case Regime::model2: return model2_params(s.hbar, s.coefficients.beta, c.k_F, c.k_eta);
    case Regime::custom: break;
  }
  SemiclassicalParams p{s.hbar, c.F, c.eta, Regime::custom};
  p.validate();
  return p;
}

double window(const ExperimentConfig& c, const ReductionSetup& s) {
  if (c.final_time > 0.0) return c.final_time;
  switch (c.model) {
    case Regime::model1: return std::pow(s.hbar, -c.gamma);
    case Regime::model2: return c.k_T * s.hbar / s.coefficients.beta;
    case Regime::custom: break;
  }
  return 1.0;
}

Eigen::VectorXcd initial_amplitudes(const ExperimentConfig& c) {
  const int n = c.lattice.num_cells;
  if (c.initial_state == "gaussian") return gaussian_amplitudes(n, c.initial_width);
  std::mt19937_64 rng(c.seed);
  std::normal_distribution<double> normal;
  Eigen::VectorXcd g = Eigen::VectorXcd::Zero(n);
  for (int k = 0; k < c.initial_width; ++k) {
    const double re = normal(rng), im = normal(rng);
    g[(n / 2 - c.initial_width / 2 + k + n) % n] = cplx(re, im);
  }
  return g / g.norm();
}

PairedRunConfig paired_config(const ExperimentConfig& c) {
  PairedRunConfig r;
  r.dt = c.dt;
  r.scheme = c.scheme;
  r.monitor_stride = c.monitor_stride;
  r.min_pde_steps = c.min_steps;
  r.wall_budget_seconds = c.wall_budget;
  return r;
}

std::vector<std::string> site_columns(const std::string& prefix, int n) {
  std::vector<std::string> cols;
  for (int j = 0; j < n; ++j) {
    cols.push_back("re_" + prefix + std::to_string(j));
    cols.push_back("im_" + prefix + std::to_string(j));
  }
  return cols;
}

std::vector<double> with_complex(double head, const Eigen::VectorXcd& v) {
  std::vector<double> row{head};
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    row.push_back(v[j].real());
    row.push_back(v[j].imag());
  }
  return row;
}

void cmd_bands(Context& ctx) {
  const LatticeModel m = build_model(ctx);
  ctx.stage = "lattice-spectral";
  const BlochSpectrum spectrum{BlochHamiltonian(m, ctx.config.hbar)};
  const BandData band = compute_band_data(spectrum);
  CsvTable t({"block", "quasimomentum", "E1", "E2"});
  for (std::size_t j = 0; j < band.quasimomenta.size(); ++j)
    t.add_row({double(j), band.quasimomenta[j], band.e1()[j], band.e2()[j]});
  ctx.write("bands.csv", t);
  CsvTable s({"hbar", "E1_bottom", "E1_top", "E2_bottom", "gap", "bandwidth"});
  s.add_row({ctx.config.hbar, band.e1_bottom, band.e1_top, band.e2_bottom, band.gap(),
             band.e1_top - band.e1_bottom});
  ctx.write("band_summary.csv", s);
  ctx.log << "first gap " << format_double(band.gap()) << "\n";
}

void cmd_basis(Context& ctx) {
  const LatticeModel m = build_model(ctx);
  const ReductionSetup s = build_setup(ctx, m, ctx.config.hbar);
  const auto& tb = s.coefficients;
  ctx.stage = "output";
  CsvTable head({"hbar", "lambda1", "beta", "C1", "S0", "residual_bound", "gram_residual",
                 "band_residual", "gram_condition", "well_distance"});
  head.add_row({s.hbar, tb.lambda1, tb.beta, tb.c1, tb.s0, tb.residual_bound(),
                s.basis.gram_residual, s.basis.band_residual, s.basis.gram_condition,
                s.basis.well_distance});
  ctx.write("tight_binding.csv", head);

  CsvTable chi({"site", "chi"});
  for (std::size_t n = 0; n < tb.chi.size(); ++n) chi.add_row({double(n), tb.chi[n]});
  ctx.write("coefficients.csv", chi);

  // Matrix elements from the central site outward; the W column shows how
  // fast the off-diagonal perturbation elements actually decay.
  const int c = m.central_site();
  CsvTable decay({"distance", "abs_H", "abs_W"});
  std::vector<double> dist, w_abs;
  for (int d = 0; d <= m.num_cells() / 2; ++d) {
    const int k = (c + d) % m.num_cells();
    const double aw = std::abs(tb.perturbation(c, k));
    decay.add_row({double(d), std::abs(tb.hamiltonian(c, k)), aw});
    if (d >= 1 && d <= 4 && aw > 0.0) {
      dist.push_back(d);
      w_abs.push_back(std::log(aw));
    }
  }
  ctx.write("matrix_decay.csv", decay);
  if (dist.size() >= 3) {
    const LinearFit f = fit_line(dist, w_abs, 3);
    ctx.notes.push_back("off-diagonal W elements decay like exp(" + format_double(f.slope) +
                        " |n-m|)");
  }

  std::vector<std::string> cols{"x"};
  for (const auto& name : site_columns("u", s.basis.size())) cols.push_back(name);
  CsvTable grid(cols);
  for (int j = 0; j < m.grid_size(); ++j) {
    std::vector<double> row{m.x(j)};
    for (const auto& u : s.basis.functions) {
      row.push_back(u[j].real());
      row.push_back(u[j].imag());
    }
    grid.add_row(row);
  }
  ctx.write("basis_functions.csv", grid);
  ctx.log << "beta " << format_double(tb.beta) << ", C1 " << format_double(tb.c1) << "\n";
}

struct PairedOutput {
  ReductionSetup setup;
  SemiclassicalParams params;
  PairedRunResult result;
};

PairedOutput paired(Context& ctx, bool remainders) {
  const LatticeModel m = build_model(ctx);
  ReductionSetup s = build_setup(ctx, m, ctx.config.hbar);
  const SemiclassicalParams p = resolve_params(ctx.config, s);
  PairedRunConfig rc = paired_config(ctx.config);
  rc.final_time = window(ctx.config, s);
  rc.remainders = remainders;
  CsvTable snaps({"tau", "x", "re_psi", "im_psi"});
  if (ctx.config.snapshots)
    rc.on_sample = [&](const FieldState& psi) {
      for (int j = 0; j < m.grid_size(); ++j)
        snaps.add_row({psi.tau, m.x(j), psi.values[j].real(), psi.values[j].imag()});
    };
  ctx.stage = "gpe-propagator";
  ctx.log << "paired run to T = " << format_double(rc.final_time) << "\n";
  PairedRunResult r = run_paired(s, p, initial_amplitudes(ctx.config), rc);
  if (ctx.config.snapshots) ctx.write("snapshots.csv", snaps);
  for (const auto& n : r.notes) ctx.notes.push_back(n);
  return {std::move(s), p, std::move(r)};
}

void write_run_tables(Context& ctx, const PairedOutput& o) {
  const auto& r = o.result;
  CsvTable err({"tau", "err_total", "err_perp", "err_amp"});
  CsvTable cons({"tau", "mass_drift", "energy_drift", "grad_norm", "sup_norm", "perp_norm",
                 "grad_flag", "sup_flag"});
  const int n = o.setup.basis.size();
  std::vector<std::string> tcols{"tau"};
  for (const auto& c : site_columns("g", n)) tcols.push_back(c);
  CsvTable traj(tcols);
  for (const auto& s : r.samples) {
    err.add_row({s.error.tau, s.error.err_total, s.error.err_perp, s.error.err_amp});
    const auto& c = s.conservation;
    cons.add_row({c.tau, c.mass_drift, c.energy_drift, c.grad_norm, c.sup_norm, c.perp_norm,
                  double(c.grad_flag), double(c.sup_flag)});
    traj.add_row(with_complex(s.error.tau, s.lattice));
  }
  ctx.write("reduction_error.csv", err);
  ctx.write("conservation.csv", cons);
  ctx.write("dnls_trajectory.csv", traj);

  CsvTable sum({"hbar", "F", "eta", "beta", "C1", "T_window", "T_reached", "dt", "pde_steps",
                "max_err_total", "max_err_perp", "max_err_amp", "max_mass_drift",
                "max_energy_drift", "dnls_norm_drift", "truncated"});
  const auto& tb = o.setup.coefficients;
  sum.add_row({o.params.hbar, o.params.F, o.params.eta, tb.beta, tb.c1, r.t_target, r.t_reached,
               r.dt, double(r.pde_steps), r.max_err_total, r.max_err_perp, r.max_err_amp,
               r.max_mass_drift, r.max_energy_drift, r.dnls_norm_drift, double(r.truncated)});
  ctx.write("summary.csv", sum);
  ctx.log << "max reduction error " << format_double(r.max_err_total) << "\n";
}

void cmd_simulate(Context& ctx) {
  const PairedOutput o = paired(ctx, false);
  ctx.stage = "output";
  write_run_tables(ctx, o);
}

void cmd_diagnose(Context& ctx) {
  const PairedOutput o = paired(ctx, true);
  ctx.stage = "reduction-harness";
  write_run_tables(ctx, o);
  const auto& r = o.result;
  const auto& p = o.params;
  const double hbar = p.hbar;
  const double lambda = p.F / hbar + std::abs(p.eta) * std::pow(hbar, -1.5);

  CsvTable rem({"tau", "r1", "F_r2", "F_r3", "eta_r4", "A", "B", "total", "perp", "triangle_ok"});
  std::vector<double> perps, totals;
  double cubic_perp = 0.0, amplitude_rate = 0.0;
  bool triangle = true;
  for (std::size_t i = 0; i < r.samples.size(); ++i) {
    const auto& d = r.samples[i].remainder;
    const bool ok = d.total <= d.r1 + d.r2 + d.r3 + d.r4 + 1e-14;
    triangle = triangle && ok;
    rem.add_row({d.tau, d.r1, d.r2, d.r3, d.r4, d.a, d.b, d.total, d.perp, double(ok)});
    perps.push_back(d.perp);
    totals.push_back(d.total);
    if (d.perp > 1e-12) cubic_perp = std::max(cubic_perp, d.a * std::sqrt(hbar) / d.perp);
    if (i > 0 && i + 1 < r.samples.size()) {
      const auto& prev = r.samples[i - 1];
      const auto& next = r.samples[i + 1];
      const double span = next.error.tau - prev.error.tau;
      const double cdot = (next.amplitudes - prev.amplitudes).norm() / span;
      const double scale = std::max({o.setup.coefficients.beta, hbar * lambda, d.total});
      amplitude_rate = std::max(amplitude_rate, hbar * cdot / scale);
    }
  }
  ctx.write("remainders.csv", rem);

  double offset = NAN, slope = NAN;
  try {
    const LinearFit f = fit_line(perps, totals, 4);
    offset = f.intercept;
    slope = f.slope;
  } catch (const std::invalid_argument& e) {
    ctx.notes.push_back(std::string("no remainder regression: ") + e.what());
  }
  CsvTable sum({"hbar", "lambda", "offset_a", "slope_b", "slope_over_hbar_lambda",
                "cubic_perp_ratio_max", "amplitude_rate_ratio_max", "triangle_ok"});
  sum.add_row({hbar, lambda, offset, slope, lambda > 0 ? slope / (hbar * lambda) : NAN, cubic_perp,
               amplitude_rate, double(triangle)});
  ctx.write("diagnostics_summary.csv", sum);
  if (!triangle) throw StageError("reduction-harness", "remainder triangle inequality violated", kNumericalFailure);
}

SweepConfig sweep_config(const ExperimentConfig& c) {
  SweepConfig s;
  s.lattice = c.lattice;
  s.hbars = c.hbar_list;
  s.k_F = c.k_F;
  s.k_eta = c.k_eta;
  s.gamma = c.gamma;
  s.k_T = c.k_T;
  s.initial_width = c.initial_width;
  s.run = paired_config(c);
  s.run.remainders = false;
  s.workers = c.workers;
  return s;
}

void write_sweep(Context& ctx, const SweepResult& r, const std::vector<SweepCheck>& checks) {
  CsvTable t({"hbar", "F", "eta", "beta", "C1", "S0", "T_window", "max_err_total",
              "max_err_perp", "max_err_amp", "max_grad_scaled", "max_sup_scaled", "truncated",
              "failed"});
  for (const auto& row : r.rows)
    t.add_row({row.hbar, row.F, row.eta, row.beta, row.c1, row.s0, row.t_window,
               row.max_err_total, row.max_err_perp, row.max_err_amp, row.max_grad_scaled,
               row.max_sup_scaled, double(row.truncated), double(row.failed)});
  ctx.write("sweep.csv", t);
  CsvTable f({"slope", "intercept", "stderr", "halfwidth95", "points"});
  if (r.fit_valid)
    f.add_row({r.fit.slope, r.fit.intercept, r.fit.slope_stderr, r.fit.slope_halfwidth(0.95),
               double(r.fit.points)});
  ctx.write("fit.csv", f);
  CsvTable c({"check", "passed", "detail"});
  for (const auto& ch : checks) {
    c.add_row_text({ch.name, ch.passed ? "1" : "0", "\"" + ch.detail + "\""});
    ctx.log << (ch.passed ? "[PASS] " : "[FAIL] ") << ch.name << ": " << ch.detail << "\n";
    if (!ch.passed) ctx.acceptance_failed = true;
  }
  ctx.write("checks.csv", c);
  for (const auto& n : r.notes) ctx.notes.push_back(n);
  for (const auto& row : r.rows)
    if (!row.note.empty()) ctx.notes.push_back("h = " + format_double(row.hbar) + ": " + row.note);
  for (const auto& row : r.rows)
    if (row.failed)
      throw StageError("reduction-harness", "sweep point h = " + format_double(row.hbar) +
                                                " failed: " + row.note,
                       kNumericalFailure);
}

void cmd_sweep(Context& ctx, Regime regime) {
  build_model(ctx);
  ctx.stage = "reduction-harness";
  const SweepConfig sc = sweep_config(ctx.config);
  const auto progress = [&ctx](const SweepRow& row) {
    ctx.log << "h = " << format_double(row.hbar)
            << (row.failed ? " failed: " + row.note
                           : " max err " + format_double(row.max_err_total))
            << "\n";
  };
  if (regime == Regime::model1) {
    const SweepResult r = run_model1_sweep(sc, progress);
    auto checks = check_model1_sweep(r, 0.4, 3.0);
    const auto mon = check_norm_monitors(r, 3.0);
    checks.insert(checks.end(), mon.begin(), mon.end());
    write_sweep(ctx, r, checks);
  } else {
    const SweepResult r = run_model2_sweep(sc, progress);
    write_sweep(ctx, r, check_model2_sweep(r, 0.95, 0.15, 3.0));
  }
}

}  // namespace

const std::vector<std::string>& commands() {
  static const std::vector<std::string> names{"bands",    "basis",        "simulate",
                                              "diagnose", "sweep-model1", "sweep-model2"};
  return names;
}

int run(const std::string& command, const ExperimentConfig& config, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  Context ctx{config, ArtifactWriter(config.output_directory), log, "setup", {}, false};
  ManifestInfo info;
  info.command = command;
  info.config_text = serialize(config);
  ctx.writer.write("config.ini", info.config_text);

  try {
    if (command == "bands") cmd_bands(ctx);
    else if (command == "basis") cmd_basis(ctx);
    else if (command == "simulate") cmd_simulate(ctx);
    else if (command == "diagnose") cmd_diagnose(ctx);
    else if (command == "sweep-model1") cmd_sweep(ctx, Regime::model1);
    else if (command == "sweep-model2") cmd_sweep(ctx, Regime::model2);
    else throw StageError("command", "unknown command '" + command + "'", kConfigError);
    if (ctx.acceptance_failed) info.exit_code = kAcceptanceFailure;
  } catch (const StageError& e) {
    info.failed = true;
    info.failed_stage = e.stage;
    info.error = e.what();
    info.exit_code = e.exit_code;
  } catch (const std::invalid_argument& e) {
    info.failed = true;
    info.failed_stage = ctx.stage;
    info.error = e.what();
    info.exit_code = kConfigError;
  } catch (const std::exception& e) {
    // ResolutionError, SpectralError, NumericalError and anything unexpected
    info.failed = true;
    info.failed_stage = ctx.stage;
    info.error = e.what();
    info.exit_code = kNumericalFailure;
  }
  if (info.failed) log << "error in stage " << info.failed_stage << ": " << info.error << "\n";
  for (const auto& n : ctx.notes) log << "note: " << n << "\n";
  info.notes = ctx.notes;
  info.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_manifest(ctx.writer, info);
  return info.exit_code;
}

}  // namespace tbnls::cli
